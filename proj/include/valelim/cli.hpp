#pragma once

#include "valelim/engine.hpp"
#include "valelim/model.hpp"
#include "valelim/netio.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace valelim {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailed = 1,     ///< verify found a disagreement
    kExitUsage = 2,      ///< bad flags, unreadable network, unknown names
    kExitAborted = 3,    ///< timeout, node limit or oracle budget
};

/// Parses `Name=Label,Name=Label`; throws std::invalid_argument naming the
/// offending variable and its valid labels.
std::vector<Assignment> parse_evidence(const BayesNet & net, std::string_view spec);

/// Resolves an ordering flag: min-fill, dynamic, dynamic-random, id, or a path
/// to a file of whitespace-separated variable names.
void apply_ordering(const BayesNet & net, const std::string & spec, EngineConfig & config);

/// Runs one named engine. Besides the three search modes this accepts
/// "brute-force" and "ve".
ResultRecord run_engine(const BayesNet & net, const Query & query, const std::string & engine,
                        const EngineConfig & config);

/// Entry point behind the tool; `args` excludes the program name.
int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

} // namespace valelim
