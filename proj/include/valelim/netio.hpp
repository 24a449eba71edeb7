#pragma once

#include "valelim/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace valelim {

enum class NetworkFormat { bif, json };

struct NetworkSource {
    NetworkFormat format = NetworkFormat::bif;
    std::string payload;
};

struct ParseOptions {
    /// Rows whose sum is within this of 1 are renormalized; others are rejected.
    double row_tolerance = kRowSumTolerance;
};

/// Parses and validates a network. Throws ParseError with a location on any
/// syntax, reference, or table problem.
BayesNet parse_network(const NetworkSource & source, const ParseOptions & options = {});

/// Reads a file; the format is chosen by extension (.json, anything else BIF).
BayesNet load_network(const std::string & path, const ParseOptions & options = {});

std::string write_bif(const BayesNet & net, std::string_view name = "network");
std::string write_json(const BayesNet & net);

/// Random DAG whose parents always have smaller ids. Deterministic per seed.
BayesNet random_network(std::size_t n_vars, std::size_t max_parents, int max_domain, double zero_fraction,
                        std::uint64_t seed);

/// Binary chain X0 -> X1 -> ... with strictly positive random rows.
BayesNet chain_network(std::size_t n, std::uint64_t seed = 1);

/// Two independent binary chains of length k: X0..X(k-1) and Y0..Y(k-1).
BayesNet disjoint_chains(std::size_t k, std::uint64_t seed = 1);

/// Work counters for one query run.
struct SearchStats {
    std::uint64_t nodes = 0;
    std::uint64_t cpt_evals = 0;
    std::uint64_t factors_cached = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t nogoods = 0;
    std::uint64_t purges = 0;
    double wall_ms = 0.0;
};

struct ResultRecord {
    std::string engine;
    std::string ordering;
    std::string query;
    std::vector<double> posterior;   ///< Empty when zero_evidence is set.
    bool zero_evidence = false;
    SearchStats stats;
};

/// One tab-separated line of key=value pairs (no trailing newline).
std::string emit_result(const ResultRecord & record);

/// Inverse of emit_result(); throws ParseError on malformed input.
ResultRecord parse_result(std::string_view line);

/// Same as emit_result() with wall_ms forced to 0, for determinism checks.
std::string emit_result_without_timing(ResultRecord record);

} // namespace valelim
