#pragma once

#include "valelim/cache.hpp"
#include "valelim/model.hpp"
#include "valelim/netio.hpp"
#include "valelim/propagate.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace valelim {

enum class EngineMode { gen_and_sum, prob_bt, value_elim };

enum class OrderingKind {
    static_order,     ///< First active variable of a fixed order.
    dynamic,          ///< Deadends, then forced variables, then the fixed order.
    dynamic_random,   ///< Deadends, then forced variables, then a seeded random pick.
};

/// Picks the next branching variable among `candidates` (active, in static
/// order). Consulted by the dynamic strategy after deadends and forced
/// variables.
using VariableHeuristic = std::function<VarId(const SearchState &, std::span<const VarId> candidates)>;

struct EngineConfig {
    EngineMode mode = EngineMode::value_elim;
    OrderingKind ordering = OrderingKind::static_order;
    /// Branching order in original ids; empty means the reverse of a min-fill
    /// elimination order. The query variable is always branched first.
    std::vector<VarId> static_order;
    std::size_t cache_budget = kUnboundedCache;
    bool nogood_learning = true;
    bool forward_checking = true;
    bool remove_barren = true;
    std::uint64_t seed = 0;
    double timeout_seconds = 0.0;   ///< 0 disables.
    std::uint64_t node_limit = 0;   ///< 0 disables.
    VariableHeuristic heuristic;
    /// Test hook for the verify harness: added to the first posterior entry.
    double debug_posterior_offset = 0.0;
};

struct CachedFactor {
    Factor factor;
    VarId origin = kNoVar;   ///< Variable whose sum produced the factor.
};

/// Everything a run did, in the ids of the network actually searched.
struct Diagnostics {
    BayesNet searched;
    Query query;
    std::vector<VarId> to_original;
    std::vector<VarId> removed;                         ///< Barren variables, original ids.
    std::vector<VarId> order;                           ///< Static branching order used.
    std::vector<CachedFactor> factors;                  ///< Every factor created, merged ones included.
    std::vector<Nogood> nogoods;                        ///< Learned nogoods.
    std::vector<std::vector<Assignment>> zero_skips;    ///< Contexts whose subtree was skipped.
    std::vector<std::vector<Assignment>> prunes;        ///< Trail plus each pruned value.
};

/// Posterior of query.query_var given the evidence. Throws SearchAborted when
/// the configured timeout or node limit is hit.
ResultRecord run_query(const BayesNet & net, const Query & query, const EngineConfig & config = {},
                       Diagnostics * diagnostics = nullptr);

std::string engine_name(EngineMode mode);
std::string ordering_name(const EngineConfig & config);

} // namespace valelim
