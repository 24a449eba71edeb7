#pragma once

#include "valelim/model.hpp"
#include "valelim/oracle.hpp"

#include <span>
#include <vector>

namespace valelim {

/// Dense function over `scope`, row-major with the last variable fastest.
struct TableFunction {
    std::vector<VarId> scope;
    std::vector<double> table;

    /// Entry under `values` (indexed by variable id); scope vars must be set.
    double at(const BayesNet & net, std::span<const int> values) const;
};

struct EliminationOrder {
    std::vector<VarId> order;
};

/// Greedy min-fill over the moral graph restricted to non-excluded variables.
/// Ties go to the smaller degree, then the smaller id.
EliminationOrder min_fill_order(const BayesNet & net, std::span<const VarId> excluded = {});

/// CPT as a table over its scope minus the variables fixed in `values`.
TableFunction restrict_cpt(const BayesNet & net, VarId cpt, std::span<const int> values);

/// Multiplies every function mentioning `var` and sums `var` out. The result
/// scope is the union of their scopes minus `var`, sorted by id.
TableFunction sum_out(const BayesNet & net, std::span<const TableFunction> functions, VarId var);

/// Moves the functions mentioning `var` out of `pool`, sums `var` out of
/// their product, and appends the result to `pool`. Returns a copy of it.
TableFunction eliminate(const BayesNet & net, std::vector<TableFunction> & pool, VarId var);

/// `order` must list exactly the variables that are neither evidence nor the
/// query variable.
Posterior ve_query(const BayesNet & net, const Query & query, const EliminationOrder & order);

/// The function produced at each elimination step (no evidence). `order` may
/// be any duplicate-free list of variables.
std::vector<TableFunction> ve_intermediates(const BayesNet & net, const EliminationOrder & order);

} // namespace valelim
