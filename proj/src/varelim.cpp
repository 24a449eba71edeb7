#include "valelim/varelim.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace valelim {

namespace {

std::vector<std::size_t> strides_for(const BayesNet & net, std::span<const VarId> scope)
{
    std::vector<std::size_t> strides(scope.size(), 1);
    for (std::size_t i = scope.size(); i-- > 1;)
        strides[i - 1] = strides[i] * static_cast<std::size_t>(net.domain_size(scope[i]));
    return strides;
}

std::size_t table_size(const BayesNet & net, std::span<const VarId> scope)
{
    std::size_t size = 1;
    for (VarId v : scope)
        size *= static_cast<std::size_t>(net.domain_size(v));
    return size;
}

// Advances `values` over `vars` like an odometer (last var fastest); false
// once every combination has been produced.
bool next_instantiation(const BayesNet & net, std::span<const VarId> vars, std::vector<int> & values)
{
    for (std::size_t i = vars.size(); i-- > 0;) {
        auto & x = values[static_cast<std::size_t>(vars[i])];
        if (++x < net.domain_size(vars[i]))
            return true;
        x = 0;
    }
    return false;
}

} // namespace

double TableFunction::at(const BayesNet & net, std::span<const int> values) const
{
    auto strides = strides_for(net, scope);
    std::size_t index = 0;
    for (std::size_t i = 0; i < scope.size(); ++i)
        index += strides[i] * static_cast<std::size_t>(values[static_cast<std::size_t>(scope[i])]);
    return table[index];
}

EliminationOrder min_fill_order(const BayesNet & net, std::span<const VarId> excluded)
{
    const auto n = net.size();
    std::vector<char> live(n, 1);
    for (VarId v : excluded)
        live[static_cast<std::size_t>(v)] = 0;

    std::vector<std::set<VarId>> adj(n);
    for (std::size_t c = 0; c < n; ++c) {
        auto scope = net.scope(static_cast<VarId>(c));
        for (VarId a : scope)
            for (VarId b : scope)
                if (a != b && live[static_cast<std::size_t>(a)] && live[static_cast<std::size_t>(b)])
                    adj[static_cast<std::size_t>(a)].insert(b);
    }

    auto fill_of = [&](VarId v) {
        const auto & nbrs = adj[static_cast<std::size_t>(v)];
        std::size_t fill = 0;
        for (auto i = nbrs.begin(); i != nbrs.end(); ++i)
            for (auto j = std::next(i); j != nbrs.end(); ++j)
                if (! adj[static_cast<std::size_t>(*i)].count(*j))
                    ++fill;
        return fill;
    };

    EliminationOrder out;
    std::size_t remaining = static_cast<std::size_t>(std::count(live.begin(), live.end(), 1));
    while (remaining-- > 0) {
        VarId best = kNoVar;
        std::size_t best_fill = 0, best_degree = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (! live[v])
                continue;
            const auto id = static_cast<VarId>(v);
            const auto fill = fill_of(id);
            const auto degree = adj[v].size();
            if (best == kNoVar || fill < best_fill || (fill == best_fill && degree < best_degree)) {
                best = id;
                best_fill = fill;
                best_degree = degree;
            }
        }
        const auto b = static_cast<std::size_t>(best);
        const std::vector<VarId> nbrs(adj[b].begin(), adj[b].end());
        for (VarId x : nbrs) {
            adj[static_cast<std::size_t>(x)].erase(best);
            for (VarId y : nbrs)
                if (x != y)
                    adj[static_cast<std::size_t>(x)].insert(y);
        }
        adj[b].clear();
        live[b] = 0;
        out.order.push_back(best);
    }
    return out;
}

TableFunction restrict_cpt(const BayesNet & net, VarId cpt, std::span<const int> values)
{
    TableFunction f;
    for (VarId v : net.scope(cpt))
        if (values[static_cast<std::size_t>(v)] == kUnassigned)
            f.scope.push_back(v);
    f.table.reserve(table_size(net, f.scope));

    std::vector<int> work(values.begin(), values.end());
    for (VarId v : f.scope)
        work[static_cast<std::size_t>(v)] = 0;
    do
        f.table.push_back(net.eval_unchecked(cpt, work));
    while (next_instantiation(net, f.scope, work));
    return f;
}

TableFunction sum_out(const BayesNet & net, std::span<const TableFunction> functions, VarId var)
{
    std::set<VarId> joined;
    std::vector<const TableFunction *> participants;
    for (const auto & f : functions)
        if (std::find(f.scope.begin(), f.scope.end(), var) != f.scope.end()) {
            participants.push_back(&f);
            joined.insert(f.scope.begin(), f.scope.end());
        }
    if (participants.empty())
        throw std::invalid_argument("sum_out: no function mentions " + net.variable(var).name);
    joined.erase(var);

    TableFunction result;
    result.scope.assign(joined.begin(), joined.end());
    result.table.assign(table_size(net, result.scope), 0.0);
    auto out_strides = strides_for(net, result.scope);

    std::vector<VarId> loop_vars = result.scope;
    loop_vars.push_back(var);
    std::vector<int> values(net.size(), 0);
    do {
        double prod = 1.0;
        for (const auto * f : participants)
            prod *= f->at(net, values);
        std::size_t index = 0;
        for (std::size_t i = 0; i < result.scope.size(); ++i)
            index += out_strides[i] * static_cast<std::size_t>(values[static_cast<std::size_t>(result.scope[i])]);
        result.table[index] += prod;
    } while (next_instantiation(net, loop_vars, values));
    return result;
}

TableFunction eliminate(const BayesNet & net, std::vector<TableFunction> & pool, VarId var)
{
    std::vector<TableFunction> involved, rest;
    for (auto & f : pool)
        (std::find(f.scope.begin(), f.scope.end(), var) != f.scope.end() ? involved : rest).push_back(std::move(f));
    if (involved.empty()) {
        // No function mentions var: summing a constant over its domain.
        involved.push_back({{var}, std::vector<double>(static_cast<std::size_t>(net.domain_size(var)), 1.0)});
    }
    auto result = sum_out(net, involved, var);
    rest.push_back(result);
    pool = std::move(rest);
    return result;
}

Posterior ve_query(const BayesNet & net, const Query & query, const EliminationOrder & order)
{
    check_query(net, query);
    auto values = dense_values(net, query.evidence);

    std::vector<char> expected(net.size(), 0);
    for (std::size_t v = 0; v < net.size(); ++v)
        expected[v] = values[v] == kUnassigned && static_cast<VarId>(v) != query.query_var;
    std::vector<char> seen(net.size(), 0);
    for (VarId v : order.order) {
        if (v < 0 || static_cast<std::size_t>(v) >= net.size() || ! expected[static_cast<std::size_t>(v)]
            || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("elimination order must list each non-evidence, non-query variable once");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    if (std::count(seen.begin(), seen.end(), 1) != std::count(expected.begin(), expected.end(), 1))
        throw std::invalid_argument("elimination order misses a variable");

    std::vector<TableFunction> pool;
    for (std::size_t c = 0; c < net.size(); ++c)
        pool.push_back(restrict_cpt(net, static_cast<VarId>(c), values));
    for (VarId v : order.order)
        eliminate(net, pool, v);

    const auto q = static_cast<std::size_t>(query.query_var);
    Posterior out;
    out.probabilities.assign(static_cast<std::size_t>(net.domain_size(query.query_var)), 1.0);
    for (int d = 0; d < net.domain_size(query.query_var); ++d) {
        values[q] = d;
        for (const auto & f : pool)
            out.probabilities[static_cast<std::size_t>(d)] *= f.at(net, values);
    }
    double total = 0.0;
    for (double p : out.probabilities)
        total += p;
    if (total == 0.0) {
        out.probabilities.clear();
        out.zero_evidence = true;
        return out;
    }
    for (auto & p : out.probabilities)
        p /= total;
    return out;
}

std::vector<TableFunction> ve_intermediates(const BayesNet & net, const EliminationOrder & order)
{
    std::vector<char> seen(net.size(), 0);
    for (VarId v : order.order) {
        if (v < 0 || static_cast<std::size_t>(v) >= net.size() || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("elimination order lists an unknown or repeated variable");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<int> none(net.size(), kUnassigned);
    std::vector<TableFunction> pool;
    for (std::size_t c = 0; c < net.size(); ++c)
        pool.push_back(restrict_cpt(net, static_cast<VarId>(c), none));

    std::vector<TableFunction> out;
    for (VarId v : order.order)
        out.push_back(eliminate(net, pool, v));
    return out;
}

} // namespace valelim
