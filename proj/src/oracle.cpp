#include "valelim/oracle.hpp"

#include "valelim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace valelim {

namespace {

void charge(const BayesNet & net, std::span<const VarId> free_vars, OracleBudget budget)
{
    std::uint64_t states = 1;
    for (VarId v : free_vars) {
        const auto d = static_cast<std::uint64_t>(net.domain_size(v));
        if (d != 0 && states > budget.max_states / d)
            throw BudgetExceeded("enumeration exceeds the oracle budget of " + std::to_string(budget.max_states)
                                 + " states");
        states *= d;
    }
    if (states > budget.max_states)
        throw BudgetExceeded("enumeration exceeds the oracle budget of " + std::to_string(budget.max_states)
                             + " states");
}

std::vector<VarId> free_variables(std::span<const int> values)
{
    std::vector<VarId> out;
    for (std::size_t v = 0; v < values.size(); ++v)
        if (values[v] == kUnassigned)
            out.push_back(static_cast<VarId>(v));
    return out;
}

// Calls fn() once per completion of `vars`, in lexicographic order with the
// first variable slowest. `values` holds the completion during the call.
template <typename Fn>
void enumerate(std::span<const VarId> vars, std::vector<int> & values, const BayesNet & net, Fn && fn,
               std::size_t depth = 0)
{
    if (depth == vars.size()) {
        fn();
        return;
    }
    const auto v = static_cast<std::size_t>(vars[depth]);
    for (int d = 0; d < net.domain_size(vars[depth]); ++d) {
        values[v] = d;
        enumerate(vars, values, net, fn, depth + 1);
    }
    values[v] = kUnassigned;
}

} // namespace

double gen_and_sum(const BayesNet & net, std::span<const Assignment> pinned, OracleBudget budget)
{
    auto values = dense_values(net, pinned);
    auto free_vars = free_variables(values);
    charge(net, free_vars, budget);

    double sum = 0.0;
    enumerate(free_vars, values, net, [&] {
        double prod = 1.0;
        for (std::size_t c = 0; c < net.size(); ++c)
            prod *= net.eval_unchecked(static_cast<VarId>(c), values);
        sum += prod;
    });
    return sum;
}

Posterior posterior_bruteforce(const BayesNet & net, const Query & query, OracleBudget budget)
{
    check_query(net, query);
    Posterior out;
    std::vector<Assignment> pinned = query.evidence;
    pinned.push_back({query.query_var, 0});
    double total = 0.0;
    for (int d = 0; d < net.domain_size(query.query_var); ++d) {
        pinned.back().value = d;
        out.probabilities.push_back(gen_and_sum(net, pinned, budget));
        total += out.probabilities.back();
    }
    if (total == 0.0) {
        out.probabilities.clear();
        out.zero_evidence = true;
        return out;
    }
    for (auto & p : out.probabilities)
        p /= total;
    return out;
}

FactorCheck check_factor_valid(const BayesNet & net, const Factor & factor, OracleBudget budget,
                               double rel_tolerance)
{
    auto values = dense_values(net, factor.dset);
    std::vector<char> subsumed(net.size(), 0);
    for (VarId v : factor.sset) {
        if (v < 0 || static_cast<std::size_t>(v) >= net.size())
            throw std::invalid_argument("subsumed variable out of range");
        if (values[static_cast<std::size_t>(v)] != kUnassigned)
            throw std::invalid_argument("subsumed variable " + net.variable(v).name + " also in the dependency set");
        subsumed[static_cast<std::size_t>(v)] = 1;
    }

    std::vector<VarId> outside;
    for (std::size_t v = 0; v < net.size(); ++v)
        if (values[v] == kUnassigned && ! subsumed[v])
            outside.push_back(static_cast<VarId>(v));
    std::vector<VarId> all_free = outside;
    all_free.insert(all_free.end(), factor.sset.begin(), factor.sset.end());
    charge(net, all_free, budget);

    // CPTs touching a subsumed variable are the ones the factor sums over;
    // the rest form the context product P(u).
    std::vector<VarId> inner, context;
    for (std::size_t c = 0; c < net.size(); ++c) {
        auto scope = net.scope(static_cast<VarId>(c));
        bool touches = std::any_of(scope.begin(), scope.end(),
                                   [&](VarId v) { return subsumed[static_cast<std::size_t>(v)] != 0; });
        (touches ? inner : context).push_back(static_cast<VarId>(c));
    }

    FactorCheck result;
    enumerate(outside, values, net, [&] {
        if (! result.valid)
            return;
        double p = 1.0;
        for (VarId c : context)
            p *= net.eval_unchecked(c, values);

        double s = 0.0;
        enumerate(factor.sset, values, net, [&] {
            double prod = 1.0;
            for (std::size_t c = 0; c < net.size(); ++c)
                prod *= net.eval_unchecked(static_cast<VarId>(c), values);
            s += prod;
        });

        if (p == 0.0)
            return;
        const double ratio = s / p;
        if (std::abs(ratio - factor.val) > rel_tolerance * std::max({1.0, std::abs(ratio), std::abs(factor.val)})) {
            result.valid = false;
            result.summed = s;
            result.context = p;
            for (VarId v : outside)
                result.counterexample.push_back({v, values[static_cast<std::size_t>(v)]});
        }
    });
    return result;
}

NogoodCheck check_nogood(const BayesNet & net, std::span<const Assignment> nogood, OracleBudget budget)
{
    auto values = dense_values(net, nogood);
    auto free_vars = free_variables(values);
    charge(net, free_vars, budget);

    NogoodCheck result;
    enumerate(free_vars, values, net, [&] {
        if (! result.sound)
            return;
        double prod = 1.0;
        for (std::size_t c = 0; c < net.size() && prod != 0.0; ++c)
            prod *= net.eval_unchecked(static_cast<VarId>(c), values);
        if (prod != 0.0) {
            result.sound = false;
            result.counterexample = values;
        }
    });
    return result;
}

} // namespace valelim
