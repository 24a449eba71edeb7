#pragma once

#include "valelim/model.hpp"

#include <cmath>
#include <vector>

namespace valelim::testing {

// A -> B -> C with Pr(A)=(0.6,0.4), B|A rows (0.7,0.3),(0.2,0.8), C|B rows (0.5,0.5),(0.9,0.1).
inline BayesNet reference_chain()
{
    std::vector<Variable> vars{{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}, {"C", {"c0", "c1"}}};
    std::vector<Cpt> cpts{
        {0, {}, {0.6, 0.4}},
        {1, {0}, {0.7, 0.3, 0.2, 0.8}},
        {2, {1}, {0.5, 0.5, 0.9, 0.1}},
    };
    return BayesNet(std::move(vars), std::move(cpts));
}

// Same chain but Pr(C=0|B=1) = 0.
inline BayesNet chain_with_zero()
{
    std::vector<Variable> vars{{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}, {"C", {"c0", "c1"}}};
    std::vector<Cpt> cpts{
        {0, {}, {0.6, 0.4}},
        {1, {0}, {0.7, 0.3, 0.2, 0.8}},
        {2, {1}, {0.5, 0.5, 0.0, 1.0}},
    };
    return BayesNet(std::move(vars), std::move(cpts));
}

inline BayesNet single_root(double p0 = 0.6)
{
    return BayesNet({{"A", {"a0", "a1"}}}, {{0, {}, {p0, 1.0 - p0}}});
}

// Chain of deterministic copies: X0 uniform, X(i) = X(i-1).
inline BayesNet copy_chain(std::size_t n)
{
    std::vector<Variable> vars;
    std::vector<Cpt> cpts;
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<VarId>(i);
        vars.push_back({"X" + std::to_string(i), {"s0", "s1"}});
        if (i == 0)
            cpts.push_back({id, {}, {0.5, 0.5}});
        else
            cpts.push_back({id, {id - 1}, {1.0, 0.0, 0.0, 1.0}});
    }
    return BayesNet(std::move(vars), std::move(cpts));
}

inline bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

inline bool same_posterior(const std::vector<double> & a, const std::vector<double> & b, double tol = 1e-9)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (! close(a[i], b[i], tol))
            return false;
    return true;
}

} // namespace valelim::testing
