#pragma once

// Ground truth by exhaustive enumeration. Nothing in here prunes or caches;
// it exists to be checked against.

#include "valelim/cache.hpp"
#include "valelim/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace valelim {

struct OracleBudget {
    std::uint64_t max_states = std::uint64_t{1} << 20;
};

struct Posterior {
    std::vector<double> probabilities;   ///< Empty when zero_evidence is set.
    bool zero_evidence = false;
};

/// Sum of the joint over every completion of `pinned`, i.e. Pr(pinned).
double gen_and_sum(const BayesNet & net, std::span<const Assignment> pinned, OracleBudget budget = {});

Posterior posterior_bruteforce(const BayesNet & net, const Query & query, OracleBudget budget = {});

struct FactorCheck {
    bool valid = true;
    std::vector<Assignment> counterexample;   ///< Outside-variable instantiation u.
    double summed = 0.0;                      ///< S(u) at the counterexample.
    double context = 0.0;                     ///< P(u) at the counterexample.
};

/// Checks that summing the joint over `factor.sset` with `factor.dset` fixed
/// equals factor.val times the product of the CPTs that mention no subsumed
/// variable, for every instantiation of the remaining variables.
FactorCheck check_factor_valid(const BayesNet & net, const Factor & factor, OracleBudget budget = {},
                               double rel_tolerance = 1e-9);

struct NogoodCheck {
    bool sound = true;
    std::vector<int> counterexample;   ///< Complete assignment with positive probability.
};

NogoodCheck check_nogood(const BayesNet & net, std::span<const Assignment> nogood, OracleBudget budget = {});

} // namespace valelim
