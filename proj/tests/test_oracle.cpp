#include "fixtures.hpp"

#include "valelim/errors.hpp"
#include "valelim/netio.hpp"
#include "valelim/oracle.hpp"

#include <doctest.h>

using namespace valelim;
using namespace valelim::testing;

TEST_CASE("gen_and_sum examples")
{
    auto net = reference_chain();
    CHECK(gen_and_sum(net, {}) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<Assignment> b0{{1, 0}};
    CHECK(gen_and_sum(net, b0) == doctest::Approx(0.50).epsilon(1e-12));
    std::vector<Assignment> all{{0, 0}, {1, 0}, {2, 0}};
    CHECK(gen_and_sum(net, all) == doctest::Approx(0.21).epsilon(1e-12));
}

TEST_CASE("gen_and_sum respects its budget")
{
    auto net = random_network(25, 1, 2, 0.0, 3);
    CHECK_THROWS_AS(gen_and_sum(net, {}), BudgetExceeded);
    std::vector<Assignment> pinned;
    for (VarId v = 0; v < 10; ++v)
        pinned.push_back({v, 0});
    CHECK_NOTHROW(gen_and_sum(net, pinned));
}

TEST_CASE("gen_and_sum normalizes and splits over any unpinned variable")
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto net = random_network(2 + seed % 9, 3, 3, seed % 2 ? 0.25 : 0.0, seed);
        CAPTURE(seed);
        CHECK(gen_and_sum(net, {}) == doctest::Approx(1.0).epsilon(1e-9));

        std::vector<Assignment> pinned{{0, static_cast<int>(seed % net.domain_size(0))}};
        const auto v = static_cast<VarId>(1 + seed % (net.size() - 1));
        const double whole = gen_and_sum(net, pinned);
        double parts = 0.0;
        for (int d = 0; d < net.domain_size(v); ++d) {
            auto more = pinned;
            more.push_back({v, d});
            parts += gen_and_sum(net, more);
        }
        CHECK(parts == doctest::Approx(whole).epsilon(1e-12));
    }
}

TEST_CASE("posterior_bruteforce examples")
{
    auto post = posterior_bruteforce(reference_chain(), {{{0, 0}}, 2});
    REQUIRE(! post.zero_evidence);
    CHECK(same_posterior(post.probabilities, {0.62, 0.38}));

    post = posterior_bruteforce(single_root(), {{}, 0});
    CHECK(same_posterior(post.probabilities, {0.6, 0.4}));

    // Pr(C=0 | B=1) = 0 and B=1 pinned with C=0.
    post = posterior_bruteforce(chain_with_zero(), {{{1, 1}, {2, 0}}, 0});
    CHECK(post.zero_evidence);
    CHECK(post.probabilities.empty());
}

TEST_CASE("posterior_bruteforce matches normalized joint enumeration")
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto net = random_network(2 + seed % 11, 3, 2, seed % 2 ? 0.25 : 0.0, seed);
        Query q{{{static_cast<VarId>(seed % net.size()), 1}}, static_cast<VarId>((seed + 1) % net.size())};

        std::vector<double> mass(static_cast<std::size_t>(net.domain_size(q.query_var)), 0.0);
        std::vector<int> values(net.size(), 0);
        while (true) {
            if (values[static_cast<std::size_t>(q.evidence[0].var)] == 1)
                mass[static_cast<std::size_t>(values[static_cast<std::size_t>(q.query_var)])] +=
                    joint_probability(net, values);
            std::size_t i = 0;
            for (; i < net.size(); ++i) {
                if (++values[i] < net.domain_size(static_cast<VarId>(i)))
                    break;
                values[i] = 0;
            }
            if (i == net.size())
                break;
        }
        double z = 0.0;
        for (double m : mass)
            z += m;

        auto post = posterior_bruteforce(net, q);
        CAPTURE(seed);
        REQUIRE(post.zero_evidence == (z == 0.0));
        if (z > 0.0) {
            for (auto & m : mass)
                m /= z;
            CHECK(same_posterior(post.probabilities, mass));
        }
    }
}

TEST_CASE("check_factor_valid examples")
{
    auto net = reference_chain();
    CHECK(check_factor_valid(net, make_factor({{1, 0}}, {2}, 1.0)).valid);

    auto bad = check_factor_valid(net, make_factor({{1, 0}}, {2}, 0.5));
    CHECK(! bad.valid);
    CHECK(bad.summed == doctest::Approx(bad.context));

    CHECK(check_factor_valid(net, make_factor({}, {0, 1, 2}, 1.0)).valid);
    CHECK(! check_factor_valid(net, make_factor({}, {0, 1, 2}, 0.9)).valid);
}

TEST_CASE("check_factor_valid on a summed-out middle variable")
{
    // Summing B under A=0 with C=0 fixed gives 0.7*0.5 + 0.3*0.9 = 0.62.
    auto net = reference_chain();
    CHECK(check_factor_valid(net, make_factor({{0, 0}, {2, 0}}, {1}, 0.62)).valid);
    CHECK(! check_factor_valid(net, make_factor({{0, 0}, {2, 0}}, {1}, 0.6)).valid);
}

TEST_CASE("check_nogood examples")
{
    std::vector<Assignment> zero{{1, 1}, {2, 0}};
    CHECK(check_nogood(chain_with_zero(), zero).sound);

    std::vector<Assignment> b0{{1, 0}};
    auto r = check_nogood(reference_chain(), b0);
    CHECK(! r.sound);
    REQUIRE(r.counterexample.size() == 3);
    CHECK(r.counterexample[1] == 0);
    CHECK(joint_probability(reference_chain(), r.counterexample) > 0.0);

    CHECK(! check_nogood(reference_chain(), std::vector<Assignment>{}).sound);
}
