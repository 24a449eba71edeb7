#include "fixtures.hpp"

#include "valelim/model.hpp"
#include "valelim/netio.hpp"
#include "valelim/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace valelim;
using namespace valelim::testing;

namespace {

std::vector<int> values_of(const BayesNet & net, std::initializer_list<Assignment> as)
{
    return dense_values(net, std::vector<Assignment>(as));
}

// Sum of the joint over every complete assignment, by direct enumeration.
double total_mass(const BayesNet & net)
{
    std::vector<int> values(net.size(), 0);
    double total = 0.0;
    while (true) {
        total += joint_probability(net, values);
        std::size_t i = 0;
        for (; i < net.size(); ++i) {
            if (++values[i] < net.domain_size(static_cast<VarId>(i)))
                break;
            values[i] = 0;
        }
        if (i == net.size())
            return total;
    }
}

} // namespace

TEST_CASE("validate_network accepts the reference chain")
{
    CHECK(validate_network(reference_chain()).empty());
}

TEST_CASE("validate_network reports a short row with its location")
{
    BayesNet net({{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}},
                 {{0, {}, {0.5, 0.5}}, {1, {0}, {0.7, 0.2, 0.5, 0.5}}});
    auto violations = validate_network(net);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == Violation::Kind::row_sum);
    CHECK(violations[0].cpt == 1);
    CHECK(violations[0].row == 0);
    CHECK(violations[0].message.find("row sum 0.9") != std::string::npos);
}

TEST_CASE("validate_network finds a two-variable cycle")
{
    BayesNet net({{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}},
                 {{0, {1}, {0.5, 0.5, 0.5, 0.5}}, {1, {0}, {0.5, 0.5, 0.5, 0.5}}});
    auto violations = validate_network(net);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].kind == Violation::Kind::cycle);
    CHECK(violations[0].message == "cycle A,B");
}

TEST_CASE("validate_network flags every structural problem it can")
{
    BayesNet net({{"A", {"x", "x"}}, {"A", {}}},
                 {{0, {}, {0.5, 0.5, 0.1}}, {1, {0, 0}, {}}});
    auto violations = validate_network(net);
    auto has = [&](Violation::Kind k) {
        return std::any_of(violations.begin(), violations.end(), [&](const Violation & v) { return v.kind == k; });
    };
    CHECK(has(Violation::Kind::duplicate_name));
    CHECK(has(Violation::Kind::duplicate_label));
    CHECK(has(Violation::Kind::empty_domain));
    CHECK(has(Violation::Kind::table_size));
    CHECK(has(Violation::Kind::duplicate_parent));
}

TEST_CASE("validate_network rejects entries outside [0,1]")
{
    BayesNet net({{"A", {"a0", "a1"}}}, {{0, {}, {1.5, -0.5}}});
    auto violations = validate_network(net);
    REQUIRE(! violations.empty());
    CHECK(violations[0].kind == Violation::Kind::probability_range);
}

TEST_CASE("eval_cpt looks up table entries")
{
    auto net = reference_chain();
    CHECK(eval_cpt(net, 1, values_of(net, {{0, 0}, {1, 0}})) == doctest::Approx(0.7));
    CHECK(eval_cpt(net, 0, values_of(net, {{0, 1}})) == doctest::Approx(0.4));
    auto zero = chain_with_zero();
    CHECK(eval_cpt(zero, 2, values_of(zero, {{1, 1}, {2, 0}})) == 0.0);
}

TEST_CASE("eval_cpt rejects an unassigned scope variable")
{
    auto net = reference_chain();
    CHECK_THROWS_AS(eval_cpt(net, 1, values_of(net, {{1, 0}})), std::invalid_argument);
}

TEST_CASE("joint_probability multiplies every CPT")
{
    auto net = reference_chain();
    CHECK(joint_probability(net, values_of(net, {{0, 0}, {1, 0}, {2, 0}})) == doctest::Approx(0.21));
    auto zero = chain_with_zero();
    CHECK(joint_probability(zero, values_of(zero, {{0, 1}, {1, 1}, {2, 0}})) == 0.0);
    auto root = single_root();
    CHECK(joint_probability(root, values_of(root, {{0, 1}})) == doctest::Approx(0.4));
}

TEST_CASE("joint_probability needs a complete assignment")
{
    auto net = reference_chain();
    CHECK_THROWS_AS(joint_probability(net, values_of(net, {{0, 0}})), std::invalid_argument);
}

TEST_CASE("remove_barren drops non-query leaves")
{
    auto net = reference_chain();
    auto r = remove_barren(net, {{}, 1});
    CHECK(r.removed == std::vector<VarId>{2});
    CHECK(r.net.size() == 2);
    CHECK(r.net.variable(r.query.query_var).name == "B");
}

TEST_CASE("remove_barren works recursively")
{
    auto net = reference_chain();
    auto r = remove_barren(net, {{}, 0});
    CHECK(r.removed == std::vector<VarId>{2, 1});
    CHECK(r.net.size() == 1);
    CHECK(r.to_original == std::vector<VarId>{0});
}

TEST_CASE("remove_barren keeps evidence and its ancestors")
{
    auto net = reference_chain();
    auto r = remove_barren(net, {{{2, 0}}, 0});
    CHECK(r.removed.empty());
    CHECK(r.net == net);
}

TEST_CASE("remove_barren renumbers evidence consistently")
{
    // A -> B, A -> C, evidence on C: B is barren, C shifts down one id.
    BayesNet net({{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}, {"C", {"c0", "c1"}}},
                 {{0, {}, {0.3, 0.7}}, {1, {0}, {0.1, 0.9, 0.6, 0.4}}, {2, {0}, {0.2, 0.8, 0.5, 0.5}}});
    auto r = remove_barren(net, {{{2, 1}}, 0});
    REQUIRE(r.removed == std::vector<VarId>{1});
    REQUIRE(r.query.evidence.size() == 1);
    CHECK(r.net.variable(r.query.evidence[0].var).name == "C");
    CHECK(r.to_reduced[1] == kNoVar);
}

TEST_CASE("random networks sum to one under the joint")
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto n = 1 + seed % 12;
        auto net = random_network(n, 3, seed % 3 == 0 ? 2 : 3, seed % 2 ? 0.25 : 0.0, seed);
        if (n > 9)
            net = random_network(n, 2, 2, seed % 2 ? 0.25 : 0.0, seed);
        CAPTURE(seed);
        CHECK(total_mass(net) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("remove_barren preserves the query posterior")
{
    std::size_t removed_somewhere = 0;
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
        auto net = random_network(2 + seed % 9, 2, 3, seed % 2 ? 0.25 : 0.0, seed);
        Query q;
        q.query_var = static_cast<VarId>(seed % net.size());
        if (net.size() > 2 && seed % 3) {
            const auto e = static_cast<VarId>((seed * 7 + 1) % net.size());
            if (e != q.query_var)
                q.evidence.push_back({e, 0});
        }
        auto before = posterior_bruteforce(net, q);
        auto r = remove_barren(net, q);
        removed_somewhere += r.removed.size();
        auto after = posterior_bruteforce(r.net, r.query);
        CAPTURE(seed);
        REQUIRE(before.zero_evidence == after.zero_evidence);
        CHECK(same_posterior(before.probabilities, after.probabilities));
    }
    CHECK(removed_somewhere > 0);
}

TEST_CASE("validation agrees with enumeration-based normalization")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto net = random_network(2 + seed % 7, 2, 3, 0.0, seed);
        CHECK(validate_network(net).empty());
        CHECK(total_mass(net) == doctest::Approx(1.0).epsilon(1e-9));

        // Inflate one entry: the row no longer sums to one and neither does the joint.
        auto vars = net.variables();
        auto cpts = net.cpts();
        auto & t = cpts[seed % cpts.size()].table;
        t[0] = std::min(1.0, t[0] + 0.25);
        if (t[0] == 1.0 && t.size() > 1)
            t[1] = 0.5;
        BayesNet broken(std::move(vars), std::move(cpts));
        CHECK(! validate_network(broken).empty());
        CHECK(std::abs(total_mass(broken) - 1.0) > 1e-9);
    }
}

TEST_CASE("dense_values and check_query reject malformed input")
{
    auto net = reference_chain();
    CHECK_THROWS_AS(dense_values(net, std::vector<Assignment>{{0, 0}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(dense_values(net, std::vector<Assignment>{{0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(check_query(net, {{{1, 0}}, 1}), std::invalid_argument);
    CHECK_THROWS_AS(check_query(net, {{}, 3}), std::invalid_argument);
}

TEST_CASE("single-value domains are allowed")
{
    BayesNet net({{"A", {"only"}}, {"B", {"b0", "b1"}}}, {{0, {}, {1.0}}, {1, {0}, {0.25, 0.75}}});
    CHECK(validate_network(net).empty());
    CHECK(total_mass(net) == doctest::Approx(1.0));
}
