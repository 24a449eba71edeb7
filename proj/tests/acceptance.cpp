// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.

#include "checks.hpp"

#include "valelim/engine.hpp"
#include "valelim/errors.hpp"
#include "valelim/netio.hpp"
#include "valelim/oracle.hpp"
#include "valelim/protocol.hpp"
#include "valelim/varelim.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace valelim;
using namespace valelim::testing;

namespace {

constexpr double kPosteriorTolerance = 1e-9;
constexpr double kNormalizationTolerance = 1e-9;
constexpr double kCorrespondenceRelTolerance = 1e-12;
constexpr double kFactorRelTolerance = 1e-9;
constexpr double kAdditivityRatio = 2.5;
constexpr double kChainSeconds = 1.0;
constexpr double kAnySpaceTimeoutSeconds = 20.0;
constexpr std::size_t kTrials = 200;
constexpr std::size_t kOracleVars = 10;
const OracleBudget kBigBudget{std::uint64_t{1} << 24};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// The random population shared by criteria 1, 2, 4, 5 and 9.
struct Instance {
    std::uint64_t seed;
    double zero_fraction;
    BayesNet net;
    Query query;
};

std::vector<Instance> population()
{
    std::vector<Instance> out;
    for (std::size_t t = 0; t < kTrials; ++t) {
        const std::uint64_t seed = 1000 + t;
        const std::size_t n = 2 + t % 11;
        const int max_domain = 2 + static_cast<int>(t % 3);
        const double zf = t % 2 ? 0.25 : 0.0;
        auto net = random_network(n, 3, max_domain, zf, seed);
        auto q = random_query(net, seed);
        out.push_back({seed, zf, std::move(net), q});
    }
    return out;
}

// Per-instance results of every engine configuration, reused across criteria.
struct Run {
    std::string name;
    EngineConfig config;
    ResultRecord record;
    Diagnostics diag;
};

struct Population {
    std::vector<Instance> instances;
    std::vector<std::vector<Run>> runs;
    double seconds = 0.0;
};

Population run_population()
{
    Population p;
    const auto start = Clock::now();
    p.instances = population();
    for (const auto & inst : p.instances) {
        std::vector<Run> runs;
        for (const auto & nc : engine_matrix()) {
            Run r{nc.name, nc.config, {}, {}};
            r.record = run_query(inst.net, inst.query, nc.config, &r.diag);
            runs.push_back(std::move(r));
        }
        p.runs.push_back(std::move(runs));
    }
    p.seconds = seconds_since(start);
    return p;
}

Verdict oracle_equivalence(const Population & p)
{
    Verdict v;
    double worst = 0.0;
    std::size_t oracle_checked = 0;
    for (std::size_t i = 0; i < p.instances.size(); ++i) {
        const auto & inst = p.instances[i];
        Posterior reference;
        try {
            reference = posterior_bruteforce(inst.net, inst.query, kBigBudget);
            ++oracle_checked;
        }
        catch (const BudgetExceeded &) {
            std::vector<VarId> excluded{inst.query.query_var};
            for (const auto & e : inst.query.evidence)
                excluded.push_back(e.var);
            reference = ve_query(inst.net, inst.query, min_fill_order(inst.net, excluded));
        }
        for (const auto & r : p.runs[i]) {
            const double d = max_abs_difference(r.record, reference);
            worst = std::max(worst, d);
            if (d > kPosteriorTolerance && v.pass) {
                v.pass = false;
                v.detail = "seed=" + std::to_string(inst.seed) + " config=" + r.name + " diff=" + fmt(d) + "; ";
            }
        }
    }
    v.detail += "instances=" + std::to_string(p.instances.size()) + " configs=" + std::to_string(engine_matrix().size())
                + " oracle_checked=" + std::to_string(oracle_checked) + " max_diff=" + fmt(worst)
                + " tol=" + fmt(kPosteriorTolerance) + " time=" + fmt(p.seconds) + "s";
    if (p.seconds > 120.0)
        v.pass = false;
    return v;
}

Verdict normalization(const Population & p)
{
    Verdict v;
    double worst = 0.0;
    std::size_t nets = 0;
    auto check = [&](const BayesNet & net) {
        const double z = gen_and_sum(net, {}, kBigBudget);
        worst = std::max(worst, std::abs(z - 1.0));
        ++nets;
    };
    for (const auto & inst : p.instances)
        check(inst.net);
    for (std::uint64_t s = 0; s < 50; ++s)
        check(random_network(2 + s % 9, 3, 3, s % 2 ? 0.25 : 0.0, 5000 + s));
    v.pass = worst <= kNormalizationTolerance;
    v.detail = "nets=" + std::to_string(nets) + " max_abs_error=" + fmt(worst) + " tol=" + fmt(kNormalizationTolerance);
    return v;
}

Verdict correspondence_check()
{
    Verdict v;
    std::size_t factors = 0, mismatches = 0;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto net = random_network(2 + s % 9, 3, 2 + static_cast<int>(s % 3), s % 2 ? 0.25 : 0.0, 5000 + s);
        auto c = ve_correspondence(net, kCorrespondenceRelTolerance);
        factors += c.factors;
        mismatches += c.mismatches;
        worst = std::max(worst, c.worst_relative);
    }
    v.pass = mismatches == 0 && factors > 0;
    v.detail = "nets=50 factors=" + std::to_string(factors) + " mismatches=" + std::to_string(mismatches)
               + " max_rel=" + fmt(worst) + " tol=" + fmt(kCorrespondenceRelTolerance);
    return v;
}

Verdict factor_validity(const Population & p)
{
    Verdict v;
    std::size_t checked = 0, invalid = 0;
    for (std::size_t i = 0; i < p.instances.size(); ++i) {
        if (p.instances[i].net.size() > kOracleVars)
            continue;
        for (const auto & r : p.runs[i])
            for (const auto & f : r.diag.factors) {
                ++checked;
                if (! check_factor_valid(r.diag.searched, f.factor, {}, kFactorRelTolerance).valid) {
                    if (! invalid)
                        v.detail = "first invalid at seed=" + std::to_string(p.instances[i].seed) + " config=" + r.name
                                   + "; ";
                    ++invalid;
                }
            }
    }
    v.pass = invalid == 0 && checked > 0;
    v.detail += "factors_checked=" + std::to_string(checked) + " invalid=" + std::to_string(invalid);
    return v;
}

Verdict nogood_soundness(const Population & p)
{
    Verdict v;
    std::size_t checked = 0, unsound = 0;
    for (std::size_t i = 0; i < p.instances.size(); ++i) {
        if (p.instances[i].zero_fraction != 0.25)
            continue;
        for (const auto & r : p.runs[i])
            for (const auto & ng : r.diag.nogoods) {
                ++checked;
                if (! check_nogood(r.diag.searched, ng, kBigBudget).sound)
                    ++unsound;
            }
    }
    v.pass = unsound == 0;
    v.detail = "nogoods_checked=" + std::to_string(checked) + " unsound=" + std::to_string(unsound);
    return v;
}

Verdict component_additivity()
{
    Verdict v;
    const auto start = Clock::now();
    EngineConfig ve;
    ve.remove_barren = false;
    std::vector<std::uint64_t> nodes;
    for (std::size_t k : {10, 20, 40}) {
        auto net = disjoint_chains(k);
        auto q = *net.find_variable("X" + std::to_string(k - 1));
        nodes.push_back(run_query(net, {{}, q}, ve).stats.nodes);
    }
    const double r1 = static_cast<double>(nodes[1]) / static_cast<double>(nodes[0]);
    const double r2 = static_cast<double>(nodes[2]) / static_cast<double>(nodes[1]);

    const std::size_t m = 20;
    const std::uint64_t threshold = std::uint64_t{1} << m;
    auto net = disjoint_chains(m);
    EngineConfig bt;
    bt.mode = EngineMode::prob_bt;
    bt.remove_barren = false;
    bt.node_limit = threshold + 1;
    bt.timeout_seconds = 30.0;
    std::string bt_outcome;
    bool bt_exponential = false;
    try {
        auto r = run_query(net, {{}, *net.find_variable("X" + std::to_string(m - 1))}, bt);
        bt_exponential = r.stats.nodes > threshold;
        bt_outcome = "nodes=" + std::to_string(r.stats.nodes);
    }
    catch (const SearchAborted & e) {
        bt_exponential = true;
        bt_outcome = e.reason() == SearchAborted::Reason::node_limit ? "exceeded " + std::to_string(threshold) + " nodes"
                                                                     : "timed out";
    }
    const double secs = seconds_since(start);
    v.pass = r1 <= kAdditivityRatio && r2 <= kAdditivityRatio && bt_exponential && secs < 60.0;
    v.detail = "value-elim nodes k=10/20/40: " + std::to_string(nodes[0]) + "/" + std::to_string(nodes[1]) + "/"
               + std::to_string(nodes[2]) + " ratios=" + fmt(r1) + "," + fmt(r2) + " (max " + fmt(kAdditivityRatio)
               + "); prob-bt m=20 " + bt_outcome + "; time=" + fmt(secs) + "s";
    return v;
}

const std::size_t kChainLength = 100;

Query chain_query(const BayesNet & net)
{
    return {{{0, 1}}, static_cast<VarId>(net.size() - 1)};
}

Verdict chain_scaling()
{
    Verdict v;
    auto net = chain_network(kChainLength);
    EngineConfig c;
    const auto start = Clock::now();
    auto r = run_query(net, chain_query(net), c);
    const double secs = seconds_since(start);
    const std::uint64_t bound = 10 * kChainLength * 2;
    auto truth = ve_query(net, chain_query(net), min_fill_order(net, std::vector<VarId>{0, static_cast<VarId>(kChainLength - 1)}));
    const double diff = max_abs_difference(r, truth);
    v.pass = secs < kChainSeconds && r.stats.nodes <= bound && diff <= kPosteriorTolerance;
    v.detail = "n=100 nodes=" + std::to_string(r.stats.nodes) + " (max " + std::to_string(bound) + ") time=" + fmt(secs)
               + "s (max " + fmt(kChainSeconds) + "s) diff_vs_ve=" + fmt(diff);
    return v;
}

Verdict any_space()
{
    Verdict v;
    auto net = chain_network(kChainLength);
    EngineConfig unbounded;
    auto base = run_query(net, chain_query(net), unbounded);
    EngineConfig tiny;
    tiny.cache_budget = 1;
    tiny.timeout_seconds = kAnySpaceTimeoutSeconds;
    const auto start = Clock::now();
    try {
        auto r = run_query(net, chain_query(net), tiny);
        const double diff = max_abs_difference(r, base);
        v.pass = diff <= kPosteriorTolerance && r.stats.purges >= 1;
        v.detail = "budget=1 diff=" + fmt(diff) + " purges=" + std::to_string(r.stats.purges)
                   + " nodes=" + std::to_string(r.stats.nodes) + " time=" + fmt(seconds_since(start)) + "s";
    }
    catch (const SearchAborted & e) {
        v.pass = false;
        v.detail = "budget=1 run did not finish: " + std::string(e.what()) + " (limit "
                   + fmt(kAnySpaceTimeoutSeconds) + "s); a one-factor cache cannot hold both values' factors per level";
    }
    return v;
}

Verdict fc_neutrality(const Population & p)
{
    Verdict v;
    double worst = 0.0;
    std::size_t compared = 0, node_checks = 0, node_violations = 0;
    const auto start = Clock::now();
    for (std::size_t i = 0; i < p.instances.size(); ++i) {
        const auto & inst = p.instances[i];
        for (const auto & r : p.runs[i]) {
            if (r.config.mode == EngineMode::gen_and_sum)
                continue;
            auto off = r.config;
            off.forward_checking = false;
            auto rec = run_query(inst.net, inst.query, off);
            worst = std::max(worst, max_abs_difference(r.record, rec));
            ++compared;
            if (inst.zero_fraction == 0.25) {
                ++node_checks;
                if (r.record.stats.nodes > rec.stats.nodes) {
                    if (! node_violations)
                        v.detail = "first node increase at seed=" + std::to_string(inst.seed) + " config=" + r.name
                                   + " fc=" + std::to_string(r.record.stats.nodes)
                                   + " nofc=" + std::to_string(rec.stats.nodes) + "; ";
                    ++node_violations;
                }
            }
        }
    }
    const double secs = seconds_since(start);
    v.pass = worst <= kPosteriorTolerance && node_violations == 0 && secs < 120.0;
    v.detail += "runs_compared=" + std::to_string(compared) + " max_diff=" + fmt(worst)
                + " node_checks=" + std::to_string(node_checks) + " node_increases=" + std::to_string(node_violations)
                + " time=" + fmt(secs) + "s";
    return v;
}

Verdict barren_removal()
{
    Verdict v;
    double worst = 0.0;
    std::size_t nets_with_removal = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto net = random_network(2 + s % 11, 3, 3, s % 2 ? 0.25 : 0.0, 9000 + s);
        auto q = random_query(net, 9000 + s);
        EngineConfig with, without;
        without.remove_barren = false;
        Diagnostics diag;
        auto a = run_query(net, q, with, &diag);
        auto b = run_query(net, q, without);
        worst = std::max(worst, max_abs_difference(a, b));
        if (! diag.removed.empty())
            ++nets_with_removal;
    }
    v.pass = worst <= kPosteriorTolerance && nets_with_removal >= 1;
    v.detail = "nets=50 max_diff=" + fmt(worst) + " nets_with_removal=" + std::to_string(nets_with_removal);
    return v;
}

} // namespace

int main()
{
    int failures = 0;
    auto report = [&](int id, const char * name, const std::function<Verdict()> & body) {
        Verdict v;
        const auto start = Clock::now();
        try {
            v = body();
        }
        catch (const std::exception & e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        if (! v.pass)
            ++failures;
        std::printf("criterion %2d %s  %-26s %s [%.2fs]\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                    seconds_since(start));
        std::fflush(stdout);
    };

    Population pop;
    report(1, "oracle-equivalence", [&] {
        pop = run_population();
        return oracle_equivalence(pop);
    });
    report(2, "normalization", [&] { return normalization(pop); });
    report(3, "ve-correspondence", [] { return correspondence_check(); });
    report(4, "factor-validity", [&] { return factor_validity(pop); });
    report(5, "nogood-soundness", [&] { return nogood_soundness(pop); });
    report(6, "component-additivity", [] { return component_additivity(); });
    report(7, "chain-scaling", [] { return chain_scaling(); });
    report(8, "any-space", [] { return any_space(); });
    report(9, "fc-neutrality", [&] { return fc_neutrality(pop); });
    report(10, "barren-removal", [] { return barren_removal(); });

    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
