#include "valelim/cli.hpp"

#include "valelim/errors.hpp"
#include "valelim/oracle.hpp"
#include "valelim/protocol.hpp"
#include "valelim/varelim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace valelim {

namespace {

std::string join_labels(const std::vector<std::string> & labels)
{
    std::string out;
    for (const auto & l : labels) {
        if (! out.empty())
            out += ", ";
        out += l;
    }
    return out;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

VarId lookup_variable(const BayesNet & net, const std::string & name)
{
    if (auto v = net.find_variable(name))
        return *v;
    std::vector<std::string> names;
    for (const auto & var : net.variables())
        names.push_back(var.name);
    throw std::invalid_argument("unknown variable '" + name + "' (known: " + join_labels(names) + ")");
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct NamedConfig {
    std::string engine;
    EngineConfig config;
    std::string label;
};

std::vector<NamedConfig> verify_configs(double corrupt)
{
    std::vector<NamedConfig> out;
    EngineConfig base;
    base.mode = EngineMode::gen_and_sum;
    out.push_back({"gen-and-sum", base, "gen-and-sum"});
    for (auto ordering : {OrderingKind::static_order, OrderingKind::dynamic}) {
        EngineConfig c;
        c.mode = EngineMode::prob_bt;
        c.ordering = ordering;
        out.push_back({"prob-bt", c, "prob-bt/" + ordering_name(c)});
    }
    for (auto ordering : {OrderingKind::static_order, OrderingKind::dynamic})
        for (std::size_t budget : {kUnboundedCache, std::size_t{8}, std::size_t{1}}) {
            EngineConfig c;
            c.mode = EngineMode::value_elim;
            c.ordering = ordering;
            c.cache_budget = budget;
            c.debug_posterior_offset = corrupt;
            const auto b = budget == kUnboundedCache ? std::string("inf") : std::to_string(budget);
            out.push_back({"value-elim", c, "value-elim/" + ordering_name(c) + "/budget=" + b});
        }
    return out;
}

double disagreement(const ResultRecord & a, const ResultRecord & b)
{
    if (a.zero_evidence || b.zero_evidence)
        return a.zero_evidence == b.zero_evidence ? 0.0 : 1.0;
    if (a.posterior.size() != b.posterior.size())
        return 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.posterior.size(); ++i)
        worst = std::max(worst, std::abs(a.posterior[i] - b.posterior[i]));
    return worst;
}

struct VerifyOptions {
    std::size_t trials = 200;
    std::size_t vars = 10;
    std::size_t max_parents = 3;
    int max_domain = 3;
    double zero_fraction = -1.0;
    std::uint64_t seed = 7;
    bool corrupt = false;
    std::size_t oracle_vars = 10;
};

int cmd_verify(const VerifyOptions & o, std::ostream & out)
{
    const double tolerance = 1e-9;
    double worst = 0.0;
    std::size_t factors_checked = 0, nogoods_checked = 0;
    const auto configs = verify_configs(o.corrupt ? 1e-6 : 0.0);

    for (std::size_t t = 0; t < o.trials; ++t) {
        const std::uint64_t seed = o.seed + t;
        const double zf = o.zero_fraction >= 0.0 ? o.zero_fraction : (t % 2 ? 0.25 : 0.0);
        const auto net = random_network(o.vars, o.max_parents, o.max_domain, zf, seed);
        const auto query = random_query(net, seed);

        std::ostringstream repro;
        repro << "valelim verify --trials 1 --seed " << seed << " --vars " << o.vars << " --max-parents "
              << o.max_parents << " --max-domain " << o.max_domain << " --zero-fraction " << zf
              << (o.corrupt ? " --corrupt" : "");
        auto fail = [&](const std::string & what) {
            out << "FAIL seed=" << seed << ' ' << what << '\n' << "repro: " << repro.str() << '\n';
            return kExitFailed;
        };

        const auto reference = run_engine(net, query, "ve", {});
        for (const auto & nc : configs) {
            const bool check = net.size() <= o.oracle_vars && nc.engine == "value-elim";
            Diagnostics diag;
            const auto rec = run_query(net, query, nc.config, check ? &diag : nullptr);
            const double gap = disagreement(reference, rec);
            worst = std::max(worst, gap);
            if (gap > tolerance)
                return fail("engine=" + nc.label + " disagreement=" + fmt(gap));
            if (! check)
                continue;
            for (const auto & cf : diag.factors) {
                ++factors_checked;
                if (! check_factor_valid(diag.searched, cf.factor).valid)
                    return fail("engine=" + nc.label + " invalid factor from " + diag.searched.variable(cf.origin).name);
            }
            for (const auto & ng : diag.nogoods) {
                ++nogoods_checked;
                if (! check_nogood(diag.searched, ng).sound)
                    return fail("engine=" + nc.label + " unsound nogood");
            }
        }
    }
    out << "trials=" << o.trials << "\tmax_disagreement=" << fmt(worst) << "\tfactors_checked=" << factors_checked
        << "\tnogoods_checked=" << nogoods_checked << "\tstatus=ok\n";
    return kExitOk;
}

std::vector<std::size_t> parse_sizes(const std::string & spec)
{
    std::vector<std::size_t> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
        if (! trim(item).empty())
            out.push_back(static_cast<std::size_t>(std::stoull(trim(item))));
    return out;
}

std::vector<std::string> parse_list(const std::string & spec)
{
    std::vector<std::string> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
        if (! trim(item).empty())
            out.push_back(trim(item));
    return out;
}

struct BenchOptions {
    std::string family = "disjoint-chains";
    std::string sizes = "10,20,40";
    std::string engines = "value-elim";
    std::string order = "min-fill";
    std::uint64_t seed = 1;
    std::size_t count = 1;
    double timeout = 60.0;
    bool barren = true;
};

int cmd_bench(const BenchOptions & o, std::ostream & out)
{
    const auto sizes = parse_sizes(o.sizes);
    const auto engines = parse_list(o.engines);
    bool all_ok = true;
    for (const auto & engine : engines) {
        std::vector<std::pair<std::size_t, std::uint64_t>> first_seed_nodes;
        for (std::size_t n : sizes)
            for (std::size_t i = 0; i < o.count; ++i) {
                const std::uint64_t seed = o.seed + i;
                BayesNet net;
                Query query;
                if (o.family == "disjoint-chains") {
                    net = disjoint_chains(n, seed);
                    query.query_var = *net.find_variable("X" + std::to_string(n - 1));
                } else if (o.family == "chain") {
                    net = chain_network(n, seed);
                    query.query_var = static_cast<VarId>(n - 1);
                    if (n > 1)
                        query.evidence.push_back({0, 0});
                } else if (o.family == "random") {
                    net = random_network(n, 3, 3, 0.25, seed);
                    query = random_query(net, seed);
                } else {
                    throw std::invalid_argument("unknown family '" + o.family
                                                + "' (valid: disjoint-chains, chain, random)");
                }
                EngineConfig config;
                apply_ordering(net, o.order, config);
                config.timeout_seconds = o.timeout;
                config.remove_barren = o.barren;
                try {
                    const auto rec = run_engine(net, query, engine, config);
                    out << emit_result(rec) << '\n';
                    if (i == 0)
                        first_seed_nodes.emplace_back(n, rec.stats.nodes);
                } catch (const Error & e) {
                    all_ok = false;
                    out << "# failed\tengine=" << engine << "\tfamily=" << o.family << "\tsize=" << n
                        << "\tseed=" << seed << "\treason=" << e.what() << '\n';
                }
            }
        for (std::size_t i = 1; i < first_seed_nodes.size(); ++i) {
            const auto [a, na] = first_seed_nodes[i - 1];
            const auto [b, nb] = first_seed_nodes[i];
            out << "# ratio\tengine=" << engine << "\tfamily=" << o.family << "\tsizes=" << b << '/' << a
                << "\tnodes_ratio=" << fmt(na ? static_cast<double>(nb) / static_cast<double>(na) : 0.0) << '\n';
        }
    }
    return all_ok ? kExitOk : kExitAborted;
}

} // namespace

std::vector<Assignment> parse_evidence(const BayesNet & net, std::string_view spec)
{
    std::vector<Assignment> out;
    std::stringstream ss{std::string(spec)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("evidence item '" + item + "' is not Name=Label");
        const auto name = trim(std::string_view(item).substr(0, eq));
        const auto label = trim(std::string_view(item).substr(eq + 1));
        const VarId v = lookup_variable(net, name);
        const auto value = net.find_value(v, label);
        if (! value)
            throw std::invalid_argument("unknown value '" + label + "' for " + name
                                        + " (valid: " + join_labels(net.variable(v).domain) + ")");
        for (const auto & a : out)
            if (a.var == v)
                throw std::invalid_argument("evidence assigns " + name + " twice");
        out.push_back({v, *value});
    }
    return out;
}

void apply_ordering(const BayesNet & net, const std::string & spec, EngineConfig & config)
{
    config.static_order.clear();
    if (spec == "min-fill") {
        config.ordering = OrderingKind::static_order;
    } else if (spec == "dynamic") {
        config.ordering = OrderingKind::dynamic;
    } else if (spec == "dynamic-random") {
        config.ordering = OrderingKind::dynamic_random;
    } else if (spec == "id") {
        config.ordering = OrderingKind::static_order;
        for (std::size_t v = 0; v < net.size(); ++v)
            config.static_order.push_back(static_cast<VarId>(v));
    } else {
        std::ifstream in(spec);
        if (! in)
            throw std::invalid_argument("ordering '" + spec
                                        + "' is neither min-fill, dynamic, dynamic-random, id nor a readable file");
        config.ordering = OrderingKind::static_order;
        std::string name;
        while (in >> name)
            config.static_order.push_back(lookup_variable(net, name));
        if (config.static_order.empty())
            throw std::invalid_argument("order file " + spec + " names no variables");
    }
}

ResultRecord run_engine(const BayesNet & net, const Query & query, const std::string & engine,
                        const EngineConfig & config)
{
    if (engine == "brute-force" || engine == "ve") {
        const auto start = std::chrono::steady_clock::now();
        Posterior post;
        if (engine == "brute-force") {
            post = posterior_bruteforce(net, query);
        } else {
            std::vector<VarId> excluded{query.query_var};
            for (const auto & e : query.evidence)
                excluded.push_back(e.var);
            post = ve_query(net, query, min_fill_order(net, excluded));
        }
        ResultRecord rec;
        rec.engine = engine;
        rec.ordering = engine == "ve" ? "min-fill" : "id";
        rec.query = net.variable(query.query_var).name;
        rec.posterior = post.probabilities;
        rec.zero_evidence = post.zero_evidence;
        rec.stats.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return rec;
    }
    EngineConfig c = config;
    if (engine == "gen-and-sum")
        c.mode = EngineMode::gen_and_sum;
    else if (engine == "prob-bt")
        c.mode = EngineMode::prob_bt;
    else if (engine == "value-elim")
        c.mode = EngineMode::value_elim;
    else
        throw std::invalid_argument("unknown engine '" + engine
                                    + "' (valid: gen-and-sum, prob-bt, value-elim, brute-force, ve)");
    return run_query(net, query, c);
}

int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
    CLI::App app{"Exact inference for discrete Bayesian networks", "valelim"};
    app.require_subcommand(1);

    std::string net_path, evidence, query_name, engine = "value-elim", order = "min-fill";
    std::size_t cache_budget = 0;
    std::uint64_t seed = 0;
    double timeout = 0.0, row_tolerance = kRowSumTolerance;
    bool no_fc = false, no_nogoods = false, no_barren = false;

    auto * query = app.add_subcommand("query", "Posterior of one variable given evidence");
    query->add_option("--net", net_path, "Network file (.bif or .json)")->required();
    query->add_option("--evidence", evidence, "Comma-separated Name=Label pairs");
    query->add_option("--query", query_name, "Query variable name")->required();
    query->add_option("--engine", engine, "gen-and-sum, prob-bt, value-elim, brute-force or ve");
    query->add_option("--order", order, "min-fill, dynamic, dynamic-random, id or an order file");
    query->add_option("--cache-budget", cache_budget, "Maximum cached factors (0 = unbounded)");
    query->add_option("--seed", seed, "Seed for randomized orderings");
    query->add_option("--timeout", timeout, "Seconds before giving up (0 = none)");
    query->add_option("--row-tolerance", row_tolerance, "Accepted CPT row-sum deviation");
    query->add_flag("--no-fc", no_fc, "Disable forward checking");
    query->add_flag("--no-nogoods", no_nogoods, "Disable nogood learning");
    query->add_flag("--no-barren", no_barren, "Keep barren variables");

    VerifyOptions vo;
    auto * verify = app.add_subcommand("verify", "Cross-check every engine on random networks");
    verify->add_option("--trials", vo.trials, "Number of random trials");
    verify->add_option("--vars", vo.vars, "Variables per network");
    verify->add_option("--max-parents", vo.max_parents, "Parents per variable at most");
    verify->add_option("--max-domain", vo.max_domain, "Largest domain size");
    verify->add_option("--zero-fraction", vo.zero_fraction, "Share of zero CPT entries (default alternates 0/0.25)");
    verify->add_option("--seed", vo.seed, "First seed");
    verify->add_option("--oracle-vars", vo.oracle_vars, "Oracle-check factors and nogoods up to this size");
    verify->add_flag("--corrupt", vo.corrupt, "Perturb value-elim results (harness self-test)")->group("");

    BenchOptions bo;
    auto * bench = app.add_subcommand("bench", "Node counts and timings over an instance family");
    bench->add_option("--family", bo.family, "disjoint-chains, chain or random");
    bench->add_option("--sizes", bo.sizes, "Comma-separated sizes");
    bench->add_option("--engines", bo.engines, "Comma-separated engine names");
    bench->add_option("--order", bo.order, "Ordering for search engines");
    bench->add_option("--seed", bo.seed, "First seed");
    bench->add_option("--count", bo.count, "Seeds per size");
    bench->add_option("--timeout", bo.timeout, "Seconds per run");
    bool bench_no_barren = false;
    bench->add_flag("--no-barren", bench_no_barren, "Keep barren variables");

    std::size_t gen_vars = 10, gen_parents = 3;
    int gen_domain = 3;
    double gen_zero = 0.0;
    std::uint64_t gen_seed = 1;
    std::string gen_out, gen_format = "bif";
    auto * gen = app.add_subcommand("gen", "Write a random network");
    gen->add_option("--vars", gen_vars, "Number of variables");
    gen->add_option("--max-parents", gen_parents, "Parents per variable at most");
    gen->add_option("--max-domain", gen_domain, "Largest domain size");
    gen->add_option("--zero-fraction", gen_zero, "Share of zero CPT entries");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output path")->required();
    gen->add_option("--format", gen_format, "bif or json");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError & e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (query->parsed()) {
            ParseOptions po;
            po.row_tolerance = row_tolerance;
            const auto net = load_network(net_path, po);
            Query q;
            q.evidence = parse_evidence(net, evidence);
            q.query_var = lookup_variable(net, query_name);
            EngineConfig config;
            apply_ordering(net, order, config);
            config.cache_budget = cache_budget == 0 ? kUnboundedCache : cache_budget;
            config.seed = seed;
            config.timeout_seconds = timeout;
            config.forward_checking = ! no_fc;
            config.nogood_learning = ! no_nogoods;
            config.remove_barren = ! no_barren;
            out << emit_result(run_engine(net, q, engine, config)) << '\n';
            return kExitOk;
        }
        if (verify->parsed())
            return cmd_verify(vo, out);
        if (bench->parsed()) {
            bo.barren = ! bench_no_barren;
            return cmd_bench(bo, out);
        }
        if (gen->parsed()) {
            if (gen_vars == 0 || gen_domain < 2)
                throw std::invalid_argument("gen needs --vars >= 1 and --max-domain >= 2");
            const auto net = random_network(gen_vars, gen_parents, gen_domain, gen_zero, gen_seed);
            std::ofstream file(gen_out);
            if (! file)
                throw std::invalid_argument("cannot write " + gen_out);
            if (gen_format == "json")
                file << write_json(net);
            else if (gen_format == "bif")
                file << write_bif(net);
            else
                throw std::invalid_argument("unknown format '" + gen_format + "' (valid: bif, json)");
            return kExitOk;
        }
    } catch (const BudgetExceeded & e) {
        err << "error: " << e.what() << '\n';
        return kExitAborted;
    } catch (const SearchAborted & e) {
        err << "error: " << e.what() << '\n';
        return kExitAborted;
    } catch (const std::exception & e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace valelim
