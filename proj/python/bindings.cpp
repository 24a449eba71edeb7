#include "valelim/cli.hpp"
#include "valelim/engine.hpp"
#include "valelim/errors.hpp"
#include "valelim/netio.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>

namespace py = pybind11;
using namespace valelim;

namespace {

VarId lookup(const BayesNet & net, const std::string & name)
{
    auto v = net.find_variable(name);
    if (! v)
        throw py::key_error("unknown variable " + name);
    return *v;
}

py::dict query(const BayesNet & net, const std::string & target, const std::map<std::string, std::string> & evidence,
               const std::string & engine, const std::string & order, std::size_t cache_budget, bool nogoods,
               bool forward_checking, bool barren, std::uint64_t seed, double timeout, std::uint64_t node_limit)
{
    Query q;
    q.query_var = lookup(net, target);
    for (const auto & [name, label] : evidence) {
        const VarId v = lookup(net, name);
        auto d = net.find_value(v, label);
        if (! d)
            throw py::value_error("unknown label " + label + " for " + name);
        q.evidence.push_back({v, *d});
    }
    EngineConfig config;
    config.cache_budget = cache_budget;
    config.nogood_learning = nogoods;
    config.forward_checking = forward_checking;
    config.remove_barren = barren;
    config.seed = seed;
    config.timeout_seconds = timeout;
    config.node_limit = node_limit;
    apply_ordering(net, order, config);

    ResultRecord r;
    {
        py::gil_scoped_release release;
        r = run_engine(net, q, engine, config);
    }
    py::dict stats;
    stats["nodes"] = r.stats.nodes;
    stats["cpt_evals"] = r.stats.cpt_evals;
    stats["factors_cached"] = r.stats.factors_cached;
    stats["cache_hits"] = r.stats.cache_hits;
    stats["nogoods"] = r.stats.nogoods;
    stats["purges"] = r.stats.purges;
    stats["wall_ms"] = r.stats.wall_ms;

    py::dict out;
    out["engine"] = r.engine;
    out["ordering"] = r.ordering;
    out["zero_evidence"] = r.zero_evidence;
    if (r.zero_evidence) {
        out["posterior"] = py::none();
    } else {
        py::dict post;
        const auto & labels = net.variable(q.query_var).domain;
        for (std::size_t i = 0; i < labels.size(); ++i)
            post[py::str(labels[i])] = r.posterior[i];
        out["posterior"] = post;
    }
    out["stats"] = stats;
    out["record"] = emit_result(r);
    return out;
}

} // namespace

PYBIND11_MODULE(_valelim, m)
{
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<SearchAborted>(m, "SearchAborted", PyExc_RuntimeError);
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);

    py::class_<BayesNet>(m, "BayesNet")
        .def("__len__", &BayesNet::size)
        .def_property_readonly("names",
                               [](const BayesNet & net) {
                                   std::vector<std::string> out;
                                   for (const auto & v : net.variables())
                                       out.push_back(v.name);
                                   return out;
                               })
        .def("domain", [](const BayesNet & net, const std::string & name) { return net.variable(lookup(net, name)).domain; })
        .def("to_bif", [](const BayesNet & net) { return write_bif(net); })
        .def("to_json", [](const BayesNet & net) { return write_json(net); });

    m.def("load", [](const std::string & path) { return load_network(path); }, py::arg("path"));
    m.def(
        "parse",
        [](const std::string & text, const std::string & format) {
            NetworkSource src;
            src.format = format == "json" ? NetworkFormat::json : NetworkFormat::bif;
            src.payload = text;
            return parse_network(src);
        },
        py::arg("text"), py::arg("format") = "bif");
    m.def("random_network", &random_network, py::arg("n_vars"), py::arg("max_parents") = 3, py::arg("max_domain") = 2,
          py::arg("zero_fraction") = 0.0, py::arg("seed") = 0);
    m.def("chain_network", &chain_network, py::arg("n"), py::arg("seed") = 1);
    m.def("disjoint_chains", &disjoint_chains, py::arg("k"), py::arg("seed") = 1);

    m.def("query", &query, py::arg("net"), py::arg("target"), py::arg("evidence") = std::map<std::string, std::string>{},
          py::arg("engine") = "value-elim", py::arg("order") = "min-fill", py::arg("cache_budget") = kUnboundedCache,
          py::arg("nogoods") = true, py::arg("forward_checking") = true, py::arg("barren") = true, py::arg("seed") = 0,
          py::arg("timeout") = 0.0, py::arg("node_limit") = 0);

    m.def(
        "run_cli",
        [](const std::vector<std::string> & args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
