#include "valelim/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace valelim {

namespace {

std::string format_double(double x)
{
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

// Finds one directed cycle in the parent relation and returns it in
// parent -> child order, or an empty vector when the graph is acyclic.
std::vector<VarId> find_cycle(const BayesNet & net)
{
    const auto n = net.size();
    std::vector<int> colour(n, 0);
    std::vector<VarId> parent_of(n, kNoVar);

    for (std::size_t root = 0; root < n; ++root) {
        if (colour[root] != 0)
            continue;
        // Iterative DFS over child edges.
        std::vector<std::pair<VarId, std::size_t>> stack{{static_cast<VarId>(root), 0}};
        colour[root] = 1;
        while (! stack.empty()) {
            auto & [v, next] = stack.back();
            auto kids = net.children(v);
            if (next == kids.size()) {
                colour[static_cast<std::size_t>(v)] = 2;
                stack.pop_back();
                continue;
            }
            VarId w = kids[next++];
            auto wi = static_cast<std::size_t>(w);
            if (colour[wi] == 0) {
                colour[wi] = 1;
                parent_of[wi] = v;
                stack.emplace_back(w, 0);
            }
            else if (colour[wi] == 1) {
                std::vector<VarId> cycle{w};
                for (VarId u = v; u != w; u = parent_of[static_cast<std::size_t>(u)])
                    cycle.push_back(u);
                std::reverse(cycle.begin() + 1, cycle.end());
                return cycle;
            }
        }
    }
    return {};
}

} // namespace

BayesNet::BayesNet(std::vector<Variable> variables, std::vector<Cpt> cpts) :
    variables_(std::move(variables)), cpts_(std::move(cpts))
{
    const auto n = variables_.size();
    if (cpts_.size() != n)
        throw std::invalid_argument("network needs exactly one CPT per variable");

    scopes_.resize(n);
    strides_.resize(n);
    cpts_of_.resize(n);
    children_.resize(n);

    for (std::size_t c = 0; c < n; ++c) {
        const auto & cpt = cpts_[c];
        if (cpt.child != static_cast<VarId>(c))
            throw std::invalid_argument("CPT " + std::to_string(c) + " is not indexed by its child");
        for (VarId p : cpt.parents)
            if (p < 0 || static_cast<std::size_t>(p) >= n)
                throw std::invalid_argument("CPT " + std::to_string(c) + " references unknown variable "
                                            + std::to_string(p));

        auto & scope = scopes_[c];
        scope = cpt.parents;
        scope.push_back(cpt.child);

        auto & strides = strides_[c];
        strides.assign(scope.size(), 1);
        for (std::size_t i = scope.size(); i-- > 1;)
            strides[i - 1] = strides[i] * static_cast<std::size_t>(std::max(1, domain_size(scope[i])));

        std::set<VarId> distinct(scope.begin(), scope.end());
        for (VarId v : distinct)
            cpts_of_[static_cast<std::size_t>(v)].push_back(static_cast<VarId>(c));
        for (VarId p : std::set<VarId>(cpt.parents.begin(), cpt.parents.end()))
            if (p != cpt.child)
                children_[static_cast<std::size_t>(p)].push_back(static_cast<VarId>(c));
    }
}

std::optional<VarId> BayesNet::find_variable(std::string_view name) const
{
    for (std::size_t v = 0; v < variables_.size(); ++v)
        if (variables_[v].name == name)
            return static_cast<VarId>(v);
    return std::nullopt;
}

std::optional<int> BayesNet::find_value(VarId v, std::string_view label) const
{
    const auto & domain = variable(v).domain;
    for (std::size_t i = 0; i < domain.size(); ++i)
        if (domain[i] == label)
            return static_cast<int>(i);
    return std::nullopt;
}

std::size_t BayesNet::table_index(VarId cpt, std::span<const int> values) const
{
    const auto & scope = scopes_[static_cast<std::size_t>(cpt)];
    const auto & strides = strides_[static_cast<std::size_t>(cpt)];
    std::size_t index = 0;
    for (std::size_t i = 0; i < scope.size(); ++i)
        index += strides[i] * static_cast<std::size_t>(values[static_cast<std::size_t>(scope[i])]);
    return index;
}

std::size_t BayesNet::table_index_with(VarId cpt, std::span<const int> values, VarId var, int value) const
{
    const auto & scope = scopes_[static_cast<std::size_t>(cpt)];
    const auto & strides = strides_[static_cast<std::size_t>(cpt)];
    std::size_t index = 0;
    for (std::size_t i = 0; i < scope.size(); ++i) {
        int x = scope[i] == var ? value : values[static_cast<std::size_t>(scope[i])];
        index += strides[i] * static_cast<std::size_t>(x);
    }
    return index;
}

std::size_t BayesNet::row_count(VarId cpt) const
{
    std::size_t rows = 1;
    for (VarId p : cpts_[static_cast<std::size_t>(cpt)].parents)
        rows *= static_cast<std::size_t>(domain_size(p));
    return rows;
}

std::size_t BayesNet::expected_table_size(VarId cpt) const
{
    return row_count(cpt) * static_cast<std::size_t>(domain_size(cpt));
}

bool operator==(const BayesNet & a, const BayesNet & b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto & va = a.variables_[i];
        const auto & vb = b.variables_[i];
        if (va.name != vb.name || va.domain != vb.domain)
            return false;
        const auto & ca = a.cpts_[i];
        const auto & cb = b.cpts_[i];
        if (ca.parents != cb.parents || ca.table != cb.table)
            return false;
    }
    return true;
}

std::vector<Violation> validate_network(const BayesNet & net)
{
    std::vector<Violation> out;
    const auto n = net.size();

    std::unordered_set<std::string> names;
    for (std::size_t v = 0; v < n; ++v) {
        const auto & var = net.variable(static_cast<VarId>(v));
        const auto id = static_cast<VarId>(v);
        if (! names.insert(var.name).second)
            out.push_back({Violation::Kind::duplicate_name, id, std::nullopt, "duplicate variable name " + var.name});
        if (var.domain.empty())
            out.push_back({Violation::Kind::empty_domain, id, std::nullopt, "variable " + var.name + " has an empty domain"});
        std::unordered_set<std::string> labels;
        for (const auto & label : var.domain)
            if (! labels.insert(label).second)
                out.push_back({Violation::Kind::duplicate_label, id, std::nullopt,
                               "variable " + var.name + " repeats label " + label});
    }

    for (std::size_t c = 0; c < n; ++c) {
        const auto id = static_cast<VarId>(c);
        const auto & cpt = net.cpt(id);
        const auto & child_name = net.variable(id).name;
        std::set<VarId> seen;
        for (VarId p : cpt.parents) {
            if (p == cpt.child)
                out.push_back({Violation::Kind::child_in_parents, id, std::nullopt,
                               "CPT " + child_name + " lists its child as a parent"});
            else if (! seen.insert(p).second)
                out.push_back({Violation::Kind::duplicate_parent, id, std::nullopt,
                               "CPT " + child_name + " repeats parent " + net.variable(p).name});
        }

        const auto expected = net.expected_table_size(id);
        if (cpt.table.size() != expected) {
            out.push_back({Violation::Kind::table_size, id, std::nullopt,
                           "CPT " + child_name + " has " + std::to_string(cpt.table.size()) + " entries, expected "
                               + std::to_string(expected)});
            continue;
        }

        const auto width = static_cast<std::size_t>(net.domain_size(id));
        if (width == 0)
            continue;
        const auto rows = net.row_count(id);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            bool in_range = true;
            for (std::size_t k = 0; k < width; ++k) {
                double p = cpt.table[r * width + k];
                if (! (p >= 0.0 && p <= 1.0))
                    in_range = false;
                sum += p;
            }
            if (! in_range)
                out.push_back({Violation::Kind::probability_range, id, r,
                               "CPT " + child_name + " row " + std::to_string(r) + " has an entry outside [0,1]"});
            if (! (std::abs(sum - 1.0) <= kRowSumTolerance))
                out.push_back({Violation::Kind::row_sum, id, r,
                               "CPT " + child_name + " row " + std::to_string(r) + ": row sum " + format_double(sum)
                                   + " != 1"});
        }
    }

    if (auto cycle = find_cycle(net); ! cycle.empty()) {
        std::string names_list;
        for (VarId v : cycle) {
            if (! names_list.empty())
                names_list += ',';
            names_list += net.variable(v).name;
        }
        out.push_back({Violation::Kind::cycle, cycle.front(), std::nullopt, "cycle " + names_list});
    }
    return out;
}

double eval_cpt(const BayesNet & net, VarId cpt, std::span<const int> values)
{
    if (values.size() != net.size())
        throw std::invalid_argument("value vector does not match network size");
    for (VarId v : net.scope(cpt))
        if (values[static_cast<std::size_t>(v)] == kUnassigned)
            throw std::invalid_argument("CPT " + net.variable(cpt).name + " needs " + net.variable(v).name
                                        + " to be assigned");
    return net.eval_unchecked(cpt, values);
}

double joint_probability(const BayesNet & net, std::span<const int> values)
{
    if (values.size() != net.size())
        throw std::invalid_argument("value vector does not match network size");
    for (std::size_t v = 0; v < values.size(); ++v)
        if (values[v] == kUnassigned)
            throw std::invalid_argument("joint probability needs a complete assignment; "
                                        + net.variable(static_cast<VarId>(v)).name + " is free");
    double prod = 1.0;
    for (std::size_t c = 0; c < net.size(); ++c)
        prod *= net.eval_unchecked(static_cast<VarId>(c), values);
    return prod;
}

std::vector<int> dense_values(const BayesNet & net, std::span<const Assignment> assignments)
{
    std::vector<int> values(net.size(), kUnassigned);
    for (const auto & a : assignments) {
        if (a.var < 0 || static_cast<std::size_t>(a.var) >= net.size())
            throw std::invalid_argument("assignment to unknown variable " + std::to_string(a.var));
        if (a.value < 0 || a.value >= net.domain_size(a.var))
            throw std::invalid_argument("value " + std::to_string(a.value) + " out of range for "
                                        + net.variable(a.var).name);
        auto & slot = values[static_cast<std::size_t>(a.var)];
        if (slot != kUnassigned)
            throw std::invalid_argument("variable " + net.variable(a.var).name + " assigned twice");
        slot = a.value;
    }
    return values;
}

void check_query(const BayesNet & net, const Query & query)
{
    if (query.query_var < 0 || static_cast<std::size_t>(query.query_var) >= net.size())
        throw std::invalid_argument("query variable out of range");
    auto values = dense_values(net, query.evidence);
    if (values[static_cast<std::size_t>(query.query_var)] != kUnassigned)
        throw std::invalid_argument("query variable " + net.variable(query.query_var).name + " is also evidence");
}

BarrenRemoval remove_barren(const BayesNet & net, const Query & query)
{
    check_query(net, query);
    const auto n = net.size();
    std::vector<char> keep(n, 1);
    std::vector<char> pinned(n, 0);
    pinned[static_cast<std::size_t>(query.query_var)] = 1;
    for (const auto & e : query.evidence)
        pinned[static_cast<std::size_t>(e.var)] = 1;

    std::vector<std::size_t> live_children(n, 0);
    for (std::size_t v = 0; v < n; ++v)
        live_children[v] = net.children(static_cast<VarId>(v)).size();

    BarrenRemoval out;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t v = 0; v < n; ++v) {
            if (! keep[v] || pinned[v] || live_children[v] != 0)
                continue;
            keep[v] = 0;
            changed = true;
            out.removed.push_back(static_cast<VarId>(v));
            for (VarId p : net.cpt(static_cast<VarId>(v)).parents)
                --live_children[static_cast<std::size_t>(p)];
        }
    }

    out.to_reduced.assign(n, kNoVar);
    for (std::size_t v = 0; v < n; ++v)
        if (keep[v]) {
            out.to_reduced[v] = static_cast<VarId>(out.to_original.size());
            out.to_original.push_back(static_cast<VarId>(v));
        }

    std::vector<Variable> variables;
    std::vector<Cpt> cpts;
    for (VarId old : out.to_original) {
        variables.push_back(net.variable(old));
        Cpt cpt = net.cpt(old);
        cpt.child = out.to_reduced[static_cast<std::size_t>(old)];
        for (auto & p : cpt.parents)
            p = out.to_reduced[static_cast<std::size_t>(p)];
        cpts.push_back(std::move(cpt));
    }
    out.net = BayesNet(std::move(variables), std::move(cpts));

    out.query.query_var = out.to_reduced[static_cast<std::size_t>(query.query_var)];
    for (const auto & e : query.evidence)
        out.query.evidence.push_back({out.to_reduced[static_cast<std::size_t>(e.var)], e.value});
    return out;
}

} // namespace valelim
