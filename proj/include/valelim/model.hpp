#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace valelim {

using VarId = std::int32_t;
inline constexpr VarId kNoVar = -1;
inline constexpr int kUnassigned = -1;

/// Absolute tolerance on CPT row sums.
inline constexpr double kRowSumTolerance = 1e-9;

struct Variable {
    std::string name;
    std::vector<std::string> domain;

    int size() const noexcept { return static_cast<int>(domain.size()); }
};

/// Conditional probability table of `child` given `parents`. The table is
/// row-major over (parents..., child) with the child value varying fastest.
struct Cpt {
    VarId child = kNoVar;
    std::vector<VarId> parents;
    std::vector<double> table;
};

struct Assignment {
    VarId var = kNoVar;
    int value = 0;

    auto operator<=>(const Assignment &) const = default;
};

struct Query {
    std::vector<Assignment> evidence;
    VarId query_var = kNoVar;
};

/// A discrete Bayesian network. Immutable once built; the constructor only
/// checks what it needs for indexing (ids in range, one CPT per variable).
/// Semantic checks live in validate_network().
class BayesNet {
public:
    BayesNet() = default;
    BayesNet(std::vector<Variable> variables, std::vector<Cpt> cpts);

    std::size_t size() const noexcept { return variables_.size(); }
    const std::vector<Variable> & variables() const noexcept { return variables_; }
    const Variable & variable(VarId v) const { return variables_[static_cast<std::size_t>(v)]; }
    int domain_size(VarId v) const { return variable(v).size(); }

    const std::vector<Cpt> & cpts() const noexcept { return cpts_; }
    const Cpt & cpt(VarId child) const { return cpts_[static_cast<std::size_t>(child)]; }

    /// Variables of a CPT in table order: parents first, child last.
    std::span<const VarId> scope(VarId cpt) const { return scopes_[static_cast<std::size_t>(cpt)]; }

    /// CPTs whose scope contains `v`, in ascending id order.
    std::span<const VarId> cpts_of(VarId v) const { return cpts_of_[static_cast<std::size_t>(v)]; }

    /// Variables that list `v` as a parent, ascending.
    std::span<const VarId> children(VarId v) const { return children_[static_cast<std::size_t>(v)]; }

    std::optional<VarId> find_variable(std::string_view name) const;
    std::optional<int> find_value(VarId v, std::string_view label) const;

    /// Table offset for the CPT under `values` (indexed by variable id). All
    /// scope variables must be assigned; no checking is done here.
    std::size_t table_index(VarId cpt, std::span<const int> values) const;

    /// As table_index() but with `var` read as `value` regardless of `values`.
    std::size_t table_index_with(VarId cpt, std::span<const int> values, VarId var, int value) const;

    double eval_unchecked(VarId cpt, std::span<const int> values) const
    {
        return cpts_[static_cast<std::size_t>(cpt)].table[table_index(cpt, values)];
    }

    /// Number of rows (parent instantiations) of a CPT.
    std::size_t row_count(VarId cpt) const;

    /// Expected table length: product of the scope's domain sizes.
    std::size_t expected_table_size(VarId cpt) const;

    friend bool operator==(const BayesNet & a, const BayesNet & b);

private:
    std::vector<Variable> variables_;
    std::vector<Cpt> cpts_;
    std::vector<std::vector<VarId>> scopes_;
    std::vector<std::vector<std::size_t>> strides_;
    std::vector<std::vector<VarId>> cpts_of_;
    std::vector<std::vector<VarId>> children_;
};

struct Violation {
    enum class Kind {
        empty_domain,
        duplicate_label,
        duplicate_name,
        bad_parent,
        child_in_parents,
        duplicate_parent,
        table_size,
        probability_range,
        row_sum,
        cycle,
    };

    Kind kind;
    VarId cpt = kNoVar;                 ///< CPT (child id) the violation belongs to.
    std::optional<std::size_t> row;     ///< Row index within the CPT, when applicable.
    std::string message;
};

/// Every invariant violation in `net`; empty means the network is valid.
std::vector<Violation> validate_network(const BayesNet & net);

/// CPT entry selected by `values` (indexed by variable id, kUnassigned for
/// free variables). Throws std::invalid_argument if a scope variable is free.
double eval_cpt(const BayesNet & net, VarId cpt, std::span<const int> values);

/// Product of every CPT under a complete assignment.
double joint_probability(const BayesNet & net, std::span<const int> values);

/// Turns an assignment list into a dense value vector (kUnassigned elsewhere).
/// Throws std::invalid_argument on out-of-range ids/values or duplicate vars.
std::vector<int> dense_values(const BayesNet & net, std::span<const Assignment> assignments);

/// Throws std::invalid_argument if the query is malformed for `net`.
void check_query(const BayesNet & net, const Query & query);

struct BarrenRemoval {
    BayesNet net;                     ///< Reduced network, ids renumbered densely.
    Query query;                      ///< Query re-expressed in reduced ids.
    std::vector<VarId> removed;       ///< Original ids, in removal order.
    std::vector<VarId> to_original;   ///< Reduced id -> original id.
    std::vector<VarId> to_reduced;    ///< Original id -> reduced id or kNoVar.
};

/// Repeatedly drops variables that are neither query nor evidence and have no
/// remaining children. Their CPTs sum out to one, so the query posterior is
/// unchanged.
BarrenRemoval remove_barren(const BayesNet & net, const Query & query);

} // namespace valelim
