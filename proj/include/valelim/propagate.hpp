#pragma once

#include "valelim/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace valelim {

/// Assignment trail, per-CPT unassigned counts, value prune marks and
/// inactivity marks for one search run. Everything is level-stamped and
/// undone when the assignment at that level is popped.
class SearchState {
public:
    explicit SearchState(const BayesNet & net);

    const BayesNet & net() const noexcept { return *net_; }
    std::span<const int> values() const noexcept { return values_; }
    std::span<const std::uint64_t> positions() const noexcept { return position_; }
    std::span<const int> inactive_counts() const noexcept { return inactive_count_; }

    int value(VarId v) const { return values_[idx(v)]; }
    bool assigned(VarId v) const { return values_[idx(v)] != kUnassigned; }
    int level_of(VarId v) const { return level_[idx(v)]; }
    bool inactive(VarId v) const { return inactive_count_[idx(v)] > 0; }
    bool active(VarId v) const { return ! assigned(v) && ! inactive(v); }
    std::span<const Assignment> trail() const noexcept { return trail_; }

    /// Assigns v=d at `level` and appends CPTs that just became fully
    /// instantiated to `completed` (ascending CPT id).
    void assign(VarId v, int d, int level, std::vector<VarId> & completed);

    /// Pops the newest assignment and every prune mark stamped at its level
    /// (level-0 marks are permanent).
    void unassign_last();

    /// Number of unassigned variables in a CPT's scope.
    int unassigned_in(VarId cpt) const { return unassigned_[idx(cpt)]; }

    // Prune marks.
    bool pruned(VarId v, int d) const { return prune_cpt_[offset_[idx(v)] + static_cast<std::size_t>(d)] != kNoVar; }
    VarId prune_reason(VarId v, int d) const { return prune_cpt_[offset_[idx(v)] + static_cast<std::size_t>(d)]; }
    int live_values(VarId v) const { return live_[idx(v)]; }
    void prune(VarId v, int d, VarId cpt, int level);

    /// Assignments of the pruning CPT's scope with v read as d.
    std::vector<Assignment> prune_context(VarId v, int d) const;

    // Inactivity marks; a variable may carry several at once.
    void mark_inactive(VarId v, int level);
    /// Clears the marks made at `level` and every deeper level.
    void unmark_level(int level);

    /// Every assignment on the trail as a list, in trail order.
    std::vector<Assignment> assignments() const { return {trail_.begin(), trail_.end()}; }

private:
    static std::size_t idx(VarId v) { return static_cast<std::size_t>(v); }

    struct PruneEntry {
        VarId var;
        int value;
        int level;
    };

    const BayesNet * net_;
    std::vector<int> values_;
    std::vector<int> level_;
    std::vector<std::uint64_t> position_;
    std::vector<Assignment> trail_;
    std::vector<int> trail_level_;
    std::uint64_t next_position_ = 0;
    std::vector<int> unassigned_;
    std::vector<std::size_t> offset_;
    std::vector<VarId> prune_cpt_;
    std::vector<int> live_;
    std::vector<PruneEntry> prunes_;
    std::vector<int> inactive_count_;
    std::vector<std::vector<VarId>> inactive_marks_;   // by level
};

struct ForwardCheckResult {
    std::vector<Assignment> pruned;
    std::vector<VarId> forced;    ///< Active variables left with one value.
    std::vector<VarId> deadend;   ///< Active variables left with none.
};

/// Evaluates every CPT that `just_assigned` reduced to a single unassigned
/// variable W and prunes the values of W that make it zero. Marks are
/// stamped with `level`. `evals` counts CPT lookups.
ForwardCheckResult forward_check(SearchState & state, VarId just_assigned, int level, std::uint64_t * evals = nullptr);

/// Prunes from every CPT that currently has exactly one unassigned variable.
ForwardCheckResult forward_check_all(SearchState & state, int level, std::uint64_t * evals = nullptr);

struct Propagation {
    bool consistent = true;
    std::vector<Assignment> conflict;     ///< Set when a deadend was reached.
    std::vector<VarId> assigned;          ///< Variables forced, in FIFO order.
    std::vector<VarId> completed_cpts;    ///< CPTs that became fully instantiated.
};

/// Assigns forced variables (FIFO) at `level` and forward-checks each, until
/// nothing is forced or some active variable has no values left. `keep_free`
/// is never assigned. Completed CPTs are reported, not evaluated.
Propagation propagate_to_fixpoint(SearchState & state, int level, VarId keep_free = kNoVar,
                                  std::uint64_t * evals = nullptr);

struct Preprocessed {
    bool contradiction = false;
    double prod = 1.0;                  ///< Product of CPTs fixed before search.
    std::vector<VarId> forced;          ///< Variables fixed by propagation.
};

/// Applies evidence at level 0, multiplies in every CPT it fixes, then (when
/// `forward_checking`) forward-checks and propagates to a fixpoint.
Preprocessed preprocess(SearchState & state, const Query & query, bool forward_checking,
                        std::uint64_t * evals = nullptr);

} // namespace valelim
