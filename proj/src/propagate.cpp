#include "valelim/propagate.hpp"

#include "valelim/errors.hpp"

#include <algorithm>
#include <deque>

namespace valelim {

SearchState::SearchState(const BayesNet & net)
    : net_(&net),
      values_(net.size(), kUnassigned),
      level_(net.size(), -1),
      position_(net.size(), 0),
      unassigned_(net.size(), 0),
      offset_(net.size() + 1, 0),
      live_(net.size(), 0),
      inactive_count_(net.size(), 0)
{
    for (std::size_t c = 0; c < net.size(); ++c)
        unassigned_[c] = static_cast<int>(net.scope(static_cast<VarId>(c)).size());
    for (std::size_t v = 0; v < net.size(); ++v) {
        live_[v] = net.domain_size(static_cast<VarId>(v));
        offset_[v + 1] = offset_[v] + static_cast<std::size_t>(live_[v]);
    }
    prune_cpt_.assign(offset_.back(), kNoVar);
}

void SearchState::assign(VarId v, int d, int level, std::vector<VarId> & completed)
{
    if (assigned(v))
        throw InternalError("assigning " + net_->variable(v).name + " twice");
    values_[idx(v)] = d;
    level_[idx(v)] = level;
    position_[idx(v)] = next_position_++;
    trail_.push_back({v, d});
    trail_level_.push_back(level);
    for (VarId c : net_->cpts_of(v))
        if (--unassigned_[idx(c)] == 0)
            completed.push_back(c);
}

void SearchState::unassign_last()
{
    const Assignment a = trail_.back();
    const int level = trail_level_.back();
    trail_.pop_back();
    trail_level_.pop_back();
    if (level > 0) {
        while (! prunes_.empty() && prunes_.back().level >= level) {
            const auto & p = prunes_.back();
            prune_cpt_[offset_[idx(p.var)] + static_cast<std::size_t>(p.value)] = kNoVar;
            ++live_[idx(p.var)];
            prunes_.pop_back();
        }
    }
    for (VarId c : net_->cpts_of(a.var))
        ++unassigned_[idx(c)];
    values_[idx(a.var)] = kUnassigned;
    level_[idx(a.var)] = -1;
    --next_position_;
}

void SearchState::prune(VarId v, int d, VarId cpt, int level)
{
    auto & slot = prune_cpt_[offset_[idx(v)] + static_cast<std::size_t>(d)];
    if (slot != kNoVar)
        return;
    slot = cpt;
    --live_[idx(v)];
    prunes_.push_back({v, d, level});
}

std::vector<Assignment> SearchState::prune_context(VarId v, int d) const
{
    std::vector<Assignment> out;
    const VarId c = prune_reason(v, d);
    for (VarId x : net_->scope(c))
        out.push_back({x, x == v ? d : values_[idx(x)]});
    std::sort(out.begin(), out.end());
    return out;
}

void SearchState::mark_inactive(VarId v, int level)
{
    if (inactive_marks_.size() <= static_cast<std::size_t>(level))
        inactive_marks_.resize(static_cast<std::size_t>(level) + 1);
    ++inactive_count_[idx(v)];
    inactive_marks_[static_cast<std::size_t>(level)].push_back(v);
}

void SearchState::unmark_level(int level)
{
    for (auto l = static_cast<std::size_t>(level); l < inactive_marks_.size(); ++l) {
        for (VarId v : inactive_marks_[l])
            --inactive_count_[idx(v)];
        inactive_marks_[l].clear();
    }
}

namespace {

void check_cpt(SearchState & state, VarId c, int level, ForwardCheckResult & out, std::uint64_t * evals)
{
    const auto & net = state.net();
    VarId w = kNoVar;
    for (VarId x : net.scope(c))
        if (! state.assigned(x))
            w = x;
    for (int d = 0; d < net.domain_size(w); ++d) {
        if (state.pruned(w, d))
            continue;
        if (evals)
            ++*evals;
        if (net.cpt(c).table[net.table_index_with(c, state.values(), w, d)] == 0.0) {
            state.prune(w, d, c, level);
            out.pruned.push_back({w, d});
        }
    }
    if (state.active(w)) {
        if (state.live_values(w) == 0 && std::find(out.deadend.begin(), out.deadend.end(), w) == out.deadend.end())
            out.deadend.push_back(w);
        else if (state.live_values(w) == 1 && std::find(out.forced.begin(), out.forced.end(), w) == out.forced.end())
            out.forced.push_back(w);
    }
}

} // namespace

ForwardCheckResult forward_check(SearchState & state, VarId just_assigned, int level, std::uint64_t * evals)
{
    ForwardCheckResult out;
    for (VarId c : state.net().cpts_of(just_assigned))
        if (state.unassigned_in(c) == 1)
            check_cpt(state, c, level, out, evals);
    return out;
}

ForwardCheckResult forward_check_all(SearchState & state, int level, std::uint64_t * evals)
{
    ForwardCheckResult out;
    for (std::size_t c = 0; c < state.net().size(); ++c)
        if (state.unassigned_in(static_cast<VarId>(c)) == 1)
            check_cpt(state, static_cast<VarId>(c), level, out, evals);
    return out;
}

namespace {

std::vector<Assignment> deadend_conflict(const SearchState & state, VarId w)
{
    std::vector<Assignment> conflict;
    for (int d = 0; d < state.net().domain_size(w); ++d)
        for (const auto & a : state.prune_context(w, d))
            if (a.var != w)
                conflict.push_back(a);
    std::sort(conflict.begin(), conflict.end());
    conflict.erase(std::unique(conflict.begin(), conflict.end()), conflict.end());
    return conflict;
}

} // namespace

Propagation propagate_to_fixpoint(SearchState & state, int level, VarId keep_free, std::uint64_t * evals)
{
    Propagation out;
    std::deque<VarId> queue;
    auto absorb = [&](const ForwardCheckResult & fc) {
        if (! fc.deadend.empty()) {
            out.consistent = false;
            out.conflict = deadend_conflict(state, fc.deadend.front());
            return;
        }
        for (VarId w : fc.forced)
            if (w != keep_free)
                queue.push_back(w);
    };

    // Anything already forced or dead before the call.
    ForwardCheckResult initial;
    for (std::size_t v = 0; v < state.net().size(); ++v) {
        const auto id = static_cast<VarId>(v);
        if (! state.active(id))
            continue;
        if (state.live_values(id) == 0)
            initial.deadend.push_back(id);
        else if (state.live_values(id) == 1)
            initial.forced.push_back(id);
    }
    absorb(initial);

    while (out.consistent && ! queue.empty()) {
        const VarId w = queue.front();
        queue.pop_front();
        if (! state.active(w))
            continue;
        int value = 0;
        while (state.pruned(w, value))
            ++value;
        state.assign(w, value, level, out.completed_cpts);
        out.assigned.push_back(w);
        absorb(forward_check(state, w, level, evals));
    }
    return out;
}

Preprocessed preprocess(SearchState & state, const Query & query, bool forward_checking, std::uint64_t * evals)
{
    Preprocessed out;
    const auto & net = state.net();
    std::vector<VarId> completed;
    for (const auto & e : query.evidence)
        state.assign(e.var, e.value, 0, completed);

    auto absorb_cpts = [&](const std::vector<VarId> & cpts) {
        for (VarId c : cpts) {
            if (evals)
                ++*evals;
            out.prod *= net.eval_unchecked(c, state.values());
        }
        if (out.prod == 0.0)
            out.contradiction = true;
    };
    std::sort(completed.begin(), completed.end());
    absorb_cpts(completed);
    if (out.contradiction || ! forward_checking)
        return out;

    auto fc = forward_check_all(state, 0, evals);
    if (! fc.deadend.empty()) {
        out.contradiction = true;
        return out;
    }
    auto prop = propagate_to_fixpoint(state, 0, query.query_var, evals);
    out.forced = prop.assigned;
    absorb_cpts(prop.completed_cpts);
    if (! prop.consistent)
        out.contradiction = true;
    if (state.live_values(query.query_var) == 0)
        out.contradiction = true;
    return out;
}

} // namespace valelim
