#include "valelim/engine.hpp"

#include "valelim/errors.hpp"
#include "valelim/varelim.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <stdexcept>

namespace valelim {

namespace {

constexpr int kNoJump = std::numeric_limits<int>::max();

using Clock = std::chrono::steady_clock;

void unite(std::vector<VarId> & dst, std::span<const VarId> src)
{
    if (src.empty())
        return;
    dst.insert(dst.end(), src.begin(), src.end());
    std::sort(dst.begin(), dst.end());
    dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
}

void unite(std::vector<VarId> & dst, std::span<const Assignment> src)
{
    std::vector<VarId> vars;
    vars.reserve(src.size());
    for (const auto & a : src)
        vars.push_back(a.var);
    unite(dst, vars);
}

void erase_var(std::vector<VarId> & vars, VarId v)
{
    vars.erase(std::remove(vars.begin(), vars.end(), v), vars.end());
}

// Running accumulators for one search level.
struct Frame {
    enum class Zero { none, known, unknown };

    VarId var = kNoVar;
    double sum = 0.0;
    std::vector<VarId> dset, sset;

    // Current value only.
    double prod = 1.0;
    std::vector<VarId> vdset, vsset;
    Zero zero = Zero::none;
    std::vector<VarId> reason;

    std::vector<Nogood> value_nogoods;
    bool resolvable = true;

    void begin_value()
    {
        prod = 1.0;
        vdset.clear();
        vsset.clear();
        zero = Zero::none;
        reason.clear();
    }

    void set_zero(std::vector<VarId> why)
    {
        prod = 0.0;
        if (zero != Zero::none)
            return;
        zero = Zero::known;
        reason = std::move(why);
    }
};

class Run {
public:
    Run(const BayesNet & net, const Query & query, const EngineConfig & config, std::vector<VarId> order,
        Diagnostics * diag)
        : net_(net),
          query_(query),
          config_(config),
          order_(std::move(order)),
          state_(net),
          cache_(net, config.cache_budget),
          nogoods_(net),
          frames_(net.size() + 2),
          rng_(config.seed),
          diag_(diag)
    {
        if (config.timeout_seconds > 0.0)
            deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(config.timeout_seconds));
    }

    ResultRecord execute();

private:
    TrailView view() const { return {state_.values(), state_.positions(), state_.inactive_counts()}; }
    bool learning() const { return config_.mode == EngineMode::value_elim && config_.nogood_learning; }

    void count_node();
    VarId select(int level);
    std::vector<Assignment> with_candidate(VarId v, int d) const;
    void note_prunes(const ForwardCheckResult & fc);
    void note_skip(VarId v, int d);
    std::vector<VarId> deadend_reason(VarId w) const;
    std::vector<VarId> blocked_reason(VarId v, int d, int level, const Nogood & ng);

    double eval_completed(std::vector<VarId> & completed, Frame * frame);
    int value_elim(int level);
    void finish_value(Frame & f, int level, int d);
    int push(std::span<const VarId> dset, std::span<const VarId> sset, double val, int level);
    double prob_bt(int level);
    double gen_and_sum(std::size_t depth);

    const BayesNet & net_;
    Query query_;
    const EngineConfig & config_;
    std::vector<VarId> order_;
    std::vector<VarId> free_order_;
    SearchState state_;
    FactorCache cache_;
    NogoodStore nogoods_;
    std::vector<Frame> frames_;
    std::vector<double> qprod_;
    double prod0_ = 1.0;
    SearchStats stats_;
    std::mt19937_64 rng_;
    Diagnostics * diag_;
    std::optional<Clock::time_point> deadline_;
    std::vector<VarId> scratch_;
};

void Run::count_node()
{
    ++stats_.nodes;
    if (config_.node_limit && stats_.nodes > config_.node_limit)
        throw SearchAborted(SearchAborted::Reason::node_limit,
                            "node limit of " + std::to_string(config_.node_limit) + " exceeded");
    if (deadline_ && (stats_.nodes & 4095) == 0 && Clock::now() > *deadline_)
        throw SearchAborted(SearchAborted::Reason::timeout, "timed out after " + std::to_string(stats_.nodes)
                                                                + " nodes");
}

VarId Run::select(int level)
{
    if (level == 1)
        return query_.query_var;
    if (config_.ordering != OrderingKind::static_order) {
        for (VarId v : order_)
            if (state_.active(v) && state_.live_values(v) == 0)
                return v;
        for (VarId v : order_)
            if (state_.active(v) && state_.live_values(v) == 1)
                return v;
        if (config_.ordering == OrderingKind::dynamic_random || config_.heuristic) {
            std::vector<VarId> candidates;
            for (VarId v : order_)
                if (state_.active(v))
                    candidates.push_back(v);
            if (candidates.empty())
                return kNoVar;
            if (config_.ordering == OrderingKind::dynamic_random) {
                std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
                return candidates[pick(rng_)];
            }
            const VarId v = config_.heuristic(state_, candidates);
            if (std::find(candidates.begin(), candidates.end(), v) == candidates.end())
                throw std::invalid_argument("variable heuristic returned an inactive variable");
            return v;
        }
    }
    for (VarId v : order_)
        if (state_.active(v))
            return v;
    return kNoVar;
}

std::vector<Assignment> Run::with_candidate(VarId v, int d) const
{
    auto out = state_.assignments();
    if (! state_.assigned(v))
        out.push_back({v, d});
    std::sort(out.begin(), out.end());
    return out;
}

void Run::note_prunes(const ForwardCheckResult & fc)
{
    if (diag_)
        for (const auto & p : fc.pruned)
            diag_->prunes.push_back(with_candidate(p.var, p.value));
}

void Run::note_skip(VarId v, int d)
{
    if (diag_)
        diag_->zero_skips.push_back(with_candidate(v, d));
}

std::vector<VarId> Run::deadend_reason(VarId w) const
{
    std::vector<VarId> out;
    for (int d = 0; d < net_.domain_size(w); ++d)
        unite(out, state_.prune_context(w, d));
    erase_var(out, w);
    return out;
}

std::vector<VarId> Run::blocked_reason(VarId v, int d, int level, const Nogood & ng)
{
    std::vector<VarId> completed, out;
    state_.assign(v, d, level, completed);
    for (VarId c : completed) {
        ++stats_.cpt_evals;
        if (net_.eval_unchecked(c, state_.values()) == 0.0) {
            out.assign(net_.scope(c).begin(), net_.scope(c).end());
            break;
        }
    }
    state_.unassign_last();
    if (out.empty())
        unite(out, ng);
    return out;
}

double Run::eval_completed(std::vector<VarId> & completed, Frame * frame)
{
    std::sort(completed.begin(), completed.end());
    double prod = 1.0;
    for (VarId c : completed) {
        ++stats_.cpt_evals;
        const double p = net_.eval_unchecked(c, state_.values());
        if (frame)
            unite(frame->vdset, net_.scope(c));
        if (p == 0.0) {
            if (frame)
                frame->set_zero({net_.scope(c).begin(), net_.scope(c).end()});
            return 0.0;
        }
        prod *= p;
    }
    return prod;
}

int Run::push(std::span<const VarId> dset, std::span<const VarId> sset, double val, int level)
{
    int bl = 0;
    for (VarId v : dset)
        bl = std::max(bl, state_.level_of(v));
    // A frame that already summed any of these variables on an earlier value
    // has to take the factor for its current value too.
    for (int k = level - 1; k > bl; --k) {
        const auto & seen = frames_[static_cast<std::size_t>(k)].sset;
        if (std::any_of(sset.begin(), sset.end(),
                        [&](VarId x) { return std::binary_search(seen.begin(), seen.end(), x); })) {
            bl = k;
            break;
        }
    }
    for (VarId x : sset) {
        if (state_.assigned(x))
            throw InternalError("subsumed variable " + net_.variable(x).name + " is assigned at push-back");
        state_.mark_inactive(x, bl);
    }
    if (bl == 0) {
        prod0_ *= val;
        return bl;
    }
    auto & p = frames_[static_cast<std::size_t>(bl)];
    const bool was_live = p.prod != 0.0;
    p.prod *= val;
    unite(p.vdset, dset);
    unite(p.vsset, sset);
    if (was_live && p.prod == 0.0) {
        if (val == 0.0)
            p.set_zero({dset.begin(), dset.end()});
        else
            p.zero = Frame::Zero::unknown;
    }
    return bl;
}

void Run::finish_value(Frame & f, int level, int d)
{
    if (level == 1)
        qprod_[static_cast<std::size_t>(d)] = f.prod;
    if (f.prod != 0.0) {
        f.sum += f.prod;
        unite(f.dset, f.vdset);
        unite(f.sset, f.vsset);
        f.resolvable = false;
        return;
    }
    if (f.zero == Frame::Zero::known) {
        erase_var(f.reason, f.var);
        unite(f.dset, f.reason);
        if (f.resolvable) {
            Nogood ng;
            for (VarId v : f.reason)
                ng.push_back({v, state_.value(v)});
            ng.push_back({f.var, d});
            std::sort(ng.begin(), ng.end());
            f.value_nogoods.push_back(std::move(ng));
        }
    } else {
        f.zero = Frame::Zero::unknown;
        unite(f.dset, f.vdset);
        f.resolvable = false;
    }
}

int Run::value_elim(int level)
{
    const VarId v = select(level);
    if (v == kNoVar)
        return kNoJump;
    auto & f = frames_[static_cast<std::size_t>(level)];
    f.var = v;
    f.sum = 0.0;
    f.dset.clear();
    f.sset.clear();
    f.value_nogoods.clear();
    f.resolvable = true;

    std::vector<VarId> completed;
    for (int d = 0; d < net_.domain_size(v); ++d) {
        f.begin_value();
        const Assignment cand{v, d};

        if (config_.forward_checking && state_.pruned(v, d)) {
            std::vector<VarId> why;
            unite(why, state_.prune_context(v, d));
            f.set_zero(std::move(why));
            note_skip(v, d);
            finish_value(f, level, d);
            continue;
        }
        if (learning()) {
            if (const Nogood * ng = nogoods_.blocking(view(), cand)) {
                f.set_zero(blocked_reason(v, d, level, *ng));
                note_skip(v, d);
                finish_value(f, level, d);
                continue;
            }
        }

        count_node();
        completed.clear();
        state_.assign(v, d, level, completed);
        if (nogoods_.size())
            nogoods_.notify_assigned(cand, view());
        const auto done = cache_.notify_assigned(cand, view());

        f.prod = eval_completed(completed, &f);
        if (f.prod != 0.0) {
            for (auto id : done) {
                const Factor & fac = cache_.factor(id);
                if (! std::all_of(fac.sset.begin(), fac.sset.end(), [&](VarId x) { return state_.active(x); }))
                    continue;
                ++stats_.cache_hits;
                unite(f.vdset, fac.dset);
                unite(f.vsset, fac.sset);
                for (VarId x : fac.sset)
                    state_.mark_inactive(x, level);
                if (fac.val == 0.0) {
                    std::vector<VarId> why;
                    unite(why, fac.dset);
                    f.set_zero(std::move(why));
                    break;
                }
                f.prod *= fac.val;
                if (f.prod == 0.0)
                    f.zero = Frame::Zero::unknown;
            }
        }
        if (f.prod != 0.0 && config_.forward_checking) {
            auto fc = forward_check(state_, v, level, &stats_.cpt_evals);
            note_prunes(fc);
            if (! fc.deadend.empty())
                f.set_zero(deadend_reason(fc.deadend.front()));
        }

        if (f.prod != 0.0) {
            const int target = value_elim(level + 1);
            if (target < level) {
                state_.unmark_level(level);
                state_.unassign_last();
                return target;
            }
        } else {
            note_skip(v, d);
        }
        finish_value(f, level, d);
        state_.unmark_level(level);
        state_.unassign_last();
    }

    if (level == 1)
        return kNoJump;

    erase_var(f.dset, v);
    unite(f.sset, std::span<const VarId>(&f.var, 1));

    std::vector<Assignment> dset;
    for (VarId x : f.dset)
        dset.push_back({x, state_.value(x)});
    Factor fac{std::move(dset), f.sset, f.sum};
    if (diag_)
        diag_->factors.push_back({fac, v});
    if (cache_.cache_factor(fac, view()).outcome == FactorCache::Outcome::stored)
        ++stats_.factors_cached;

    if (f.sum == 0.0 && learning() && f.resolvable
        && f.value_nogoods.size() == static_cast<std::size_t>(net_.domain_size(v))) {
        auto ng = learn_nogood(nogoods_, view(), net_, v, f.value_nogoods);
        ++stats_.nogoods;
        if (diag_)
            diag_->nogoods.push_back(std::move(ng));
    }

    // A zero factor zeroes the frame it lands in, so the levels between
    // are abandoned rather than cached.
    const int bl = push(f.dset, f.sset, f.sum, level);
    return f.sum == 0.0 ? bl : kNoJump;
}

double Run::prob_bt(int level)
{
    const VarId v = select(level);
    if (v == kNoVar)
        return 1.0;
    double sum = 0.0;
    std::vector<VarId> completed;
    for (int d = 0; d < net_.domain_size(v); ++d) {
        if (config_.forward_checking && state_.pruned(v, d)) {
            note_skip(v, d);
            if (level == 1)
                qprod_[static_cast<std::size_t>(d)] = 0.0;
            continue;
        }
        count_node();
        completed.clear();
        state_.assign(v, d, level, completed);
        double prod = eval_completed(completed, nullptr);
        if (prod != 0.0 && config_.forward_checking) {
            auto fc = forward_check(state_, v, level, &stats_.cpt_evals);
            note_prunes(fc);
            if (! fc.deadend.empty())
                prod = 0.0;
        }
        if (prod != 0.0)
            prod *= prob_bt(level + 1);
        else
            note_skip(v, d);
        if (level == 1)
            qprod_[static_cast<std::size_t>(d)] = prod;
        sum += prod;
        state_.unassign_last();
    }
    return sum;
}

double Run::gen_and_sum(std::size_t depth)
{
    if (depth == free_order_.size()) {
        double prod = 1.0;
        for (std::size_t c = 0; c < net_.size(); ++c) {
            ++stats_.cpt_evals;
            prod *= net_.eval_unchecked(static_cast<VarId>(c), state_.values());
        }
        return prod;
    }
    const VarId v = free_order_[depth];
    double sum = 0.0;
    for (int d = 0; d < net_.domain_size(v); ++d) {
        count_node();
        scratch_.clear();
        state_.assign(v, d, static_cast<int>(depth) + 1, scratch_);
        const double s = gen_and_sum(depth + 1);
        if (depth == 0)
            qprod_[static_cast<std::size_t>(d)] = s;
        sum += s;
        state_.unassign_last();
    }
    return sum;
}

ResultRecord Run::execute()
{
    ResultRecord rec;
    qprod_.assign(static_cast<std::size_t>(net_.domain_size(query_.query_var)), 0.0);
    bool zero = false;

    if (config_.mode == EngineMode::gen_and_sum) {
        for (const auto & e : query_.evidence)
            state_.assign(e.var, e.value, 0, scratch_);
        for (VarId v : order_)
            if (! state_.assigned(v))
                free_order_.push_back(v);
        gen_and_sum(0);
    } else {
        const auto pre = preprocess(state_, query_, config_.forward_checking, &stats_.cpt_evals);
        prod0_ = pre.prod;
        if (diag_)
            for (std::size_t x = 0; x < net_.size(); ++x)
                for (int d = 0; d < net_.domain_size(static_cast<VarId>(x)); ++d)
                    if (! state_.assigned(static_cast<VarId>(x)) && state_.pruned(static_cast<VarId>(x), d))
                        diag_->prunes.push_back(with_candidate(static_cast<VarId>(x), d));
        if (pre.contradiction)
            zero = true;
        else if (config_.mode == EngineMode::prob_bt)
            prob_bt(1);
        else if (value_elim(1) == 0)
            zero = true;
    }

    double total = 0.0;
    if (! zero) {
        for (auto & p : qprod_) {
            p *= prod0_;
            total += p;
        }
    }
    if (zero || total == 0.0) {
        rec.zero_evidence = true;
    } else {
        for (double p : qprod_)
            rec.posterior.push_back(p / total);
        rec.posterior.front() += config_.debug_posterior_offset;
    }
    stats_.purges = cache_.purge_count();
    rec.stats = stats_;
    return rec;
}

} // namespace

std::string engine_name(EngineMode mode)
{
    switch (mode) {
    case EngineMode::gen_and_sum:
        return "gen-and-sum";
    case EngineMode::prob_bt:
        return "prob-bt";
    case EngineMode::value_elim:
        return "value-elim";
    }
    return "unknown";
}

std::string ordering_name(const EngineConfig & config)
{
    switch (config.ordering) {
    case OrderingKind::static_order:
        return config.static_order.empty() ? "min-fill" : "custom";
    case OrderingKind::dynamic:
        return "dynamic";
    case OrderingKind::dynamic_random:
        return "dynamic-random";
    }
    return "unknown";
}

ResultRecord run_query(const BayesNet & net, const Query & query, const EngineConfig & config, Diagnostics * diagnostics)
{
    const auto start = Clock::now();
    check_query(net, query);

    BarrenRemoval reduced;
    if (config.remove_barren) {
        reduced = remove_barren(net, query);
    } else {
        reduced.net = net;
        reduced.query = query;
        for (std::size_t v = 0; v < net.size(); ++v) {
            reduced.to_original.push_back(static_cast<VarId>(v));
            reduced.to_reduced.push_back(static_cast<VarId>(v));
        }
    }
    const auto & searched = reduced.net;
    const auto & q = reduced.query;

    std::vector<VarId> order{q.query_var};
    std::vector<char> listed(searched.size(), 0);
    listed[static_cast<std::size_t>(q.query_var)] = 1;
    auto append = [&](VarId v) {
        if (v != kNoVar && ! listed[static_cast<std::size_t>(v)]) {
            listed[static_cast<std::size_t>(v)] = 1;
            order.push_back(v);
        }
    };
    if (config.static_order.empty()) {
        std::vector<VarId> excluded{q.query_var};
        for (const auto & e : q.evidence)
            excluded.push_back(e.var);
        auto elim = min_fill_order(searched, excluded).order;
        for (auto it = elim.rbegin(); it != elim.rend(); ++it)
            append(*it);
    } else {
        for (VarId v : config.static_order) {
            if (v < 0 || static_cast<std::size_t>(v) >= net.size())
                throw std::invalid_argument("static order names an unknown variable");
            append(reduced.to_reduced[static_cast<std::size_t>(v)]);
        }
    }
    for (std::size_t v = 0; v < searched.size(); ++v)
        append(static_cast<VarId>(v));

    if (diagnostics) {
        *diagnostics = Diagnostics{};
        diagnostics->searched = searched;
        diagnostics->query = q;
        diagnostics->to_original = reduced.to_original;
        diagnostics->removed = reduced.removed;
        diagnostics->order = order;
    }

    Run run(searched, q, config, order, diagnostics);
    auto rec = run.execute();
    rec.engine = engine_name(config.mode);
    rec.ordering = ordering_name(config);
    rec.query = net.variable(query.query_var).name;
    rec.stats.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return rec;
}

} // namespace valelim
