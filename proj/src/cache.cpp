#include "valelim/cache.hpp"

#include "valelim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace valelim {

namespace {

std::vector<std::size_t> literal_offsets(const BayesNet & net)
{
    std::vector<std::size_t> offset(net.size() + 1, 0);
    for (std::size_t v = 0; v < net.size(); ++v)
        offset[v + 1] = offset[v] + static_cast<std::size_t>(net.domain_size(static_cast<VarId>(v)));
    return offset;
}

} // namespace

Factor make_factor(std::vector<Assignment> dset, std::vector<VarId> sset, double val)
{
    std::sort(dset.begin(), dset.end());
    for (std::size_t i = 1; i < dset.size(); ++i)
        if (dset[i].var == dset[i - 1].var)
            throw std::invalid_argument("factor Dset assigns a variable twice");
    std::sort(sset.begin(), sset.end());
    sset.erase(std::unique(sset.begin(), sset.end()), sset.end());
    for (VarId v : sset)
        for (const auto & a : dset)
            if (a.var == v)
                throw std::invalid_argument("factor Sset overlaps its Dset");
    if (! (val >= 0.0))
        throw std::invalid_argument("factor value must be nonnegative");
    return {std::move(dset), std::move(sset), val};
}

FactorCache::FactorCache(const BayesNet & net, std::size_t budget)
    : offset_(literal_offsets(net)), watchers_(offset_.back()), budget_(budget)
{
}

std::string FactorCache::key_of(const Factor & f)
{
    std::string key;
    key.reserve((f.dset.size() * 2 + f.sset.size() + 1) * sizeof(std::int32_t));
    auto put = [&](std::int32_t x) { key.append(reinterpret_cast<const char *>(&x), sizeof x); };
    for (const auto & a : f.dset) {
        put(a.var);
        put(a.value);
    }
    put(-1);
    for (VarId v : f.sset)
        put(v);
    return key;
}

void FactorCache::place_watch(Id id, const TrailView & trail)
{
    auto & slot = slots_[id];
    const auto & dset = slot.factor.dset;
    if (dset.empty())
        return;
    const Assignment * best = nullptr;
    for (const auto & a : dset) {
        if (! trail.holds(a)) {
            best = &a;
            break;
        }
        if (! best || trail.positions[static_cast<std::size_t>(a.var)]
                          > trail.positions[static_cast<std::size_t>(best->var)])
            best = &a;
    }
    slot.watch = literal(*best);
    watchers_[slot.watch].push_back(id);
}

FactorCache::InsertResult FactorCache::cache_factor(const Factor & f, const TrailView & trail)
{
    auto key = key_of(f);
    if (auto it = index_.find(key); it != index_.end()) {
        const double old = slots_[it->second].factor.val;
        if (std::abs(old - f.val) > 1e-9 * std::max({1.0, std::abs(old), std::abs(f.val)})) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "cached factor value %.17g disagrees with recomputed %.17g", old, f.val);
            throw InternalError(buf);
        }
        return {Outcome::merged, 0};
    }
    const auto id = static_cast<Id>(slots_.size());
    slots_.push_back({f, true, 0});
    alive_ids_.push_back(id);
    index_.emplace(std::move(key), id);
    ++live_;
    place_watch(id, trail);

    InsertResult result{Outcome::stored, 0};
    if (live_ > budget_)
        result.evicted = purge();
    return result;
}

std::vector<FactorCache::Id> FactorCache::notify_assigned(const Assignment & a, const TrailView & trail)
{
    std::vector<Id> completed;
    const auto lit = literal(a);
    std::vector<Id> list;
    list.swap(watchers_[lit]);
    auto & keep = watchers_[lit];
    for (Id id : list) {
        auto & slot = slots_[id];
        if (! slot.alive || slot.watch != lit)
            continue;
        const Assignment * open = nullptr;
        for (const auto & x : slot.factor.dset)
            if (! trail.holds(x)) {
                open = &x;
                break;
            }
        if (open) {
            slot.watch = literal(*open);
            watchers_[slot.watch].push_back(id);
        } else {
            keep.push_back(id);
            completed.push_back(id);
        }
    }
    std::sort(completed.begin(), completed.end());
    return completed;
}

std::vector<Factor> FactorCache::activated_factors(const Assignment & a, const TrailView & trail)
{
    std::vector<Factor> out;
    for (Id id : notify_assigned(a, trail)) {
        const auto & f = slots_[id].factor;
        if (std::all_of(f.sset.begin(), f.sset.end(), [&](VarId v) { return trail.free(v); }))
            out.push_back(f);
    }
    return out;
}

std::size_t FactorCache::purge()
{
    std::vector<Id> ids = alive_ids_;
    ++purges_;
    if (ids.empty())
        return 0;
    std::stable_sort(ids.begin(), ids.end(), [&](Id x, Id y) {
        const auto & fx = slots_[x].factor;
        const auto & fy = slots_[y].factor;
        if (fx.dset.size() != fy.dset.size())
            return fx.dset.size() < fy.dset.size();
        return fx.sset.size() > fy.sset.size();
    });
    const std::size_t evict = (ids.size() + 1) / 2;
    for (std::size_t i = ids.size() - evict; i < ids.size(); ++i) {
        auto & slot = slots_[ids[i]];
        index_.erase(key_of(slot.factor));
        slot.alive = false;
        slot.factor = Factor{};
    }
    live_ -= evict;
    std::erase_if(alive_ids_, [&](Id id) { return ! slots_[id].alive; });
    return evict;
}

std::vector<Factor> FactorCache::entries() const
{
    std::vector<Factor> out;
    for (const auto & slot : slots_)
        if (slot.alive)
            out.push_back(slot.factor);
    return out;
}

std::string FactorCache::dump(const BayesNet & net) const
{
    std::string out;
    char buf[64];
    for (const auto & slot : slots_) {
        if (! slot.alive)
            continue;
        const auto & f = slot.factor;
        for (std::size_t i = 0; i < f.dset.size(); ++i) {
            if (i)
                out += ',';
            const auto & var = net.variable(f.dset[i].var);
            out += var.name + '=' + var.domain[static_cast<std::size_t>(f.dset[i].value)];
        }
        out += " | ";
        for (std::size_t i = 0; i < f.sset.size(); ++i) {
            if (i)
                out += ',';
            out += net.variable(f.sset[i]).name;
        }
        std::snprintf(buf, sizeof buf, " | %.17g\n", f.val);
        out += buf;
    }
    return out;
}

NogoodStore::NogoodStore(const BayesNet & net) : offset_(literal_offsets(net)), watchers_(offset_.back()) {}

void NogoodStore::add(const Nogood & nogood, const TrailView & trail)
{
    const auto id = static_cast<std::uint32_t>(entries_.size());
    entries_.push_back(nogood);
    watches_.push_back({});
    if (nogood.empty()) {
        has_empty_ = true;
        return;
    }

    // Open assignments first, then the most recently made ones.
    std::vector<std::size_t> rank(nogood.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t x, std::size_t y) {
        const bool hx = trail.holds(nogood[x]);
        const bool hy = trail.holds(nogood[y]);
        if (hx != hy)
            return ! hx;
        if (! hx)
            return false;
        return trail.positions[static_cast<std::size_t>(nogood[x].var)]
               > trail.positions[static_cast<std::size_t>(nogood[y].var)];
    });
    auto & w = watches_.back();
    w.a = rank[0];
    w.b = nogood.size() > 1 ? rank[1] : rank[0];
    watchers_[literal(nogood[w.a])].push_back(id);
    if (w.b != w.a)
        watchers_[literal(nogood[w.b])].push_back(id);
}

void NogoodStore::notify_assigned(const Assignment & a, const TrailView & trail)
{
    const auto lit = literal(a);
    std::vector<std::uint32_t> list;
    list.swap(watchers_[lit]);
    auto & keep = watchers_[lit];
    for (auto id : list) {
        const auto & ng = entries_[id];
        auto & w = watches_[id];
        if (w.a == w.b) {
            keep.push_back(id);
            continue;
        }
        std::size_t & mine = literal(ng[w.a]) == lit ? w.a : w.b;
        std::size_t other = &mine == &w.a ? w.b : w.a;
        bool moved = false;
        for (std::size_t k = 0; k < ng.size(); ++k) {
            if (k == mine || k == other || trail.holds(ng[k]))
                continue;
            mine = k;
            watchers_[literal(ng[k])].push_back(id);
            moved = true;
            break;
        }
        if (! moved)
            keep.push_back(id);
    }
}

const Nogood * NogoodStore::blocking(const TrailView & trail, const Assignment & candidate) const
{
    if (has_empty_)
        for (const auto & ng : entries_)
            if (ng.empty())
                return &ng;
    for (auto id : watchers_[literal(candidate)]) {
        const auto & ng = entries_[id];
        bool all = true;
        for (const auto & x : ng)
            if (! (x == candidate || trail.holds(x))) {
                all = false;
                break;
            }
        if (all)
            return &ng;
    }
    return nullptr;
}

Nogood learn_nogood(NogoodStore & store, const TrailView & trail, const BayesNet & net, VarId var,
                    std::span<const Nogood> per_value)
{
    if (per_value.size() != static_cast<std::size_t>(net.domain_size(var)))
        throw std::invalid_argument("learn_nogood needs one nogood per value of " + net.variable(var).name);
    Nogood out;
    for (const auto & ng : per_value)
        for (const auto & a : ng)
            if (a.var != var)
                out.push_back(a);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].var == out[i - 1].var)
            throw std::invalid_argument("nogoods to resolve disagree on " + net.variable(out[i].var).name);
    store.add(out, trail);
    return out;
}

} // namespace valelim
