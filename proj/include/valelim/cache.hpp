#pragma once

#include "valelim/model.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace valelim {

/// A cached "good": under the `dset` assignments, summing the joint over the
/// `sset` variables gives `val` times a function of the remaining variables.
struct Factor {
    std::vector<Assignment> dset;   ///< Sorted by variable.
    std::vector<VarId> sset;        ///< Sorted.
    double val = 1.0;

    bool operator==(const Factor &) const = default;
};

/// Assignments every completion of which has probability zero. Sorted.
using Nogood = std::vector<Assignment>;

/// Read-only look at the current trail. `positions` orders assignments in
/// time; `inactive` may be empty, otherwise nonzero means inactive.
struct TrailView {
    std::span<const int> values;
    std::span<const std::uint64_t> positions;
    std::span<const int> inactive = {};

    bool holds(const Assignment & a) const { return values[static_cast<std::size_t>(a.var)] == a.value; }
    bool free(VarId v) const
    {
        const auto i = static_cast<std::size_t>(v);
        return values[i] == kUnassigned && (inactive.empty() || inactive[i] == 0);
    }
};

/// Sorts and checks the Factor invariants; throws std::invalid_argument.
Factor make_factor(std::vector<Assignment> dset, std::vector<VarId> sset, double val);

inline constexpr std::size_t kUnboundedCache = std::numeric_limits<std::size_t>::max();

class FactorCache {
public:
    using Id = std::uint32_t;

    explicit FactorCache(const BayesNet & net, std::size_t budget = kUnboundedCache);

    enum class Outcome { stored, merged };
    struct InsertResult {
        Outcome outcome;
        std::size_t evicted = 0;
    };

    /// Stores `f`; the trail decides which Dset assignment it watches. An
    /// identical (Dset, Sset) entry is kept instead, and its value must agree
    /// within 1e-9 or InternalError is thrown. Purges when over budget.
    InsertResult cache_factor(const Factor & f, const TrailView & trail);

    /// Call after every assignment. Returns the factors whose Dset became
    /// fully satisfied by `a`, in insertion order, without checking the Sset.
    std::vector<Id> notify_assigned(const Assignment & a, const TrailView & trail);

    /// notify_assigned() filtered to factors none of whose Sset variables is
    /// assigned (or inactive, when the view carries inactivity).
    std::vector<Factor> activated_factors(const Assignment & a, const TrailView & trail);

    /// Drops ceil(size/2) entries, keeping smaller Dsets, then larger Ssets,
    /// then older entries. Returns the number evicted.
    std::size_t purge();

    const Factor & factor(Id id) const { return slots_[id].factor; }
    bool alive(Id id) const { return slots_[id].alive; }
    std::size_t size() const noexcept { return live_; }
    std::size_t budget() const noexcept { return budget_; }
    std::uint64_t purge_count() const noexcept { return purges_; }

    /// Live factors in insertion order.
    std::vector<Factor> entries() const;

    /// One line per live factor: `Dset | Sset | Val`.
    std::string dump(const BayesNet & net) const;

private:
    struct Slot {
        Factor factor;
        bool alive = false;
        std::size_t watch = 0;
    };

    std::size_t literal(const Assignment & a) const
    {
        return offset_[static_cast<std::size_t>(a.var)] + static_cast<std::size_t>(a.value);
    }
    static std::string key_of(const Factor & f);
    void place_watch(Id id, const TrailView & trail);

    std::vector<std::size_t> offset_;
    std::vector<std::vector<Id>> watchers_;
    std::vector<Slot> slots_;
    std::vector<Id> alive_ids_;
    std::unordered_map<std::string, Id> index_;
    std::size_t budget_;
    std::size_t live_ = 0;
    std::uint64_t purges_ = 0;
};

/// Nogoods with two watched assignments each.
class NogoodStore {
public:
    explicit NogoodStore(const BayesNet & net);

    /// Stores a nogood. Its assignments may already be on the trail.
    void add(const Nogood & nogood, const TrailView & trail);

    /// Call after every assignment once the store is in use.
    void notify_assigned(const Assignment & a, const TrailView & trail);

    /// The stored nogood all of whose assignments hold on trail + candidate,
    /// or nullptr. `candidate`'s variable must be unassigned.
    const Nogood * blocking(const TrailView & trail, const Assignment & candidate) const;

    bool blocks(const TrailView & trail, const Assignment & candidate) const
    {
        return blocking(trail, candidate) != nullptr;
    }

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<Nogood> & entries() const noexcept { return entries_; }

private:
    struct Watches {
        std::size_t a = 0;   // indices into the nogood
        std::size_t b = 0;
    };

    std::size_t literal(const Assignment & a) const
    {
        return offset_[static_cast<std::size_t>(a.var)] + static_cast<std::size_t>(a.value);
    }

    std::vector<std::size_t> offset_;
    std::vector<std::vector<std::uint32_t>> watchers_;
    std::vector<Nogood> entries_;
    std::vector<Watches> watches_;
    bool has_empty_ = false;
};

/// Resolves one nogood per value of `var` (index = value) into their union
/// minus every assignment to `var`, stores it and returns it. Throws
/// std::invalid_argument unless every value is covered.
Nogood learn_nogood(NogoodStore & store, const TrailView & trail, const BayesNet & net, VarId var,
                    std::span<const Nogood> per_value);

} // namespace valelim
