#include "valelim/protocol.hpp"

#include "valelim/propagate.hpp"

#include <random>

namespace valelim {

namespace {

std::vector<VarId> unforced(const SearchState & state, VarId skip)
{
    std::vector<VarId> out;
    for (std::size_t v = 0; v < state.net().size(); ++v) {
        const auto id = static_cast<VarId>(v);
        if (id != skip && ! state.assigned(id) && state.live_values(id) >= 2)
            out.push_back(id);
    }
    return out;
}

template <typename T>
const T & draw(const std::vector<T> & items, std::mt19937_64 & rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
    return items[pick(rng)];
}

} // namespace

Query random_query(const BayesNet & net, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    SearchState state(net);
    forward_check_all(state, 0);
    propagate_to_fixpoint(state, 0);

    Query query;
    auto candidates = unforced(state, kNoVar);
    if (! candidates.empty() && net.size() > 1) {
        const VarId e = draw(candidates, rng);
        std::vector<int> live;
        for (int d = 0; d < net.domain_size(e); ++d)
            if (! state.pruned(e, d))
                live.push_back(d);
        const int value = draw(live, rng);
        query.evidence.push_back({e, value});

        std::vector<VarId> completed;
        state.assign(e, value, 0, completed);
        forward_check(state, e, 0);
        propagate_to_fixpoint(state, 0);
    }

    const VarId evidence_var = query.evidence.empty() ? kNoVar : query.evidence.front().var;
    auto remaining = unforced(state, evidence_var);
    if (remaining.empty())
        for (std::size_t v = 0; v < net.size(); ++v)
            if (static_cast<VarId>(v) != evidence_var)
                remaining.push_back(static_cast<VarId>(v));
    query.query_var = draw(remaining, rng);
    return query;
}

} // namespace valelim
