#pragma once

#include "valelim/model.hpp"

#include <cstdint>

namespace valelim {

/// Random trial query: forward-check the bare network, draw an evidence
/// variable among the unforced ones and a value among its unpruned values,
/// forward-check again, then draw the query among the still-unforced
/// variables. Falls back to any non-evidence variable when none is left.
Query random_query(const BayesNet & net, std::uint64_t seed);

} // namespace valelim
