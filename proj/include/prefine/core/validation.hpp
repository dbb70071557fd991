#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "prefine/core/types.hpp"

namespace prefine {

// Expected history sizes: one pairwise choice per PerDOC user, four rated
// synopses per PerMPST user.
struct ArityConfig {
    std::size_t perdoc_interactions = 1;
    std::size_t permpst_interactions = 4;
};

// Returns one human-readable line per violated invariant; empty when the
// history is valid for `dataset`. Never throws.
std::vector<std::string> validate_history(const UserHistory& history, Dataset dataset,
                                          const ArityConfig& arity = {});

}  // namespace prefine
