#pragma once

#include <cstdint>
#include <vector>

#include "prefine/stats/stats.hpp"

// Brute-force references for the statistics module. Deliberately naive and
// sharing no code with the library.
namespace prefine::testing {

// Two-sided Wilcoxon p by enumerating all 2^n sign assignments of the
// nonzero differences: the share of assignments whose positive rank sum is
// at least as far from its mean as the observed one.
double wilcoxon_enumeration_p(const std::vector<double>& diffs);

// Tau-b from explicit concordant/discordant pair counts.
double kendall_pair_count(const std::vector<double>& x, const std::vector<double>& y);

struct PlantedLengthBias {
    std::vector<stats::LengthPair> pairs;
    double true_rate = 0.0;  // A's win probability when lengths are close
};

// Half the pairs have |delta| <= 10 and follow `true_rate`; the rest have
// |delta| in [20, 60], A is the longer story 80% of the time and the longer
// story always wins.
PlantedLengthBias planted_length_bias(std::size_t n, double true_rate, std::uint64_t seed);

}  // namespace prefine::testing
