#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "prefine/judge/verdicts.hpp"

// Pure functions; safe to call concurrently. Inputs containing NaN or
// infinities raise NonFiniteInput.
namespace prefine::stats {

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
    double w = 0.0;        // min(W+, W-)
    double w_plus = 0.0;   // rank sum of positive differences
    double p = 1.0;        // two-sided
    std::size_t n_effective = 0;
    bool exact = false;
    bool degenerate_all_zero = false;
};

inline constexpr std::size_t kWilcoxonExactMax = 20;

// Zero differences are dropped; tied |d| share their average rank. Auto
// uses the exact null distribution up to kWilcoxonExactMax nonzero
// differences and the tie- and continuity-corrected normal beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, WilcoxonMethod method = WilcoxonMethod::Auto);

struct Correlation {
    double r = 0.0;
    double p = 1.0;  // two-sided, Student t with n - 2 df; 1 when n < 3
};

// Throws InvalidArgument for n < 2 or unequal lengths, ZeroVariance when
// either side is constant (after ranking, for the rank statistics).
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);
Correlation spearman(const std::vector<double>& x, const std::vector<double>& y);
// Tau-b, O(n log n).
double kendall(const std::vector<double>& x, const std::vector<double>& y);

// 1-based ranks, ties get their average rank.
std::vector<double> average_ranks(const std::vector<double>& values);

enum class Deviation { Sample, Population };

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;  // 0 for a single sample
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
};

Summary describe(const std::vector<double>& values, Deviation deviation = Deviation::Sample);

// Each ranking lists the rank (1..m) given to method i. Returns the mean
// rank per method. Throws NotAPermutation.
std::vector<double> average_rank(const std::vector<std::vector<int>>& rankings);

struct LengthPair {
    long tokens_a = 0;
    long tokens_b = 0;
    judge::Corrected verdict = judge::Corrected::Tie;
};

struct LengthBiasResult {
    std::vector<std::size_t> kept;  // indices into the input
    double kept_fraction = 0.0;
    std::optional<double> win_rate;  // A's rate on the subset, ties half
    std::optional<double> full_win_rate;
    bool empty_subset = false;
};

// Keeps pairs with |tokens_a - tokens_b| <= max_delta.
LengthBiasResult length_bias_subset(const std::vector<LengthPair>& pairs, long max_delta = 10);

}  // namespace prefine::stats
