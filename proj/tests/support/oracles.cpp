#include "oracles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace prefine::testing {

double wilcoxon_enumeration_p(const std::vector<double>& diffs) {
    std::vector<double> d;
    for (double v : diffs) {
        if (v != 0.0) d.push_back(v);
    }
    const std::size_t n = d.size();
    if (n == 0) return 1.0;
    if (n > 24) throw std::invalid_argument("enumeration oracle is limited to 24 differences");
    // Doubled average rank: 2 * (less + 1) + (equal - 1).
    std::vector<long> rank2(n);
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        long less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::fabs(d[j]) < std::fabs(d[i])) ++less;
            if (std::fabs(d[j]) == std::fabs(d[i])) ++equal;
        }
        rank2[i] = 2 * (less + 1) + (equal - 1);
        total += rank2[i];
    }
    long observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] > 0) observed += rank2[i];
    }
    // Compare 2 * T+ - total against the observed distance, all integers.
    const long dist = std::labs(2 * observed - total);
    std::uint64_t extreme = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        long t = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1) t += rank2[i];
        }
        if (std::labs(2 * t - total) >= dist) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(std::uint64_t{1} << n);
}

double kendall_pair_count(const std::vector<double>& x, const std::vector<double>& y) {
    long concordant = 0, discordant = 0, only_x = 0, only_y = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0 && dy == 0) continue;
            if (dx == 0) ++only_x;
            else if (dy == 0) ++only_y;
            else if ((dx > 0) == (dy > 0)) ++concordant;
            else ++discordant;
        }
    }
    const double base = static_cast<double>(concordant + discordant);
    return static_cast<double>(concordant - discordant) /
           std::sqrt((base + static_cast<double>(only_x)) * (base + static_cast<double>(only_y)));
}

PlantedLengthBias planted_length_bias(std::size_t n, double true_rate, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto between = [&](long lo, long hi) { return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    PlantedLengthBias out;
    out.true_rate = true_rate;
    for (std::size_t i = 0; i < n; ++i) {
        stats::LengthPair p;
        p.tokens_a = between(480, 560);
        if (i % 2 == 0) {
            p.tokens_b = p.tokens_a + between(-10, 10);
            p.verdict = uniform() < true_rate ? judge::Corrected::AWins : judge::Corrected::BWins;
        } else {
            const long gap = between(20, 60);
            const bool a_longer = uniform() < 0.8;
            p.tokens_b = a_longer ? p.tokens_a - gap : p.tokens_a + gap;
            p.verdict = a_longer ? judge::Corrected::AWins : judge::Corrected::BWins;
        }
        out.pairs.push_back(p);
    }
    return out;
}

}  // namespace prefine::testing
