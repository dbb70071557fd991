#include "prefine/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "prefine/errors.hpp"

namespace prefine::stats {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double d : v) {
        if (!std::isfinite(d)) throw NonFiniteInput(std::string(what) + " contains a non-finite value");
    }
}

void require_pairs(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_n) {
    if (x.size() != y.size()) throw InvalidArgument("paired samples differ in length");
    if (x.size() < min_n) throw InvalidArgument("need at least " + std::to_string(min_n) + " pairs");
    require_finite(x, "x");
    require_finite(y, "y");
}

// Exact two-sided p over doubled (hence integral) ranks.
double exact_p(const std::vector<long>& ranks2, long w_plus2) {
    const long total = std::accumulate(ranks2.begin(), ranks2.end(), 0L);
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(total) + 1, 0);
    ways[0] = 1;
    long reach = 0;
    for (long r : ranks2) {
        reach += r;
        for (long s = reach; s >= r; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];
    }
    // The null distribution is symmetric, so the lower tail at min(W+, W-)
    // doubled is the two-sided p.
    const long low = std::min(w_plus2, total - w_plus2);
    std::uint64_t tail = 0;
    for (long s = 0; s <= low; ++s) tail += ways[static_cast<std::size_t>(s)];
    const double p = 2.0 * static_cast<double>(tail) / std::ldexp(1.0, static_cast<int>(ranks2.size()));
    return std::min(1.0, p);
}

double normal_p(std::size_t n, double w_plus, const std::vector<double>& abs_sorted) {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1) / 4.0;
    double var = nn * (nn + 1) * (2 * nn + 1) / 24.0;
    for (std::size_t i = 0; i < abs_sorted.size();) {
        std::size_t j = i;
        while (j < abs_sorted.size() && abs_sorted[j] == abs_sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        var -= (t * t * t - t) / 48.0;
        i = j;
    }
    if (var <= 0) return 1.0;
    const double z = std::max(0.0, std::fabs(w_plus - mean) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& values) {
    require_finite(values, "values");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        // Positions i..j-1 hold ranks i+1..j.
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y,
                                    WilcoxonMethod method) {
    require_pairs(x, y, 1);
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    return wilcoxon_signed_rank(d, method);
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs, WilcoxonMethod method) {
    if (diffs.empty()) throw InvalidArgument("need at least one difference");
    require_finite(diffs, "differences");
    std::vector<double> nonzero;
    for (double v : diffs) {
        if (v != 0.0) nonzero.push_back(v);
    }
    WilcoxonResult out;
    out.n_effective = nonzero.size();
    if (nonzero.empty()) {
        out.degenerate_all_zero = true;
        out.exact = true;
        return out;
    }
    std::vector<double> mags(nonzero.size());
    std::transform(nonzero.begin(), nonzero.end(), mags.begin(), [](double v) { return std::fabs(v); });
    const auto ranks = average_ranks(mags);
    long w_plus2 = 0, total2 = 0;
    std::vector<long> ranks2(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        ranks2[i] = std::lround(2 * ranks[i]);
        total2 += ranks2[i];
        if (nonzero[i] > 0) w_plus2 += ranks2[i];
    }
    out.w_plus = static_cast<double>(w_plus2) / 2.0;
    out.w = static_cast<double>(std::min(w_plus2, total2 - w_plus2)) / 2.0;
    out.exact = method == WilcoxonMethod::Exact ||
                (method == WilcoxonMethod::Auto && out.n_effective <= kWilcoxonExactMax);
    if (out.exact) {
        if (out.n_effective > 60) throw InvalidArgument("exact Wilcoxon is limited to 60 nonzero differences");
        out.p = exact_p(ranks2, w_plus2);
    } else {
        std::sort(mags.begin(), mags.end());
        out.p = normal_p(out.n_effective, out.w_plus, mags);
    }
    return out;
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
    require_pairs(x, y, 2);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("correlation needs both samples to vary");
    Correlation c;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    if (x.size() < 3) return c;
    const double df = n - 2;
    if (std::fabs(c.r) >= 1.0) {
        c.p = 0.0;
        return c;
    }
    const double t = c.r * std::sqrt(df / (1 - c.r * c.r));
    boost::math::students_t dist(df);
    c.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
    return c;
}

Correlation spearman(const std::vector<double>& x, const std::vector<double>& y) {
    require_pairs(x, y, 2);
    return pearson(average_ranks(x), average_ranks(y));
}

double kendall(const std::vector<double>& x, const std::vector<double>& y) {
    require_pairs(x, y, 2);
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b]; });

    auto pairs_of = [](std::uint64_t t) { return t * (t - 1) / 2; };
    std::uint64_t tied_x = 0, tied_xy = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && x[idx[j]] == x[idx[i]]) ++j;
        tied_x += pairs_of(j - i);
        for (std::size_t k = i; k < j;) {
            std::size_t l = k;
            while (l < j && y[idx[l]] == y[idx[k]]) ++l;
            tied_xy += pairs_of(l - k);
            k = l;
        }
        i = j;
    }

    // Merge sort on y counts the discordant swaps.
    std::vector<double> ys(n), buf(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo < n; lo += 2 * width) {
            std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
            std::size_t a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (ys[b] < ys[a]) {
                    swaps += mid - a;
                    buf[k++] = ys[b++];
                } else {
                    buf[k++] = ys[a++];
                }
            }
            while (a < mid) buf[k++] = ys[a++];
            while (b < hi) buf[k++] = ys[b++];
        }
        std::swap(ys, buf);
    }
    std::uint64_t tied_y = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && ys[j] == ys[i]) ++j;
        tied_y += pairs_of(j - i);
        i = j;
    }

    const double n0 = static_cast<double>(pairs_of(n));
    const double dx = n0 - static_cast<double>(tied_x);
    const double dy = n0 - static_cast<double>(tied_y);
    if (dx == 0.0 || dy == 0.0) throw ZeroVariance("kendall tau needs both samples to vary");
    // concordant - discordant = n0 - tx - ty + txy - 2 * swaps
    const double s = n0 - static_cast<double>(tied_x) - static_cast<double>(tied_y) +
                     static_cast<double>(tied_xy) - 2.0 * static_cast<double>(swaps);
    return s / std::sqrt(dx * dy);
}

Summary describe(const std::vector<double>& values, Deviation deviation) {
    if (values.empty()) throw InvalidArgument("describe needs at least one value");
    require_finite(values, "values");
    Summary s;
    s.n = values.size();
    const double n = static_cast<double>(s.n);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double denom = deviation == Deviation::Sample ? n - 1 : n;
    s.std = denom > 0 ? std::sqrt(ss / denom) : 0.0;
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const auto mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
    return s;
}

std::vector<double> average_rank(const std::vector<std::vector<int>>& rankings) {
    if (rankings.empty()) throw InvalidArgument("no rankings given");
    const auto m = rankings.front().size();
    if (m == 0) throw NotAPermutation("empty ranking");
    std::vector<double> sums(m, 0.0);
    for (std::size_t r = 0; r < rankings.size(); ++r) {
        const auto& ranking = rankings[r];
        if (ranking.size() != m) throw NotAPermutation("ranking " + std::to_string(r) + " has the wrong length");
        std::set<int> seen(ranking.begin(), ranking.end());
        if (seen.size() != m || *seen.begin() != 1 || *seen.rbegin() != static_cast<int>(m)) {
            throw NotAPermutation("ranking " + std::to_string(r) + " is not a permutation of 1.." +
                                  std::to_string(m));
        }
        for (std::size_t i = 0; i < m; ++i) sums[i] += ranking[i];
    }
    for (auto& s : sums) s /= static_cast<double>(rankings.size());
    return sums;
}

LengthBiasResult length_bias_subset(const std::vector<LengthPair>& pairs, long max_delta) {
    if (max_delta < 0) throw InvalidArgument("max_delta must be non-negative");
    auto rate = [&](const std::vector<std::size_t>& idx) -> std::optional<double> {
        if (idx.empty()) return std::nullopt;
        double points = 0;
        for (auto i : idx) {
            auto v = pairs[i].verdict;
            points += v == judge::Corrected::AWins ? 1.0 : v == judge::Corrected::Tie ? 0.5 : 0.0;
        }
        return points / static_cast<double>(idx.size());
    };
    LengthBiasResult out;
    std::vector<std::size_t> all(pairs.size());
    std::iota(all.begin(), all.end(), 0);
    for (auto i : all) {
        if (std::labs(pairs[i].tokens_a - pairs[i].tokens_b) <= max_delta) out.kept.push_back(i);
    }
    out.kept_fraction = pairs.empty() ? 0.0 : static_cast<double>(out.kept.size()) / static_cast<double>(pairs.size());
    out.win_rate = rate(out.kept);
    out.full_win_rate = rate(all);
    out.empty_subset = out.kept.empty();
    return out;
}

}  // namespace prefine::stats
