// Independent reference implementations used by the unit and acceptance tests.
// None of these call into the library code they check.
#ifndef BENCHFOLD_TEST_ORACLES_HPP
#define BENCHFOLD_TEST_ORACLES_HPP

#include "benchfold/aggregation.hpp"
#include "benchfold/isotonic.hpp"
#include "benchfold/model.hpp"
#include "benchfold/rng.hpp"
#include "benchfold/unfolding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

// Closed sets of the order on {0..n-1} induced by ranks, as bitmasks.
// primary: a precedes b iff r_a < r_b. secondary: iff r_a <= r_b.
struct ClosedSets {
    std::vector<unsigned> lower, upper;
};

inline bool precedes(double ra, double rb, benchfold::TieRule tie) {
    return tie == benchfold::TieRule::primary ? ra < rb : ra <= rb;
}

inline ClosedSets closed_sets(const std::vector<double>& ranks, benchfold::TieRule tie) {
    const std::size_t n = ranks.size();
    ClosedSets out;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        bool is_lower = true, is_upper = true;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b || !precedes(ranks[a], ranks[b], tie)) continue;
                const bool ina = mask >> a & 1u, inb = mask >> b & 1u;
                if (inb && !ina) is_lower = false;  // b in a lower set needs a
                if (ina && !inb) is_upper = false;  // a in an upper set needs b
            }
        if (is_lower) out.lower.push_back(mask);
        if (is_upper) out.upper.push_back(mask);
    }
    return out;
}

// Weighted isotonic regression by the min-max formula
//   x_i = min over lower sets L containing i of max over upper sets U
//         containing i of the weighted mean of targets on L ∩ U.
inline std::vector<double> isotonic_minmax(const ClosedSets& sets, const std::vector<double>& targets,
                                           const std::vector<double>& weights) {
    const std::size_t n = targets.size();
    const unsigned full = 1u << n;
    std::vector<double> sw(full, 0.0), sx(full, 0.0);
    for (unsigned mask = 1; mask < full; ++mask) {
        const unsigned low = mask & (~mask + 1);
        const auto bit = static_cast<std::size_t>(std::countr_zero(low));
        sw[mask] = sw[mask ^ low] + weights[bit];
        sx[mask] = sx[mask ^ low] + weights[bit] * targets[bit];
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (unsigned L : sets.lower) {
            if (!(L >> i & 1u)) continue;
            double inner = -std::numeric_limits<double>::infinity();
            for (unsigned U : sets.upper) {
                if (!(U >> i & 1u)) continue;
                const unsigned S = L & U;
                inner = std::max(inner, sx[S] / sw[S]);
            }
            best = std::min(best, inner);
        }
        out[i] = best;
    }
    return out;
}

// Mid-rank by counting: 1 + #strictly better + (#tied others) / 2.
template <class Better, class Equal>
std::vector<double> counting_midranks(std::size_t n, Better better, Equal equal) {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
        double above = 0, tied = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            if (better(k, j)) above += 1;
            else if (equal(k, j)) tied += 1;
        }
        r[j] = 1 + above + tied / 2;
    }
    return r;
}

// Reference for the four aggregation rules on integer performance values
// (a fixed-point grid, so every comparison is exact). `rows[l][j]` holds
// dataset l, method j.
inline std::vector<double> aggregate_reference(const std::vector<std::vector<std::int64_t>>& rows, bool lower_better,
                                               benchfold::AggregationKind kind) {
    const std::size_t L = rows.size(), M = rows.front().size();
    auto is_better = [&](std::int64_t a, std::int64_t b) { return lower_better ? a < b : a > b; };
    switch (kind) {
    case benchfold::AggregationKind::mean: {
        std::vector<std::int64_t> sum(M, 0);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < M; ++j) sum[j] += r[j];
        return counting_midranks(M, [&](auto a, auto b) { return is_better(sum[a], sum[b]); },
                                 [&](auto a, auto b) { return sum[a] == sum[b]; });
    }
    case benchfold::AggregationKind::median: {
        // Twice the median keeps even-length medians integral.
        std::vector<std::int64_t> med2(M);
        for (std::size_t j = 0; j < M; ++j) {
            std::vector<std::int64_t> col;
            for (const auto& r : rows) col.push_back(r[j]);
            std::sort(col.begin(), col.end());
            med2[j] = L % 2 ? 2 * col[L / 2] : col[L / 2 - 1] + col[L / 2];
        }
        return counting_midranks(M, [&](auto a, auto b) { return is_better(med2[a], med2[b]); },
                                 [&](auto a, auto b) { return med2[a] == med2[b]; });
    }
    case benchfold::AggregationKind::mean_rank: {
        // Sum of doubled per-row ranks stays integral.
        std::vector<std::int64_t> sum(M, 0);
        for (const auto& r : rows) {
            for (std::size_t j = 0; j < M; ++j) {
                std::int64_t above = 0, tied = 0;
                for (std::size_t k = 0; k < M; ++k) {
                    if (k == j) continue;
                    if (is_better(r[k], r[j])) ++above;
                    else if (r[k] == r[j]) ++tied;
                }
                sum[j] += 2 + 2 * above + tied;
            }
        }
        return counting_midranks(M, [&](auto a, auto b) { return sum[a] < sum[b]; },
                                 [&](auto a, auto b) { return sum[a] == sum[b]; });
    }
    case benchfold::AggregationKind::best005: {
        std::vector<std::int64_t> wins(M, 0), close(M, 0);
        for (const auto& r : rows) {
            std::int64_t best = r[0];
            for (auto x : r)
                if (is_better(x, best)) best = x;
            for (std::size_t j = 0; j < M; ++j) {
                if (r[j] == best) ++wins[j];
                const std::int64_t diff = r[j] > best ? r[j] - best : best - r[j];
                const std::int64_t mag = best < 0 ? -best : best;
                // Within 5% of the best: 20 |x - best| < |best|; exact only when best = 0.
                if (best == 0 ? r[j] == 0 : 20 * diff < mag) ++close[j];
            }
        }
        auto better = [&](std::size_t a, std::size_t b) {
            return wins[a] != wins[b] ? wins[a] > wins[b] : close[a] > close[b];
        };
        return counting_midranks(M, better,
                                 [&](auto a, auto b) { return wins[a] == wins[b] && close[a] == close[b]; });
    }
    }
    return {};
}

// Pearson correlation of the mid-ranks of a and b.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    auto ranks = [n](const std::vector<double>& v) {
        return counting_midranks(n, [&](auto x, auto y) { return v[x] < v[y]; },
                                 [&](auto x, auto y) { return v[x] == v[y]; });
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0 || sbb == 0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Ranks of the distances between K planted ideal points and M planted object
// points drawn from a standard normal in `dim` dimensions.
inline benchfold::Matrix planted_ranks(int K, int M, int dim, std::uint64_t seed) {
    benchfold::Rng rng(seed);
    benchfold::Matrix z1(K, dim), z2(M, dim);
    for (Eigen::Index i = 0; i < z1.size(); ++i) z1.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < z2.size(); ++i) z2.data()[i] = rng.normal();
    benchfold::Matrix out(K, M);
    for (int i = 0; i < K; ++i) {
        std::vector<double> d(static_cast<std::size_t>(M));
        for (int j = 0; j < M; ++j) d[static_cast<std::size_t>(j)] = (z1.row(i) - z2.row(j)).norm();
        const auto r = counting_midranks(d.size(), [&](auto x, auto y) { return d[x] < d[y]; },
                                         [&](auto x, auto y) { return d[x] == d[y]; });
        for (int j = 0; j < M; ++j) out(i, j) = r[static_cast<std::size_t>(j)];
    }
    return out;
}

// Each row an independent uniformly random permutation of 1..M.
inline benchfold::Matrix random_ranks(int K, int M, std::uint64_t seed) {
    benchfold::Rng rng(seed);
    benchfold::Matrix out(K, M);
    std::vector<double> p(static_cast<std::size_t>(M));
    for (int i = 0; i < K; ++i) {
        std::iota(p.begin(), p.end(), 1.0);
        rng.shuffle(std::span<double>(p));
        for (int j = 0; j < M; ++j) out(i, j) = p[static_cast<std::size_t>(j)];
    }
    return out;
}

// Fraction of rows whose fitted distances have Spearman >= threshold with delta.
inline double recovered_fraction(const benchfold::Matrix& delta, const benchfold::Matrix& dist, double threshold) {
    int ok = 0;
    for (Eigen::Index i = 0; i < delta.rows(); ++i) {
        std::vector<double> a(static_cast<std::size_t>(delta.cols())), b(a.size());
        for (Eigen::Index j = 0; j < delta.cols(); ++j) {
            a[static_cast<std::size_t>(j)] = delta(i, j);
            b[static_cast<std::size_t>(j)] = dist(i, j);
        }
        if (spearman(a, b) >= threshold) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(delta.rows());
}

} // namespace oracle

#endif
