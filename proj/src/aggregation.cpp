#include "benchfold/aggregation.hpp"

#include "benchfold/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

namespace benchfold {

std::string AggregationStrategy::key() const {
    switch (kind) {
    case AggregationKind::mean: return "mean";
    case AggregationKind::median: return "median";
    case AggregationKind::mean_rank: return "mean_rank";
    case AggregationKind::best005:
        return environment == 0.05 ? "best005" : fmt::format("best005:{}", environment);
    }
    return {};
}

AggregationStrategy aggregation_from_key(std::string_view key) {
    if (key == "mean") return {AggregationKind::mean};
    if (key == "median") return {AggregationKind::median};
    if (key == "mean_rank") return {AggregationKind::mean_rank};
    if (key.starts_with("best005")) {
        AggregationStrategy s{AggregationKind::best005, 0.05};
        auto rest = key.substr(7);
        if (!rest.empty()) {
            if (rest.front() != ':') throw DataError(fmt::format("unknown aggregation '{}'", key));
            rest.remove_prefix(1);
            auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), s.environment);
            if (ec != std::errc{} || ptr != rest.data() + rest.size())
                throw DataError(fmt::format("bad environment in '{}'", key));
        }
        if (!(s.environment > 0.0)) throw DataError("best005 environment must be positive");
        return s;
    }
    throw DataError(fmt::format("unknown aggregation '{}'", key));
}

namespace {

// Mid-ranks for an arbitrary strict weak order given by `less` (less = better).
template <class Less>
std::vector<double> midranks_by(std::size_t n, Less less) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), less);
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && !less(order[i], order[j])) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
        i = j;
    }
    return ranks;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

void check_matrix(const PerfMatrix& m) {
    if (m.rows() < 1) throw StructuralError("aggregate: matrix has no datasets");
    if (m.cols() < 2) throw StructuralError("aggregate: need at least two methods");
    if (m.values.size() != m.rows() * m.cols()) throw StructuralError("aggregate: values do not match shape");
    for (double v : m.values)
        if (!std::isfinite(v)) throw StructuralError("aggregate: non-finite performance value");
}

} // namespace

std::vector<double> midranks(std::span<const double> scores, Better better) {
    if (scores.size() < 2) throw StructuralError("rank_from_scores: need at least two scores");
    for (double s : scores)
        if (!std::isfinite(s)) throw StructuralError("rank_from_scores: non-finite score");
    if (better == Better::smaller)
        return midranks_by(scores.size(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    return midranks_by(scores.size(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
}

Ranking rank_from_scores(const std::vector<std::string>& methods, std::span<const double> scores, Better better) {
    if (methods.size() != scores.size()) throw StructuralError("rank_from_scores: ids and scores differ in length");
    return Ranking{methods, midranks(scores, better)};
}

AggregateScores aggregate_scores(const PerfMatrix& m, const AggregationStrategy& strategy) {
    check_matrix(m);
    const std::size_t L = m.rows(), M = m.cols();
    AggregateScores out;
    out.primary.assign(M, 0.0);

    switch (strategy.kind) {
    case AggregationKind::mean:
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t j = 0; j < M; ++j) out.primary[j] += m.at(l, j);
        for (auto& s : out.primary) s /= static_cast<double>(L);
        out.better = better_for(m.measure.orientation);
        break;
    case AggregationKind::median:
        for (std::size_t j = 0; j < M; ++j) {
            std::vector<double> col(L);
            for (std::size_t l = 0; l < L; ++l) col[l] = m.at(l, j);
            out.primary[j] = median_of(std::move(col));
        }
        out.better = better_for(m.measure.orientation);
        break;
    case AggregationKind::mean_rank: {
        const Better b = better_for(m.measure.orientation);
        for (std::size_t l = 0; l < L; ++l) {
            auto r = midranks(std::span<const double>(m.values).subspan(l * M, M), b);
            for (std::size_t j = 0; j < M; ++j) out.primary[j] += r[j];
        }
        for (auto& s : out.primary) s /= static_cast<double>(L);
        out.better = Better::smaller;
        break;
    }
    case AggregationKind::best005: {
        out.secondary.assign(M, 0.0);
        for (std::size_t l = 0; l < L; ++l) {
            double best = m.at(l, 0);
            for (std::size_t j = 1; j < M; ++j)
                if (m.measure.better(m.at(l, j), best)) best = m.at(l, j);
            for (std::size_t j = 0; j < M; ++j) {
                const double x = m.at(l, j);
                if (x == best) out.primary[j] += 1.0;
                const bool close = best == 0.0 ? x == 0.0 : std::abs(x - best) / std::abs(best) < strategy.environment;
                if (close) out.secondary[j] += 1.0;
            }
        }
        out.better = Better::larger;
        break;
    }
    }
    return out;
}

Ranking aggregate(const PerfMatrix& m, const AggregationStrategy& strategy) {
    auto s = aggregate_scores(m, strategy);
    if (strategy.kind != AggregationKind::best005) return rank_from_scores(m.methods, s.primary, s.better);

    const auto& wins = s.primary;
    const auto& close = s.secondary;
    auto ranks = midranks_by(m.cols(), [&](std::size_t a, std::size_t b) {
        if (wins[a] != wins[b]) return wins[a] > wins[b];
        return close[a] > close[b];
    });
    return Ranking{m.methods, std::move(ranks)};
}

} // namespace benchfold
