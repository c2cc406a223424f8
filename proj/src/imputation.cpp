#include "benchfold/imputation.hpp"

#include "benchfold/errors.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/core.h>

namespace benchfold {

std::string ImputationStrategy::key() const {
    switch (kind) {
    case ImputationKind::threshold20:
        return threshold == 0.2 ? "threshold20" : fmt::format("threshold20:{}", threshold);
    case ImputationKind::weighted: return "weighted";
    case ImputationKind::random_prediction: return "random_prediction";
    case ImputationKind::mean_nonfailed: return "mean_nonfailed";
    }
    return {};
}

ImputationStrategy imputation_from_key(std::string_view key) {
    if (key == "weighted") return {ImputationKind::weighted};
    if (key == "random_prediction") return {ImputationKind::random_prediction};
    if (key == "mean_nonfailed") return {ImputationKind::mean_nonfailed};
    if (key.starts_with("threshold20")) {
        ImputationStrategy s{ImputationKind::threshold20, 0.2};
        auto rest = key.substr(11);
        if (!rest.empty()) {
            if (rest.front() != ':') throw DataError(fmt::format("unknown imputation '{}'", key));
            rest.remove_prefix(1);
            auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), s.threshold);
            if (ec != std::errc{} || ptr != rest.data() + rest.size())
                throw DataError(fmt::format("bad threshold in '{}'", key));
        }
        if (!(s.threshold > 0.0 && s.threshold <= 1.0))
            throw DataError(fmt::format("threshold must lie in (0, 1], got {}", s.threshold));
        return s;
    }
    throw DataError(fmt::format("unknown imputation '{}'", key));
}

double failure_proportion(CellView cell) {
    if (cell.empty()) throw StructuralError("failure_proportion: empty cell");
    auto failed = std::count_if(cell.begin(), cell.end(), [](const auto& v) { return !v.has_value(); });
    return static_cast<double>(failed) / static_cast<double>(cell.size());
}

std::optional<double> present_mean(CellView cell) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : cell) {
        if (!v) continue;
        sum += *v;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

double impute_cell(CellView cell, const MeasureSpec& measure, const ImputationStrategy& strategy) {
    if (cell.empty()) throw StructuralError("impute_cell: empty cell");
    const double r = failure_proportion(cell);
    const auto mean = present_mean(cell);
    const double random = measure.random_value;
    if (r == 0.0) return *mean;
    if (!mean) return random;

    switch (strategy.kind) {
    case ImputationKind::mean_nonfailed: return *mean;
    case ImputationKind::random_prediction: return random;
    case ImputationKind::threshold20: return r < strategy.threshold ? *mean : random;
    case ImputationKind::weighted:
        if (measure.orientation == Orientation::lower_better)
            return random - std::max(random - *mean, 0.0) * (1.0 - r);
        return random + std::max(*mean - random, 0.0) * (1.0 - r);
    }
    return random;
}

} // namespace benchfold
