#ifndef BENCHFOLD_AGGREGATION_HPP
#define BENCHFOLD_AGGREGATION_HPP

#include "benchfold/model.hpp"

#include <string>
#include <vector>

namespace benchfold {

enum class AggregationKind { mean, median, mean_rank, best005 };

struct AggregationStrategy {
    AggregationKind kind = AggregationKind::mean;
    /// Relative distance to the row best that still counts as "close" (best005 only).
    double environment = 0.05;

    std::string key() const;
    friend bool operator==(const AggregationStrategy&, const AggregationStrategy&) = default;
};

/// Parses "mean", "median", "mean_rank", "best005", "best005:0.1".
AggregationStrategy aggregation_from_key(std::string_view key);

/// L x M matrix of imputed per-dataset performance, row-major (one row per dataset).
struct PerfMatrix {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    MeasureSpec measure;
    std::vector<double> values;

    std::size_t rows() const { return datasets.size(); }
    std::size_t cols() const { return methods.size(); }
    double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
};

enum class Better { smaller, larger };

inline Better better_for(Orientation o) {
    return o == Orientation::lower_better ? Better::smaller : Better::larger;
}

/// Mid-ranks of `scores` (ties share the average of the ranks they span).
/// Throws StructuralError for fewer than two scores or non-finite values.
std::vector<double> midranks(std::span<const double> scores, Better better);

Ranking rank_from_scores(const std::vector<std::string>& methods, std::span<const double> scores, Better better);

/// Scores that `aggregate` ranks on, one per method. For best005 the
/// primary (win count) and secondary (environment count) are returned in
/// `secondary` as well; for the other strategies `secondary` stays empty.
struct AggregateScores {
    std::vector<double> primary;
    std::vector<double> secondary;
    Better better = Better::smaller;
};

AggregateScores aggregate_scores(const PerfMatrix& matrix, const AggregationStrategy& strategy);

Ranking aggregate(const PerfMatrix& matrix, const AggregationStrategy& strategy);

} // namespace benchfold

#endif
