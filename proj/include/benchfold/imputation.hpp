#ifndef BENCHFOLD_IMPUTATION_HPP
#define BENCHFOLD_IMPUTATION_HPP

#include "benchfold/model.hpp"

#include <string>

namespace benchfold {

enum class ImputationKind { threshold20, weighted, random_prediction, mean_nonfailed };

struct ImputationStrategy {
    ImputationKind kind = ImputationKind::threshold20;
    /// Failure proportion at or above which threshold20 falls back to the random value.
    double threshold = 0.2;

    std::string key() const;
    friend bool operator==(const ImputationStrategy&, const ImputationStrategy&) = default;
};

/// Parses "threshold20", "threshold20:0.3", "weighted", "random_prediction", "mean_nonfailed".
ImputationStrategy imputation_from_key(std::string_view key);

/// Proportion of failed slots. Throws StructuralError on an empty cell.
double failure_proportion(CellView cell);

/// Mean of the present slots in input order; nullopt if every slot failed.
std::optional<double> present_mean(CellView cell);

/// Collapse one cell's iterations into a single performance value.
///
/// A cell without failures always yields its plain mean. Otherwise:
///   mean_nonfailed     present mean (random value if all failed)
///   random_prediction  random value
///   threshold20        present mean if r < threshold, else random value
///   weighted           random value moved toward the present mean by (1 - r),
///                      only when the present mean beats the random value
double impute_cell(CellView cell, const MeasureSpec& measure, const ImputationStrategy& strategy);

} // namespace benchfold

#endif
