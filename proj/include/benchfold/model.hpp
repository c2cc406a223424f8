#ifndef BENCHFOLD_MODEL_HPP
#define BENCHFOLD_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace benchfold {

enum class Orientation { lower_better, higher_better };

std::string_view to_string(Orientation o);
Orientation orientation_from_string(std::string_view s);

struct MeasureSpec {
    std::string id;
    Orientation orientation = Orientation::lower_better;
    double random_value = 0.0;
    double best_value = 0.0;

    /// True if `a` is strictly better than `b` under this measure.
    bool better(double a, double b) const {
        return orientation == Orientation::lower_better ? a < b : a > b;
    }
};

struct DatasetMeta {
    std::string id;
    std::int64_t clin = 0;  // clinical variables
    std::int64_t n = 1;     // observations
    std::int64_t n_eff = 0; // effective cases (events)
    std::int64_t p = 1;     // variables
};

/// Iteration slots of one (dataset, method, measure) cell; nullopt marks a failed iteration.
using Cell = std::vector<std::optional<double>>;
using CellView = std::span<const std::optional<double>>;

/// Iteration-level benchmark results. Cells are stored densely in
/// dataset-major, then method, then measure order; a cell with zero slots is
/// "not present".
class PerformanceTensor {
public:
    PerformanceTensor() = default;
    PerformanceTensor(std::vector<DatasetMeta> datasets, std::vector<std::string> methods,
                      std::vector<MeasureSpec> measures, std::vector<Cell> cells);

    const std::vector<DatasetMeta>& datasets() const { return datasets_; }
    const std::vector<std::string>& methods() const { return methods_; }
    const std::vector<MeasureSpec>& measures() const { return measures_; }

    std::size_t num_datasets() const { return datasets_.size(); }
    std::size_t num_methods() const { return methods_.size(); }
    std::size_t num_measures() const { return measures_.size(); }

    CellView cell(std::size_t dataset, std::size_t method, std::size_t measure) const;

    std::optional<std::size_t> dataset_index(std::string_view id) const;
    std::optional<std::size_t> method_index(std::string_view id) const;
    std::optional<std::size_t> measure_index(std::string_view id) const;

    /// Throws StructuralError for unknown ids.
    const MeasureSpec& measure(std::string_view id) const;

private:
    std::size_t flat(std::size_t d, std::size_t m, std::size_t q) const {
        return (d * methods_.size() + m) * measures_.size() + q;
    }

    std::vector<DatasetMeta> datasets_;
    std::vector<std::string> methods_;
    std::vector<MeasureSpec> measures_;
    std::vector<Cell> cells_;
};

/// Mid-ranks of methods; rank 1 is best.
struct Ranking {
    std::vector<std::string> methods;
    std::vector<double> ranks;

    double rank_of(std::string_view method) const;
};

struct Violation {
    std::string where;
    std::string message;
};

std::vector<Violation> validate_measure(const MeasureSpec& m);
std::vector<Violation> validate_tensor(const PerformanceTensor& tensor);

/// True if `r` is a mid-rank vector: entries in [1, M] summing to M(M+1)/2.
bool is_valid_midrank(std::span<const double> r);

} // namespace benchfold

#endif
