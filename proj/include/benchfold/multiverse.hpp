#ifndef BENCHFOLD_MULTIVERSE_HPP
#define BENCHFOLD_MULTIVERSE_HPP

#include "benchfold/aggregation.hpp"
#include "benchfold/imputation.hpp"
#include "benchfold/model.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace benchfold {

enum class Characteristic { clin, n, n_eff, p };
enum class Side { below, at_or_above };

struct DatasetFilter {
    enum class Kind { all, median_split } kind = Kind::all;
    Characteristic characteristic = Characteristic::n;
    Side side = Side::below;

    /// "all", or "<characteristic>:below" / "<characteristic>:at_or_above".
    std::string key() const;
    friend bool operator==(const DatasetFilter&, const DatasetFilter&) = default;
};

DatasetFilter filter_from_key(std::string_view key);

/// Keeps the datasets selected by `filter`. Median splits use the median of the
/// characteristic over the full input list: `below` keeps values strictly
/// below it, `at_or_above` the rest.
std::vector<std::size_t> apply_filter(const std::vector<DatasetMeta>& datasets, const DatasetFilter& filter);

enum class Choice { datasets, measure, imputation, aggregation };

std::string_view to_string(Choice c);
Choice choice_from_string(std::string_view s);

struct Universe {
    DatasetFilter filter;
    std::string measure;
    ImputationStrategy imputation;
    AggregationStrategy aggregation;

    /// "filter|measure|imputation|aggregation"
    std::string key() const;
    std::string option_key(Choice c) const;
    friend bool operator==(const Universe&, const Universe&) = default;
};

struct MultiverseConfig {
    std::vector<DatasetFilter> filters;
    std::vector<std::string> measures;
    std::vector<ImputationStrategy> imputations;
    std::vector<AggregationStrategy> aggregations;
    Universe defaults;
    std::array<Choice, 4> stepwise_order{Choice::imputation, Choice::aggregation, Choice::measure, Choice::datasets};

    std::size_t num_options(Choice c) const;
    /// Copy of `u` with choice `c` set to option number `index`.
    Universe with_option(const Universe& u, Choice c, std::size_t index) const;
};

/// Empty list if the config is consistent, else human-readable problems.
std::vector<std::string> check_config(const MultiverseConfig& config);

/// Cartesian product, filters outermost, then measures, imputations, aggregations.
std::vector<Universe> enumerate_universes(const MultiverseConfig& config);

/// Imputed L x M performance matrix for the given datasets.
PerfMatrix build_matrix(const PerformanceTensor& tensor, std::span<const std::size_t> datasets,
                        std::string_view measure, const ImputationStrategy& imputation);

/// Throws DataError if the filter leaves no datasets.
Ranking evaluate_universe(const PerformanceTensor& tensor, const Universe& u);

/// Ranking on an explicit dataset subset; `u.filter` is ignored.
Ranking evaluate_on_datasets(const PerformanceTensor& tensor, std::span<const std::size_t> datasets, const Universe& u);

struct RankingTable {
    std::vector<std::string> methods;
    std::vector<Universe> universes;
    std::vector<Ranking> rows;
    std::vector<std::string> warnings;

    std::size_t size() const { return rows.size(); }
    /// Row index of `u`, if present.
    std::optional<std::size_t> find(const Universe& u) const;
};

/// Evaluates every universe; universes emptied by filtering are omitted with a
/// warning. Rows keep enumeration order regardless of `threads`.
RankingTable run_multiverse(const PerformanceTensor& tensor, const MultiverseConfig& config, unsigned threads = 1);

struct RankDistribution {
    std::string method;
    std::map<double, int> counts;
    double min_rank = 0.0;
    double max_rank = 0.0;
};

std::vector<RankDistribution> rank_distribution(const RankingTable& table);

struct StepRecord {
    Choice choice;
    std::string option;
    double rank = 0.0;
    double score = 0.0;
    bool improved = false;
};

struct Trajectory {
    std::string method;
    Universe start;
    double start_rank = 0.0;
    double start_score = 0.0;
    std::vector<StepRecord> steps;
    Universe final_universe;
    double final_rank = 0.0;
};

/// The target's imputed performance averaged over the universe's datasets, on
/// a scale where 0 is the measure's best value and 1 its random value. Used as
/// the tie-breaker between options reaching the same rank.
double performance_gap(const PerformanceTensor& tensor, const Universe& u, std::string_view method);

/// Greedy per-choice search for the option giving `method` the smallest rank.
/// Rank ties are broken by performance_gap, then by keeping the incumbent.
Trajectory stepwise_optimize(const PerformanceTensor& tensor, const MultiverseConfig& config, std::string_view method);

/// Prefixes of seeded random permutations of [0, L): for each permutation the
/// first l indices for l = 1..L-1, deduplicated as sets, followed by the full
/// set. Groups are sorted index lists in order of first appearance.
std::vector<std::vector<std::size_t>> sample_prefix_groups(std::size_t num_datasets, std::size_t n_perms,
                                                           std::uint64_t seed);

} // namespace benchfold

#endif
