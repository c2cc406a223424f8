#ifndef BENCHFOLD_DIAGNOSTICS_HPP
#define BENCHFOLD_DIAGNOSTICS_HPP

#include "benchfold/multiverse.hpp"
#include "benchfold/unfolding.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace benchfold {

enum class PermutationScheme { within_row, global };

struct PermutationOptions {
    int n_perm = 99;
    std::uint64_t seed = 0;
    PermutationScheme scheme = PermutationScheme::within_row;
    /// Starts per permuted fit; defaults to the observed fit's n_starts.
    std::optional<int> n_starts;
    unsigned threads = 1;
};

struct PermutationResult {
    double p_value = 1.0;
    int n_perm = 0;
    double observed = 0.0;
    std::vector<double> permuted;  // in permutation order
    std::uint64_t seed = 0;
    PermutationScheme scheme = PermutationScheme::within_row;
};

/// p = (1 + #{permuted stress <= observed}) / (n_perm + 1). Permuted fits use
/// the same unfolding options as the observed one (apart from n_starts when
/// overridden). `observed` skips the observed fit when already known.
/// Throws StructuralError if n_perm < 19.
PermutationResult permutation_test(const Matrix& delta, const UnfoldOptions& options, const PermutationOptions& perm,
                                   std::optional<double> observed = std::nullopt);

/// Table shuffled as the permutation test does for permutation `index`.
Matrix permute_table(const Matrix& delta, PermutationScheme scheme, std::uint64_t seed, std::uint64_t index);

struct StressShares {
    std::vector<double> rows;  // percent, one per universe
    std::vector<double> cols;  // percent, one per method
};

/// Share of the weighted squared residual carried by each row and column.
/// A zero total gives uniform shares.
StressShares stress_per_point(const UnfoldingSolution& solution, const Matrix* weights = nullptr);

struct ScreeResult {
    std::map<int, double> stress;  // dim -> penalized stress
    std::vector<std::string> warnings;
};

/// One independent fit per dimension, each with `options` except dim.
/// Increases of more than 5% over the previous dimension become warnings,
/// unless smaller than options.eps in absolute terms.
ScreeResult scree(const Matrix& delta, const UnfoldOptions& options, const std::vector<int>& dims);

struct DefaultDistance {
    Choice choice;
    std::string alternative;  // option key
    std::string context;      // key of the universe holding the default
    double distance = 0.0;
};

/// For each choice, each universe that has the default option for it and each
/// other option of that choice: the distance between the universe's ideal
/// point and that of the universe with the option swapped in. Pairs whose
/// partner universe is absent from the table are skipped. Throws
/// StructuralError if the all-default universe is missing or the solution
/// does not match the table.
std::vector<DefaultDistance> default_option_distances(const UnfoldingSolution& solution, const RankingTable& table,
                                                      const MultiverseConfig& config);

/// Distance between the ideal points of `context` and of `context` with
/// choice `c` set to option `index`. Zero when that is `context` itself.
double option_distance(const UnfoldingSolution& solution, const RankingTable& table, const MultiverseConfig& config,
                       const Universe& context, Choice c, std::size_t index);

struct DiagnosticsReport {
    std::optional<PermutationResult> permutation;
    StressShares spp;
    std::optional<ScreeResult> scree;
    std::vector<DefaultDistance> default_distances;
};

} // namespace benchfold

#endif
