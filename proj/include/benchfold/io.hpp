#ifndef BENCHFOLD_IO_HPP
#define BENCHFOLD_IO_HPP

#include "benchfold/diagnostics.hpp"
#include "benchfold/model.hpp"
#include "benchfold/multiverse.hpp"
#include "benchfold/unfolding.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace benchfold {

/// Contents of a long-format results file
/// `dataset_id,method_id,measure_id,iteration,value`. Ids keep the order of
/// first appearance.
struct ResultsFile {
    using Key = std::tuple<std::string, std::string, std::string>;  // dataset, method, measure
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::string> measures;
    std::map<Key, Cell> cells;
};

/// Throws DataError naming `origin` and the line for malformed rows, duplicate
/// keys, non-numeric values, non-contiguous iterations and iteration counts
/// that differ across measures of the same dataset and method.
ResultsFile parse_results_text(std::string_view text, std::string_view origin);
ResultsFile parse_results(const std::filesystem::path& path);

/// `dataset_id,clin,n,n_eff,p`
std::vector<DatasetMeta> parse_datasets_text(std::string_view text, std::string_view origin);
std::vector<DatasetMeta> parse_datasets(const std::filesystem::path& path);

/// Dataset order follows `datasets`, methods follow the results file, measures
/// follow `measures`. Throws DataError for ids that do not resolve. Cells
/// absent from the file stay empty (validate_tensor reports them).
PerformanceTensor build_tensor(const ResultsFile& results, const std::vector<DatasetMeta>& datasets,
                               const std::vector<MeasureSpec>& measures);

std::string format_results(const PerformanceTensor& tensor);

struct DiagnosticsSettings {
    int permutations = 99;
    std::optional<std::uint64_t> seed;
    std::optional<int> permutation_starts;
    PermutationScheme scheme = PermutationScheme::within_row;
    std::vector<int> scree_dims;  // empty: 1 .. min(M, 5)
};

struct SamplingSettings {
    int permutations = 50;
    std::optional<std::uint64_t> seed;
};

struct StudyConfig {
    std::vector<MeasureSpec> measures;
    MultiverseConfig multiverse;
    UnfoldOptions unfold;
    bool unfold_seed_set = false;
    DiagnosticsSettings diagnostics;
    SamplingSettings sampling;
    /// Input paths, resolved against the config file's directory.
    std::optional<std::filesystem::path> results;
    std::optional<std::filesystem::path> datasets;
};

/// JSON config; the schema is documented in docs/formats.md. Unknown keys
/// and invalid values raise DataError with the path to the field.
StudyConfig parse_config_text(std::string_view text, std::string_view origin,
                              const std::filesystem::path& base_dir = {});
StudyConfig parse_config(const std::filesystem::path& path);

/// `%.17g`, with "nan"/"inf" spelled out.
std::string format_double(double x);

struct SampledRanking {
    std::vector<std::size_t> datasets;
    Ranking ranking;
};

/// Everything a run may produce. Only the parts that are set are written.
struct RunOutputs {
    const RankingTable* table = nullptr;
    const MultiverseConfig* config = nullptr;
    const UnfoldingSolution* solution = nullptr;
    const DiagnosticsReport* diagnostics = nullptr;
    const std::vector<Trajectory>* trajectories = nullptr;
    const std::vector<SampledRanking>* samples = nullptr;
    const PerformanceTensor* tensor = nullptr;  // dataset ids for samples
};

struct ManifestEntry {
    std::string name;
    std::uintmax_t bytes = 0;
    std::string sha256;
};

/// Writes rankings.csv, unfolding.json, diagnostics.json, distances.csv,
/// stepwise.json and samples.csv as available, then manifest.json listing
/// every file written. Output bytes depend only on the inputs. Throws
/// DataError naming the path on I/O failure.
std::vector<ManifestEntry> write_outputs(const std::filesystem::path& dir, const RunOutputs& outputs);

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

} // namespace benchfold

#endif
