#include "benchfold/diagnostics.hpp"

#include "benchfold/errors.hpp"
#include "benchfold/parallel.hpp"
#include "benchfold/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <unordered_map>

namespace benchfold {

Matrix permute_table(const Matrix& delta, PermutationScheme scheme, std::uint64_t seed, std::uint64_t index) {
    Rng rng(derive_seed(seed, index));
    Matrix out = delta;
    if (scheme == PermutationScheme::global) {
        rng.shuffle(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
        return out;
    }
    std::vector<double> row(static_cast<std::size_t>(delta.cols()));
    for (Eigen::Index i = 0; i < delta.rows(); ++i) {
        for (Eigen::Index j = 0; j < delta.cols(); ++j) row[static_cast<std::size_t>(j)] = delta(i, j);
        rng.shuffle(std::span<double>(row));
        for (Eigen::Index j = 0; j < delta.cols(); ++j) out(i, j) = row[static_cast<std::size_t>(j)];
    }
    return out;
}

PermutationResult permutation_test(const Matrix& delta, const UnfoldOptions& options, const PermutationOptions& perm,
                                   std::optional<double> observed) {
    if (perm.n_perm < 19) throw StructuralError(fmt::format("permutation_test: n_perm must be at least 19, got {}", perm.n_perm));
    if (perm.n_starts && *perm.n_starts < 1) throw StructuralError("permutation_test: n_starts must be positive");

    PermutationResult out;
    out.n_perm = perm.n_perm;
    out.seed = perm.seed;
    out.scheme = perm.scheme;
    if (observed) {
        out.observed = *observed;
    } else {
        UnfoldOptions o = options;
        o.threads = perm.threads;
        o.record_history = false;
        out.observed = fit(delta, o).stress_penalized;
    }

    UnfoldOptions o = options;
    o.threads = 1;
    o.record_history = false;
    if (perm.n_starts) o.n_starts = *perm.n_starts;

    out.permuted.assign(static_cast<std::size_t>(perm.n_perm), 0.0);
    parallel_for(out.permuted.size(), perm.threads, [&](std::size_t k) {
        const Matrix shuffled = permute_table(delta, perm.scheme, perm.seed, k);
        out.permuted[k] = fit(shuffled, o).stress_penalized;
    });

    const auto hits = std::count_if(out.permuted.begin(), out.permuted.end(),
                                    [&](double v) { return v <= out.observed; });
    out.p_value = static_cast<double>(1 + hits) / static_cast<double>(perm.n_perm + 1);
    return out;
}

StressShares stress_per_point(const UnfoldingSolution& solution, const Matrix* weights) {
    const Matrix& dhat = solution.disparities;
    const Matrix& d = solution.distances;
    if (dhat.rows() != d.rows() || dhat.cols() != d.cols())
        throw StructuralError("stress_per_point: disparities and distances differ in shape");
    if (weights && (weights->rows() != d.rows() || weights->cols() != d.cols()))
        throw StructuralError("stress_per_point: weights have the wrong shape");

    Matrix r = (dhat - d).array().square().matrix();
    if (weights) r = r.cwiseProduct(*weights);
    const double total = r.sum();

    StressShares out;
    out.rows.resize(static_cast<std::size_t>(r.rows()));
    out.cols.resize(static_cast<std::size_t>(r.cols()));
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        out.rows[static_cast<std::size_t>(i)] =
            total > 0.0 ? 100.0 * r.row(i).sum() / total : 100.0 / static_cast<double>(r.rows());
    for (Eigen::Index j = 0; j < r.cols(); ++j)
        out.cols[static_cast<std::size_t>(j)] =
            total > 0.0 ? 100.0 * r.col(j).sum() / total : 100.0 / static_cast<double>(r.cols());
    return out;
}

ScreeResult scree(const Matrix& delta, const UnfoldOptions& options, const std::vector<int>& dims) {
    for (int dim : dims)
        if (dim < 1 || dim > delta.cols())
            throw StructuralError(fmt::format("scree: dimension {} outside [1, {}]", dim, delta.cols()));

    std::vector<double> values(dims.size());
    UnfoldOptions o = options;
    o.threads = 1;
    o.record_history = false;
    parallel_for(dims.size(), options.threads, [&](std::size_t i) {
        UnfoldOptions oi = o;
        oi.dim = dims[i];
        values[i] = fit(delta, oi).stress_penalized;
    });

    ScreeResult out;
    for (std::size_t i = 0; i < dims.size(); ++i) out.stress[dims[i]] = values[i];
    std::optional<std::pair<int, double>> prev;
    for (const auto& [dim, value] : out.stress) {
        if (prev && value > prev->second * 1.05 && value - prev->second > options.eps)
            out.warnings.push_back(fmt::format("scree: stress rises from {:.6g} at dim {} to {:.6g} at dim {}",
                                               prev->second, prev->first, value, dim));
        prev = {dim, value};
    }
    return out;
}

namespace {

void check_solution(const UnfoldingSolution& solution, const RankingTable& table) {
    if (static_cast<std::size_t>(solution.ideal.rows()) != table.size())
        throw StructuralError(fmt::format("default_option_distances: solution has {} ideal points for {} universes",
                                          solution.ideal.rows(), table.size()));
}

std::unordered_map<std::string, std::size_t> index_by_key(const RankingTable& table) {
    std::unordered_map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < table.universes.size(); ++i) out.emplace(table.universes[i].key(), i);
    return out;
}

double ideal_distance(const UnfoldingSolution& s, std::size_t a, std::size_t b) {
    return (s.ideal.row(static_cast<Eigen::Index>(a)) - s.ideal.row(static_cast<Eigen::Index>(b))).norm();
}

constexpr Choice kChoices[] = {Choice::datasets, Choice::measure, Choice::imputation, Choice::aggregation};

} // namespace

double option_distance(const UnfoldingSolution& solution, const RankingTable& table, const MultiverseConfig& config,
                       const Universe& context, Choice c, std::size_t index) {
    check_solution(solution, table);
    const Universe other = config.with_option(context, c, index);
    const auto a = table.find(context);
    const auto b = table.find(other);
    if (!a) throw StructuralError(fmt::format("option_distance: universe '{}' not in table", context.key()));
    if (!b) throw StructuralError(fmt::format("option_distance: universe '{}' not in table", other.key()));
    return ideal_distance(solution, *a, *b);
}

std::vector<DefaultDistance> default_option_distances(const UnfoldingSolution& solution, const RankingTable& table,
                                                      const MultiverseConfig& config) {
    check_solution(solution, table);
    const auto index = index_by_key(table);
    if (!index.contains(config.defaults.key()))
        throw StructuralError(
            fmt::format("default_option_distances: default universe '{}' not in table", config.defaults.key()));

    std::vector<DefaultDistance> out;
    for (Choice c : kChoices) {
        const std::string def = config.defaults.option_key(c);
        for (std::size_t row = 0; row < table.universes.size(); ++row) {
            const Universe& u = table.universes[row];
            if (u.option_key(c) != def) continue;
            for (std::size_t i = 0; i < config.num_options(c); ++i) {
                const Universe alt = config.with_option(u, c, i);
                const std::string option = alt.option_key(c);
                if (option == def) continue;
                const auto partner = index.find(alt.key());
                if (partner == index.end()) continue;
                out.push_back({c, option, u.key(), ideal_distance(solution, row, partner->second)});
            }
        }
    }
    return out;
}

} // namespace benchfold
