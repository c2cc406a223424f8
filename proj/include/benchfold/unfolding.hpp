#ifndef BENCHFOLD_UNFOLDING_HPP
#define BENCHFOLD_UNFOLDING_HPP

#include "benchfold/isotonic.hpp"
#include "benchfold/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace benchfold {

using Matrix = Eigen::MatrixXd;

/// Whether the monotone transform is fitted per row (per universe) or once
/// for the whole table.
enum class Conditionality { row, matrix };

/// ordinal: monotone step function of the ranks.
/// identity: disparities proportional to the input (metric test mode).
enum class TransformKind { ordinal, identity };

struct UnfoldOptions {
    int dim = 2;
    int max_iter = 10000;
    double eps = 1e-6;
    double penalty_lambda = 0.5;
    double penalty_omega = 1.0;
    int n_starts = 4;
    std::uint64_t seed = 0;
    std::optional<Matrix> weights;
    TieRule tie_rule = TieRule::primary;
    Conditionality conditionality = Conditionality::row;
    TransformKind transform = TransformKind::ordinal;
    /// Keep the per-iteration penalized stress of the returned start.
    bool record_history = false;
    /// Workers for independent starts.
    unsigned threads = 1;
};

struct Breakpoint {
    double rank;
    double disparity;
};

struct UnfoldingSolution {
    Matrix ideal;        // K x dim, one row per universe
    Matrix objects;      // M x dim, one row per method
    Matrix disparities;  // K x M
    Matrix distances;    // K x M
    double stress_penalized = 0.0;
    double stress_raw = 0.0;        // sum of w (dhat - d)^2 at the returned scale
    double stress_normalized = 0.0; // raw / sum of w dhat^2
    /// One step function per row (a single entry for matrix conditionality).
    std::vector<std::vector<Breakpoint>> transform;
    int iterations = 0;
    bool converged = false;
    int best_start = 0;
    std::vector<double> history;
    UnfoldOptions options;
};

/// Euclidean distances between every row of `z1` and every row of `z2`.
Matrix euclidean_distances(const Matrix& z1, const Matrix& z2);

struct StressParts {
    double raw = 0.0;
    double normalized = 0.0;
    /// Coefficient of variation of the disparities. Under row conditionality
    /// this is the root of the harmonic mean of the squared row-wise
    /// coefficients, so that any single constant row drives it to zero.
    double variation = 0.0;
    double penalized = 0.0;
};

/// Raw, normalized and penalized stress. A null `weights` means unit weights.
/// `conditionality` selects global (matrix) or row-wise variation in the
/// penalty; rows whose dissimilarities are constant are excluded from the
/// row-wise variation when `delta` is given.
/// Throws DegenerateInput if the disparities have zero mean or zero variation.
StressParts stress_parts(const Matrix& disparities, const Matrix& distances, const Matrix* weights, double lambda,
                         double omega, Conditionality conditionality = Conditionality::matrix,
                         const Matrix* delta = nullptr);

/// normalized^lambda * (1 + omega / v^2), with v the coefficient of variation of the disparities.
double penalized_stress(const Matrix& disparities, const Matrix& distances, const Matrix* weights, double lambda,
                        double omega, Conditionality conditionality = Conditionality::matrix);

/// One Guttman transform of the bipartite (ideal point / object point)
/// configuration for fixed disparities. Never increases raw stress.
/// Throws DegenerateInput if every weight is zero.
std::pair<Matrix, Matrix> smacof_step(const Matrix& z1, const Matrix& z2, const Matrix& disparities,
                                      const Matrix* weights);

/// Ordinal unfolding of a K x M dissimilarity table (ranks: small = preferred)
/// by penalized-stress majorization. Returns the best of `n_starts` starts.
UnfoldingSolution fit(const Matrix& delta, const UnfoldOptions& options);

/// Single run from a given starting configuration.
UnfoldingSolution fit_from(const Matrix& delta, const UnfoldOptions& options, Matrix z1, Matrix z2);

/// Deterministic start built from the double-centred squared rank table.
std::pair<Matrix, Matrix> classical_start(const Matrix& delta, int dim, std::uint64_t seed);

/// K x M table from rankings (row k = ranking k).
Matrix rank_matrix(const std::vector<Ranking>& rankings);

} // namespace benchfold

#endif
