#include "benchfold/unfolding.hpp"

#include "benchfold/errors.hpp"
#include "benchfold/parallel.hpp"
#include "benchfold/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace benchfold {

namespace {

constexpr double kMinDistance = 1e-12;

// Solves the Guttman normal equations V X = Y for the bipartite weight
// structure. Unit weights have a closed form; anything else uses a cached
// Moore-Penrose inverse of V.
class GuttmanSolver {
public:
    GuttmanSolver(Eigen::Index k, Eigen::Index m, const Matrix* weights) : k_(k), m_(m) {
        if (weights == nullptr || (weights->array() == 1.0).all()) return;
        const Eigen::Index n = k + m;
        Matrix v = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                const double w = (*weights)(i, j);
                v(i, i) += w;
                v(k + j, k + j) += w;
                v(i, k + j) -= w;
                v(k + j, i) -= w;
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(v);
        const auto& ev = es.eigenvalues();
        const double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        Eigen::VectorXd inv = ev.unaryExpr([tol](double x) { return x > tol ? 1.0 / x : 0.0; });
        vplus_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
        general_ = true;
    }

    // y is (K+M) x dim with columns summing to zero.
    Matrix solve(const Matrix& y) const {
        if (general_) return vplus_ * y;
        Matrix x(y.rows(), y.cols());
        const double kk = static_cast<double>(k_), mm = static_cast<double>(m_);
        const Eigen::RowVectorXd s2 = -y.topRows(k_).colwise().sum() / (kk + mm);
        x.topRows(k_) = (y.topRows(k_).rowwise() + s2) / mm;
        x.bottomRows(m_) = (y.bottomRows(m_).rowwise() - s2) / kk;
        return x;
    }

private:
    Eigen::Index k_, m_;
    bool general_ = false;
    Matrix vplus_;
};

std::pair<Matrix, Matrix> guttman(const GuttmanSolver& solver, const Matrix& z1, const Matrix& z2,
                                  const Matrix& dhat, const Matrix& d, const Matrix* weights) {
    const Eigen::Index k = z1.rows(), m = z2.rows();
    Matrix bx = Matrix::Zero(k + m, z1.cols());
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double w = weights ? (*weights)(i, j) : 1.0;
            if (w == 0.0) continue;
            const double ratio = w * dhat(i, j) / std::max(d(i, j), kMinDistance);
            const Eigen::RowVectorXd diff = ratio * (z1.row(i) - z2.row(j));
            bx.row(i) += diff;
            bx.row(k + j) -= diff;
        }
    }
    Matrix x = solver.solve(bx);
    return {x.topRows(k), x.bottomRows(m)};
}

double weighted_sum(const Matrix& a, const Matrix* w) {
    return w ? (a.array() * w->array()).sum() : a.sum();
}

// Rows entering the row-wise penalty: all rows with non-constant
// dissimilarities (all rows if delta is unknown). Empty means one global block.
std::vector<Eigen::Index> penalty_rows(const Matrix* delta, Conditionality c, Eigen::Index rows) {
    std::vector<Eigen::Index> out;
    if (c == Conditionality::matrix) return out;
    for (Eigen::Index i = 0; i < rows; ++i)
        if (!delta || delta->row(i).maxCoeff() > delta->row(i).minCoeff()) out.push_back(i);
    return out;
}

struct VariationBlock {
    Eigen::Index row = -1; // -1: whole matrix
    double wsum = 0.0, mean = 0.0, total = 0.0, v2 = 0.0;
};

struct VariationBlocks {
    std::vector<VariationBlock> blocks;
    double inverse_mean = 0.0; // mean over blocks of 1 / v^2
};

VariationBlocks variation_blocks(const Matrix& dhat, const Matrix* w, const std::vector<Eigen::Index>& rows) {
    VariationBlocks out;
    auto add = [&](Eigen::Index row, double wsum, double sum, double total) {
        if (wsum <= 0.0) return;
        VariationBlock b{row, wsum, sum / wsum, total, 0.0};
        if (b.mean == 0.0) throw DegenerateInput("stress: disparities have zero mean");
        b.v2 = std::max(total / wsum / (b.mean * b.mean) - 1.0, 0.0);
        if (b.v2 == 0.0) throw DegenerateInput("stress: disparities are constant");
        out.blocks.push_back(b);
    };
    if (rows.empty()) {
        add(-1, w ? w->sum() : static_cast<double>(dhat.size()), weighted_sum(dhat, w),
            weighted_sum(dhat.array().square().matrix(), w));
    } else {
        for (Eigen::Index i : rows) {
            double ws = 0.0, sum = 0.0, total = 0.0;
            for (Eigen::Index j = 0; j < dhat.cols(); ++j) {
                const double wij = w ? (*w)(i, j) : 1.0;
                ws += wij;
                sum += wij * dhat(i, j);
                total += wij * dhat(i, j) * dhat(i, j);
            }
            add(i, ws, sum, total);
        }
    }
    if (out.blocks.empty()) throw DegenerateInput("stress: all weights are zero");
    for (const auto& b : out.blocks) out.inverse_mean += 1.0 / b.v2;
    out.inverse_mean /= static_cast<double>(out.blocks.size());
    return out;
}

StressParts stress_core(const Matrix& dhat, const Matrix& d, const Matrix* w, double lambda, double omega,
                        const std::vector<Eigen::Index>& rows, VariationBlocks* blocks_out = nullptr) {
    StressParts s;
    s.raw = weighted_sum((dhat - d).array().square().matrix(), w);
    const double total = weighted_sum(dhat.array().square().matrix(), w);
    if (total == 0.0) throw DegenerateInput("stress: disparities have zero mean");
    auto blocks = variation_blocks(dhat, w, rows);
    s.variation = std::sqrt(1.0 / blocks.inverse_mean);
    s.normalized = s.raw / total;
    s.penalized = std::pow(s.normalized, lambda) * (1.0 + omega * blocks.inverse_mean);
    if (blocks_out) *blocks_out = std::move(blocks);
    return s;
}

struct Problem {
    const Matrix& delta;
    const UnfoldOptions& opt;
    const Matrix* w;
    double wsum;
    std::vector<Eigen::Index> penalty_rows;

    StressParts stress(const Matrix& dhat, const Matrix& d, VariationBlocks* blocks = nullptr) const {
        return stress_core(dhat, d, w, opt.penalty_lambda, opt.penalty_omega, penalty_rows, blocks);
    }
    // Penalized stress, +inf when degenerate.
    double penalized_or_inf(const Matrix& dhat, const Matrix& d) const {
        try {
            return stress(dhat, d).penalized;
        } catch (const DegenerateInput&) {
            return std::numeric_limits<double>::infinity();
        }
    }
};

// Least-squares projection of `y` onto nonnegative disparities monotone in delta.
Matrix project(const Problem& p, const Matrix& y) {
    const Eigen::Index k = y.rows(), m = y.cols();
    Matrix out(k, m);
    if (p.opt.conditionality == Conditionality::row) {
        std::vector<double> r(m), t(m), w(p.w ? m : 0);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                r[j] = p.delta(i, j);
                t[j] = y(i, j);
                if (p.w) w[j] = (*p.w)(i, j);
            }
            const auto fitted = monotone_regress(r, t, w, p.opt.tie_rule);
            for (Eigen::Index j = 0; j < m; ++j) out(i, j) = std::max(fitted[j], 0.0);
        }
    } else {
        std::vector<double> r(p.delta.data(), p.delta.data() + p.delta.size());
        std::vector<double> t(y.data(), y.data() + y.size());
        std::vector<double> w;
        if (p.w) w.assign(p.w->data(), p.w->data() + p.w->size());
        const auto fitted = monotone_regress(r, t, w, p.opt.tie_rule);
        for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = std::max(fitted[i], 0.0);
    }
    return out;
}

// Gradient of log(penalized stress) with respect to the disparities, divided
// elementwise by the weights (the steepest-descent direction in the metric
// that the weighted projection uses).
Matrix log_stress_gradient(const Problem& p, const Matrix& dhat, const Matrix& d, const StressParts& s,
                           const VariationBlocks& blocks) {
    const double lambda = p.opt.penalty_lambda, omega = p.opt.penalty_omega;
    const double total = weighted_sum(dhat.array().square().matrix(), p.w);
    Matrix grad = (2.0 * lambda / (s.normalized * total)) * ((1.0 - s.normalized) * dhat - d);

    const double pen = 1.0 + omega * blocks.inverse_mean;
    const double nb = static_cast<double>(blocks.blocks.size());
    for (const auto& b : blocks.blocks) {
        const double c = 2.0 * omega / (nb * pen * b.v2 * b.v2 * b.wsum * b.mean * b.mean);
        const double centre = b.total / (b.wsum * b.mean);
        if (b.row < 0) grad.array() -= c * (dhat.array() - centre);
        else grad.row(b.row).array() -= c * (dhat.row(b.row).array() - centre);
    }
    return grad;
}

// Disparity update for fixed distances: the better of the plain monotone
// regression of the distances and a projected gradient step on the log of the
// penalized stress. Returns `dhat` unchanged if neither lowers the objective.
Matrix update_disparities(const Problem& p, const Matrix& dhat, const Matrix& d) {
    VariationBlocks blocks;
    const StressParts s = p.stress(dhat, d, &blocks);
    const double current = s.penalized;

    Matrix best = dhat;
    double best_value = current;

    Matrix kruskal = project(p, d);
    if (double v = p.penalized_or_inf(kruskal, d); v < best_value) {
        best = std::move(kruskal);
        best_value = v;
    }
    if (s.normalized <= 0.0) return best;

    const Matrix grad = log_stress_gradient(p, dhat, d, s, blocks);
    const double total = weighted_sum(dhat.array().square().matrix(), p.w);
    double step = s.normalized * total / (2.0 * p.opt.penalty_lambda);
    for (int tries = 0; tries < 40; ++tries, step *= 0.5) {
        Matrix candidate = project(p, dhat - step * grad);
        const double v = p.penalized_or_inf(candidate, d);
        if (v < current) {
            if (v < best_value) {
                best = std::move(candidate);
                best_value = v;
            }
            break;
        }
    }
    return best;
}

std::vector<std::vector<Breakpoint>> breakpoints(const Problem& p, const Matrix& dhat) {
    auto collect = [](std::vector<Breakpoint> pts) {
        std::sort(pts.begin(), pts.end(), [](const Breakpoint& a, const Breakpoint& b) {
            return a.rank != b.rank ? a.rank < b.rank : a.disparity < b.disparity;
        });
        pts.erase(std::unique(pts.begin(), pts.end(),
                              [](const Breakpoint& a, const Breakpoint& b) {
                                  return a.rank == b.rank && a.disparity == b.disparity;
                              }),
                  pts.end());
        return pts;
    };
    std::vector<std::vector<Breakpoint>> out;
    if (p.opt.conditionality == Conditionality::row) {
        for (Eigen::Index i = 0; i < dhat.rows(); ++i) {
            std::vector<Breakpoint> pts;
            for (Eigen::Index j = 0; j < dhat.cols(); ++j) pts.push_back({p.delta(i, j), dhat(i, j)});
            out.push_back(collect(std::move(pts)));
        }
    } else {
        std::vector<Breakpoint> pts;
        for (Eigen::Index i = 0; i < dhat.size(); ++i) pts.push_back({p.delta.data()[i], dhat.data()[i]});
        out.push_back(collect(std::move(pts)));
    }
    return out;
}

void check_inputs(const Matrix& delta, const UnfoldOptions& opt) {
    if (delta.rows() < 2 || delta.cols() < 2) throw StructuralError("fit: need at least 2 rows and 2 columns");
    if (opt.dim < 1 || opt.dim > delta.cols())
        throw StructuralError(fmt::format("fit: dim must lie in [1, {}], got {}", delta.cols(), opt.dim));
    if (opt.max_iter < 1 || !(opt.eps > 0.0) || opt.n_starts < 1)
        throw StructuralError("fit: max_iter, eps and n_starts must be positive");
    if (!(opt.penalty_lambda > 0.0 && opt.penalty_lambda <= 1.0)) throw StructuralError("fit: lambda must lie in (0, 1]");
    if (!(opt.penalty_omega >= 0.0)) throw StructuralError("fit: omega must be nonnegative");
    if (!delta.allFinite() || (delta.array() < 0.0).any())
        throw StructuralError("fit: dissimilarities must be finite and nonnegative");
    if (opt.weights) {
        const Matrix& w = *opt.weights;
        if (w.rows() != delta.rows() || w.cols() != delta.cols()) throw StructuralError("fit: weights shape mismatch");
        if (!w.allFinite() || (w.array() < 0.0).any()) throw StructuralError("fit: weights must be nonnegative");
        if (w.sum() <= 0.0) throw DegenerateInput("fit: all weights are zero");
    }
}

} // namespace

Matrix euclidean_distances(const Matrix& z1, const Matrix& z2) {
    if (z1.cols() != z2.cols()) throw StructuralError("euclidean_distances: dimension mismatch");
    Matrix d(z1.rows(), z2.rows());
    for (Eigen::Index i = 0; i < z1.rows(); ++i)
        for (Eigen::Index j = 0; j < z2.rows(); ++j) d(i, j) = (z1.row(i) - z2.row(j)).norm();
    return d;
}

StressParts stress_parts(const Matrix& dhat, const Matrix& d, const Matrix* w, double lambda, double omega,
                         Conditionality conditionality, const Matrix* delta) {
    if (dhat.rows() != d.rows() || dhat.cols() != d.cols())
        throw StructuralError("stress: disparities and distances differ in shape");
    if (w && (w->rows() != d.rows() || w->cols() != d.cols())) throw StructuralError("stress: weights shape mismatch");
    if (delta && (delta->rows() != d.rows() || delta->cols() != d.cols()))
        throw StructuralError("stress: dissimilarities shape mismatch");
    if (w && !(w->sum() > 0.0)) throw DegenerateInput("stress: all weights are zero");
    return stress_core(dhat, d, w, lambda, omega, penalty_rows(delta, conditionality, d.rows()));
}

double penalized_stress(const Matrix& dhat, const Matrix& d, const Matrix* w, double lambda, double omega,
                        Conditionality conditionality) {
    return stress_parts(dhat, d, w, lambda, omega, conditionality, nullptr).penalized;
}

std::pair<Matrix, Matrix> smacof_step(const Matrix& z1, const Matrix& z2, const Matrix& dhat, const Matrix* w) {
    if (z1.cols() != z2.cols() || dhat.rows() != z1.rows() || dhat.cols() != z2.rows())
        throw StructuralError("smacof_step: shape mismatch");
    if (w && (w->rows() != dhat.rows() || w->cols() != dhat.cols()))
        throw StructuralError("smacof_step: weights shape mismatch");
    if (w && !(w->sum() > 0.0)) throw DegenerateInput("smacof_step: all weights are zero");
    GuttmanSolver solver(z1.rows(), z2.rows(), w);
    return guttman(solver, z1, z2, dhat, euclidean_distances(z1, z2), w);
}

std::pair<Matrix, Matrix> classical_start(const Matrix& delta, int dim, std::uint64_t seed) {
    const Eigen::Index k = delta.rows(), m = delta.cols();
    Matrix sq = delta.array().square().matrix();
    const Eigen::VectorXd row_mean = sq.rowwise().mean();
    const Eigen::RowVectorXd col_mean = sq.colwise().mean();
    const double grand = sq.mean();
    Matrix b = -0.5 * ((sq.colwise() - row_mean).rowwise() - col_mean).array() - 0.5 * grand;
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();

    Matrix z1 = Matrix::Zero(k, dim), z2 = Matrix::Zero(m, dim);
    double scale = 0.0;
    std::vector<int> empty_columns;
    for (int c = 0; c < dim; ++c) {
        if (c < sv.size() && sv(c) > 1e-10 * std::max(sv(0), 1e-300)) {
            const double root = std::sqrt(sv(c));
            z1.col(c) = svd.matrixU().col(c) * root;
            z2.col(c) = svd.matrixV().col(c) * root;
            scale = std::max(scale, root);
        } else {
            empty_columns.push_back(c);
        }
    }
    if (!empty_columns.empty()) {
        Rng rng(derive_seed(seed, 0xC1A55ULL));
        const double jitter = 0.1 * (scale > 0.0 ? scale : 1.0);
        for (int c : empty_columns) {
            for (Eigen::Index i = 0; i < k; ++i) z1(i, c) = jitter * rng.normal();
            for (Eigen::Index j = 0; j < m; ++j) z2(j, c) = jitter * rng.normal();
        }
    }
    return {z1, z2};
}

UnfoldingSolution fit_from(const Matrix& delta, const UnfoldOptions& opt, Matrix z1, Matrix z2) {
    check_inputs(delta, opt);
    if (z1.rows() != delta.rows() || z2.rows() != delta.cols() || z1.cols() != opt.dim || z2.cols() != opt.dim)
        throw StructuralError("fit_from: starting configuration has the wrong shape");

    const Matrix* w = opt.weights ? &*opt.weights : nullptr;
    const Problem p{delta, opt, w, w ? w->sum() : static_cast<double>(delta.size()),
                    penalty_rows(&delta, opt.conditionality, delta.rows())};
    const GuttmanSolver solver(delta.rows(), delta.cols(), w);
    // Disparities start as the dissimilarities, scaled to unit mean square.
    Matrix dhat = delta;
    double total = weighted_sum(dhat.array().square().matrix(), w);
    if (total <= 0.0) throw DegenerateInput("fit: all dissimilarities are zero");
    dhat *= std::sqrt(p.wsum / total);

    Matrix d = euclidean_distances(z1, z2);
    const double dd = weighted_sum(d.array().square().matrix(), w);
    if (dd <= 0.0) throw DegenerateInput("fit: starting configuration has all points coincident");
    const double scale = weighted_sum((dhat.array() * d.array()).matrix(), w) / dd;
    if (scale > 0.0) {
        z1 *= scale;
        z2 *= scale;
        d *= scale;
    }

    double current = p.stress(dhat, d).penalized;
    UnfoldingSolution sol;
    sol.options = opt;
    if (opt.record_history) sol.history.push_back(current);

    int iter = 0;
    bool converged = false;
    while (iter < opt.max_iter && !converged) {
        ++iter;
        auto [g1, g2] = guttman(solver, z1, z2, dhat, d, w);
        Matrix gd = euclidean_distances(g1, g2);
        // Over-relaxed step 2G - X, kept only when it fits the current
        // disparities better than the plain transform.
        Matrix r1 = 2.0 * g1 - z1, r2 = 2.0 * g2 - z2;
        Matrix rd = euclidean_distances(r1, r2);
        if (weighted_sum((dhat - rd).array().square().matrix(), w) <
            weighted_sum((dhat - gd).array().square().matrix(), w)) {
            z1 = std::move(r1);
            z2 = std::move(r2);
            d = std::move(rd);
        } else {
            z1 = std::move(g1);
            z2 = std::move(g2);
            d = std::move(gd);
        }

        if (opt.transform == TransformKind::ordinal) {
            dhat = update_disparities(p, dhat, d);
            total = weighted_sum(dhat.array().square().matrix(), w);
            const double c = std::sqrt(p.wsum / total);
            dhat *= c;
            z1 *= c;
            z2 *= c;
            d *= c;
        }

        const double next = p.stress(dhat, d).penalized;
        if (opt.record_history) sol.history.push_back(next);
        converged = next == 0.0 || current - next < opt.eps * current;
        current = next;
    }

    const StressParts s = p.stress(dhat, d);
    sol.ideal = std::move(z1);
    sol.objects = std::move(z2);
    sol.transform = breakpoints(p, dhat);
    sol.disparities = std::move(dhat);
    sol.distances = std::move(d);
    sol.stress_penalized = s.penalized;
    sol.stress_raw = s.raw;
    sol.stress_normalized = s.normalized;
    sol.iterations = iter;
    sol.converged = converged;
    return sol;
}

UnfoldingSolution fit(const Matrix& delta, const UnfoldOptions& opt) {
    check_inputs(delta, opt);
    const auto starts = static_cast<std::size_t>(opt.n_starts);
    std::vector<std::optional<UnfoldingSolution>> results(starts);
    std::vector<std::string> failures(starts);

    parallel_for(starts, opt.threads, [&](std::size_t s) {
        Matrix z1, z2;
        if (s == 0) {
            std::tie(z1, z2) = classical_start(delta, opt.dim, opt.seed);
        } else {
            Rng rng(derive_seed(opt.seed, s));
            z1.resize(delta.rows(), opt.dim);
            z2.resize(delta.cols(), opt.dim);
            for (Eigen::Index i = 0; i < z1.size(); ++i) z1.data()[i] = rng.uniform(-1.0, 1.0);
            for (Eigen::Index i = 0; i < z2.size(); ++i) z2.data()[i] = rng.uniform(-1.0, 1.0);
        }
        try {
            results[s] = fit_from(delta, opt, std::move(z1), std::move(z2));
        } catch (const DegenerateInput& e) {
            failures[s] = e.what();
        }
    });

    // Values within eps of the minimum count as tied and go to the lowest
    // start index. The iteration does not resolve differences below eps, and
    // exact fits land anywhere in [0, 1e-13] by rounding alone, so comparing
    // them directly would pick a start at random.
    std::optional<std::size_t> best;
    double minimum = std::numeric_limits<double>::infinity();
    for (const auto& r : results)
        if (r) minimum = std::min(minimum, r->stress_penalized);
    for (std::size_t s = 0; s < starts && !best; ++s)
        if (results[s] && results[s]->stress_penalized <= minimum + opt.eps) best = s;
    if (!best) throw DegenerateInput(fmt::format("fit: every start failed ({})", failures.front()));
    UnfoldingSolution out = std::move(*results[*best]);
    out.best_start = static_cast<int>(*best);
    return out;
}

Matrix rank_matrix(const std::vector<Ranking>& rankings) {
    if (rankings.empty()) return Matrix(0, 0);
    Matrix out(static_cast<Eigen::Index>(rankings.size()), static_cast<Eigen::Index>(rankings.front().ranks.size()));
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        if (rankings[i].ranks.size() != static_cast<std::size_t>(out.cols()))
            throw StructuralError("rank_matrix: rankings differ in length");
        for (std::size_t j = 0; j < rankings[i].ranks.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rankings[i].ranks[j];
    }
    return out;
}

} // namespace benchfold
