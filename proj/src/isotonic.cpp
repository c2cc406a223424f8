#include "benchfold/isotonic.hpp"

#include "benchfold/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace benchfold {

namespace {

struct Block {
    double wy = 0.0;  // weighted sum of targets
    double w = 0.0;   // total weight
    double y = 0.0;   // unweighted sum, used when w == 0
    std::size_t n = 0;

    double value() const { return w > 0.0 ? wy / w : y / static_cast<double>(n); }
    void absorb(const Block& o) {
        wy += o.wy;
        w += o.w;
        y += o.y;
        n += o.n;
    }
};

} // namespace

std::vector<double> pava(std::span<const double> targets, std::span<const double> weights) {
    std::vector<Block> stack;
    stack.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        Block b{weights[i] * targets[i], weights[i], targets[i], 1};
        while (!stack.empty()) {
            const Block& top = stack.back();
            if (top.w == 0.0 || b.w == 0.0 || top.value() > b.value()) {
                Block merged = top;
                merged.absorb(b);
                b = merged;
                stack.pop_back();
            } else {
                break;
            }
        }
        stack.push_back(b);
    }
    std::vector<double> out;
    out.reserve(targets.size());
    for (const auto& b : stack) out.insert(out.end(), b.n, b.value());
    return out;
}

std::vector<double> monotone_regress(std::span<const double> ranks, std::span<const double> targets,
                                     std::span<const double> weights, TieRule tie_rule) {
    const std::size_t n = ranks.size();
    if (targets.size() != n || (!weights.empty() && weights.size() != n))
        throw StructuralError("monotone_regress: ranks, targets and weights differ in length");
    if (n == 0) throw StructuralError("monotone_regress: empty input");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ranks[i]) || !std::isfinite(targets[i]))
            throw StructuralError("monotone_regress: non-finite input");
        if (!weights.empty() && !(weights[i] >= 0.0 && std::isfinite(weights[i])))
            throw StructuralError("monotone_regress: weights must be nonnegative");
    }
    auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> out(n);

    if (tie_rule == TieRule::primary) {
        // Inside a tie block the optimum is ordered like the targets.
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (ranks[a] != ranks[b]) return ranks[a] < ranks[b];
            if (targets[a] != targets[b]) return targets[a] < targets[b];
            return a < b;
        });
        std::vector<double> y(n), w(n);
        for (std::size_t k = 0; k < n; ++k) {
            y[k] = targets[order[k]];
            w[k] = weight(order[k]);
        }
        const auto fitted = pava(y, w);
        for (std::size_t k = 0; k < n; ++k) out[order[k]] = fitted[k];
        return out;
    }

    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
    // Collapse each tie block to one observation carrying its total weight.
    std::vector<double> y, w;
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < n;) {
        std::size_t e = k;
        double sw = 0.0, swy = 0.0, sy = 0.0;
        while (e < n && ranks[order[e]] == ranks[order[k]]) {
            sw += weight(order[e]);
            swy += weight(order[e]) * targets[order[e]];
            sy += targets[order[e]];
            ++e;
        }
        starts.push_back(k);
        y.push_back(sw > 0.0 ? swy / sw : sy / static_cast<double>(e - k));
        w.push_back(sw);
        k = e;
    }
    starts.push_back(n);
    const auto fitted = pava(y, w);
    for (std::size_t b = 0; b + 1 < starts.size(); ++b)
        for (std::size_t k = starts[b]; k < starts[b + 1]; ++k) out[order[k]] = fitted[b];
    return out;
}

} // namespace benchfold
