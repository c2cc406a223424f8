#ifndef BENCHFOLD_TEST_FIXTURES_HPP
#define BENCHFOLD_TEST_FIXTURES_HPP

#include "benchfold/model.hpp"
#include "benchfold/multiverse.hpp"
#include "benchfold/rng.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <string>
#include <vector>

namespace fixture {

inline benchfold::MeasureSpec ibrier() {
    return {"ibrier", benchfold::Orientation::lower_better, 0.25, 0.0};
}
inline benchfold::MeasureSpec cindex() {
    return {"cindex", benchfold::Orientation::higher_better, 0.5, 1.0};
}

// Random study: L datasets, M methods, both measures, `iters` iterations per
// cell, each iteration failing with probability `fail`.
inline benchfold::PerformanceTensor random_tensor(std::size_t L, std::size_t M, std::size_t iters, double fail,
                                                  std::uint64_t seed) {
    benchfold::Rng rng(seed);
    std::vector<benchfold::DatasetMeta> ds;
    for (std::size_t l = 0; l < L; ++l) {
        const auto n = static_cast<std::int64_t>(50 + rng.below(1000));
        ds.push_back({fmt::format("d{}", l), static_cast<std::int64_t>(rng.below(10)), n,
                      static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n))),
                      static_cast<std::int64_t>(1 + rng.below(50000))});
    }
    std::vector<std::string> methods;
    for (std::size_t m = 0; m < M; ++m) methods.push_back(fmt::format("m{}", m));
    std::vector<benchfold::Cell> cells;
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t m = 0; m < M; ++m) {
            std::vector<bool> failed(iters);
            for (std::size_t i = 0; i < iters; ++i) failed[i] = rng.uniform() < fail;
            benchfold::Cell b(iters), c(iters);
            for (std::size_t i = 0; i < iters; ++i) {
                if (failed[i]) continue;
                b[i] = rng.uniform(0.05, 0.3);
                c[i] = rng.uniform(0.4, 0.9);
            }
            cells.push_back(std::move(b));
            cells.push_back(std::move(c));
        }
    return benchfold::PerformanceTensor(std::move(ds), std::move(methods), {ibrier(), cindex()}, std::move(cells));
}

// The 9 x 2 x 4 x 4 grid used by the shipped configs.
inline benchfold::MultiverseConfig study_grid() {
    using namespace benchfold;
    MultiverseConfig c;
    c.filters.push_back(DatasetFilter{});
    for (auto ch : {"clin", "n", "n_eff", "p"})
        for (auto side : {"below", "at_or_above"}) c.filters.push_back(filter_from_key(fmt::format("{}:{}", ch, side)));
    c.measures = {"ibrier", "cindex"};
    for (auto k : {"threshold20", "weighted", "random_prediction", "mean_nonfailed"})
        c.imputations.push_back(imputation_from_key(k));
    for (auto k : {"mean", "median", "mean_rank", "best005"}) c.aggregations.push_back(aggregation_from_key(k));
    c.defaults = {DatasetFilter{}, "ibrier", imputation_from_key("threshold20"), aggregation_from_key("mean")};
    return c;
}

inline std::filesystem::path source_dir() { return BENCHFOLD_SOURCE_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::path(BENCHFOLD_BINARY_DIR) / "scratch" / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace fixture

#endif
