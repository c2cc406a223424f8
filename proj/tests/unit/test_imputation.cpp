#include "benchfold/errors.hpp"
#include "benchfold/imputation.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace benchfold;

namespace {

// n slots of which the first `failed` are absent and the rest equal `value`.
Cell cell_with(std::size_t n, std::size_t failed, double value) {
    Cell c(n);
    for (std::size_t i = failed; i < n; ++i) c[i] = value;
    return c;
}

const ImputationStrategy weighted{ImputationKind::weighted};
const ImputationStrategy threshold{ImputationKind::threshold20};
const ImputationStrategy random_pred{ImputationKind::random_prediction};
const ImputationStrategy nonfailed{ImputationKind::mean_nonfailed};

} // namespace

TEST_CASE("failure proportion") {
    CHECK(failure_proportion(cell_with(10, 0, 0.1)) == 0.0);
    CHECK(failure_proportion(cell_with(10, 2, 0.1)) == doctest::Approx(0.2));
    CHECK(failure_proportion(cell_with(5, 5, 0.1)) == 1.0);
    CHECK_THROWS_AS(failure_proportion(Cell{}), StructuralError);
}

TEST_CASE("weighted imputation, hand-evaluated values") {
    // 0.25 - (0.25 - 0.15) * 0.5
    CHECK(impute_cell(cell_with(10, 5, 0.15), fixture::ibrier(), weighted) == doctest::Approx(0.20).epsilon(1e-12));
    // 0.5 + (0.7 - 0.5) * 0.75
    CHECK(impute_cell(cell_with(4, 1, 0.7), fixture::cindex(), weighted) == doctest::Approx(0.65).epsilon(1e-12));
}

TEST_CASE("weighted imputation limits") {
    CHECK(impute_cell(cell_with(10, 10, 0.1), fixture::ibrier(), weighted) == 0.25);
    CHECK(impute_cell(cell_with(5, 2, 0.30), fixture::ibrier(), weighted) == 0.25);
    CHECK(impute_cell(cell_with(5, 2, 0.40), fixture::cindex(), weighted) == 0.5);
}

TEST_CASE("threshold20") {
    CHECK(impute_cell(cell_with(10, 1, 0.18), fixture::ibrier(), threshold) == doctest::Approx(0.18));
    CHECK(impute_cell(cell_with(10, 5, 0.8), fixture::cindex(), threshold) == 0.5);
    // r exactly at the threshold takes the random value.
    CHECK(impute_cell(cell_with(10, 2, 0.1), fixture::ibrier(), threshold) == 0.25);
    const ImputationStrategy loose{ImputationKind::threshold20, 0.5};
    CHECK(impute_cell(cell_with(10, 2, 0.1), fixture::ibrier(), loose) == doctest::Approx(0.1));
}

TEST_CASE("no failures leaves the plain mean for every strategy") {
    const Cell c{0.10, 0.12, 0.14};
    for (const auto& s : {weighted, threshold, random_pred, nonfailed})
        CHECK(impute_cell(c, fixture::ibrier(), s) == doctest::Approx(0.12));
}

TEST_CASE("mean_nonfailed and random_prediction") {
    CHECK(impute_cell(cell_with(4, 1, 0.2), fixture::ibrier(), nonfailed) == doctest::Approx(0.2));
    CHECK(impute_cell(cell_with(4, 4, 0.2), fixture::ibrier(), nonfailed) == 0.25);
    CHECK(impute_cell(cell_with(4, 1, 0.2), fixture::ibrier(), random_pred) == 0.25);
}

TEST_CASE("weighted is monotone in the failure proportion") {
    double prev = 0.0;
    for (std::size_t failed = 0; failed <= 20; ++failed) {
        const double x = impute_cell(cell_with(20, failed, 0.12), fixture::ibrier(), weighted);
        CHECK(x >= prev);
        prev = x;
    }
    CHECK(prev == 0.25);
}

TEST_CASE("weighted approaches the mean as r goes to zero") {
    const double x = impute_cell(cell_with(100000, 1, 0.1), fixture::ibrier(), weighted);
    // (R - mean) * r = 1.5e-6
    CHECK(x - 0.1 == doctest::Approx(1.5e-6).epsilon(1e-6));
}

TEST_CASE("strategy keys round-trip") {
    for (auto key : {"threshold20", "threshold20:0.3", "weighted", "random_prediction", "mean_nonfailed"})
        CHECK(imputation_from_key(key).key() == key);
    CHECK_THROWS_AS(imputation_from_key("threshold20:0"), DataError);
    CHECK_THROWS_AS(imputation_from_key("median"), DataError);
}
