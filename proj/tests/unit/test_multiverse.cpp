#include "benchfold/errors.hpp"
#include "benchfold/multiverse.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <set>

using namespace benchfold;

TEST_CASE("the shipped grid has 288 universes in nested order") {
    const auto c = fixture::study_grid();
    CHECK(check_config(c).empty());
    const auto us = enumerate_universes(c);
    REQUIRE(us.size() == 288);
    CHECK(us.front() == c.defaults);
    CHECK(us[1].aggregation.kind == AggregationKind::median);
    CHECK(us[4].imputation.kind == ImputationKind::weighted);
    CHECK(us[16].measure == "cindex");
    CHECK(us[32].filter.key() == "clin:below");
    std::set<std::string> keys;
    for (const auto& u : us) keys.insert(u.key());
    CHECK(keys.size() == 288);
}

TEST_CASE("check_config reports problems") {
    auto c = fixture::study_grid();
    c.aggregations.clear();
    CHECK_FALSE(check_config(c).empty());
    c = fixture::study_grid();
    c.defaults.measure = "rmse";
    CHECK_FALSE(check_config(c).empty());
}

TEST_CASE("median split partitions the datasets") {
    std::vector<DatasetMeta> ds;
    for (int i = 0; i < 5; ++i) ds.push_back({fmt::format("d{}", i), i, 10 * (i + 1), i, 1});
    const auto below = apply_filter(ds, filter_from_key("n:below"));
    const auto above = apply_filter(ds, filter_from_key("n:at_or_above"));
    CHECK(below == std::vector<std::size_t>{0, 1});
    CHECK(above == std::vector<std::size_t>{2, 3, 4});
    CHECK(apply_filter(ds, DatasetFilter{}).size() == 5);
    CHECK_THROWS_AS(filter_from_key("size:below"), DataError);
}

TEST_CASE("universe evaluation") {
    const auto t = fixture::random_tensor(6, 4, 5, 0.1, 2);
    const auto c = fixture::study_grid();
    const auto table = run_multiverse(t, c);
    CHECK(table.size() + table.warnings.size() == 288);
    for (const auto& r : table.rows) CHECK(is_valid_midrank(r.ranks));
    CHECK(table.find(c.defaults).value() == 0);
}

TEST_CASE("run_multiverse is independent of the thread count") {
    const auto t = fixture::random_tensor(5, 4, 4, 0.2, 7);
    const auto c = fixture::study_grid();
    const auto a = run_multiverse(t, c, 1), b = run_multiverse(t, c, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.rows[i].ranks == b.rows[i].ranks);
}

TEST_CASE("rank distribution covers every row") {
    const auto t = fixture::random_tensor(5, 3, 4, 0.1, 9);
    const auto table = run_multiverse(t, fixture::study_grid());
    for (const auto& d : rank_distribution(table)) {
        int total = 0;
        for (auto [r, n] : d.counts) total += n;
        CHECK(static_cast<std::size_t>(total) == table.size());
        CHECK(d.min_rank <= d.max_rank);
    }
}

TEST_CASE("stepwise never ends above the starting rank nor below the best universe") {
    const auto t = fixture::random_tensor(6, 4, 5, 0.15, 4);
    const auto c = fixture::study_grid();
    const auto table = run_multiverse(t, c);
    for (const auto& m : t.methods()) {
        const auto tr = stepwise_optimize(t, c, m);
        CHECK(tr.final_rank <= tr.start_rank);
        CHECK(tr.steps.size() == 4);
        double best = 1e9;
        for (const auto& r : table.rows) best = std::min(best, r.rank_of(m));
        CHECK(tr.final_rank >= best);
        CHECK(evaluate_universe(t, tr.final_universe).rank_of(m) == tr.final_rank);
    }
}

TEST_CASE("prefix sampling") {
    const auto g = sample_prefix_groups(18, 50, 35);
    CHECK(g.size() == 774);
    CHECK(g == sample_prefix_groups(18, 50, 35));
    std::set<std::vector<std::size_t>> unique(g.begin(), g.end());
    CHECK(unique.size() == g.size());
    CHECK(g.back().size() == 18);
    for (const auto& s : g) CHECK(std::is_sorted(s.begin(), s.end()));
}
