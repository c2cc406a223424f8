#include "benchfold/errors.hpp"
#include "benchfold/io.hpp"
#include "fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace benchfold;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string error_of(auto&& f) {
    try {
        f();
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

const char* minimal_config = R"({
  "measures": [{"id": "ibrier", "orientation": "lower_better", "random_value": 0.25, "best_value": 0}],
  "multiverse": {"filters": ["all"], "imputations": ["weighted"], "aggregations": ["mean"]}
})";

} // namespace

TEST_CASE("results parsing") {
    const auto r = parse_results_text("dataset_id,method_id,measure_id,iteration,value\n"
                                      "d1,m1,ibrier,0,0.1\n"
                                      "d1,m1,ibrier,1,\n"
                                      "d1,m1,ibrier,2,0.3\n",
                                      "x.csv");
    const auto& c = r.cells.at({"d1", "m1", "ibrier"});
    REQUIRE(c.size() == 3);
    CHECK(*c[0] == 0.1);
    CHECK_FALSE(c[1].has_value());
}

TEST_CASE("results errors name the line") {
    const std::string head = "dataset_id,method_id,measure_id,iteration,value\n";
    CHECK(error_of([&] { parse_results_text(head + "d,m,q,0,0.1\nd,m,q,0,0.2\n", "x.csv"); }).find("x.csv:3") !=
          std::string::npos);
    CHECK(error_of([&] { parse_results_text(head + "d,m,q,0,abc\n", "x.csv"); }).find("x.csv:2") != std::string::npos);
    CHECK(error_of([&] { parse_results_text(head + "d,m,q,0\n", "x.csv"); }).find("x.csv:2") != std::string::npos);
    CHECK_FALSE(error_of([&] { parse_results_text(head + "d,m,q,0,1\nd,m,q,2,1\n", "x.csv"); }).empty());
    CHECK_FALSE(error_of([&] { parse_results_text(head + "d,m,q,0,1\nd,m,r,0,1\nd,m,r,1,1\n", "x.csv"); }).empty());
    CHECK_FALSE(error_of([&] { parse_results_text("a,b\n", "x.csv"); }).empty());
}

TEST_CASE("datasets parsing") {
    const auto ds = parse_datasets_text("dataset_id,clin,n,n_eff,p\na,1,100,40,10\nb,0,50,5,3\n", "d.csv");
    REQUIRE(ds.size() == 2);
    CHECK(ds[1].n_eff == 5);
    CHECK_THROWS_AS(parse_datasets_text("dataset_id,clin,n,n_eff,p\na,1,100,40,10\na,1,1,1,1\n", "d.csv"), DataError);
    CHECK_THROWS_AS(parse_datasets_text("dataset_id,clin,n,n_eff,p\na,x,100,40,10\n", "d.csv"), DataError);
}

TEST_CASE("results round-trip") {
    const auto t = fixture::random_tensor(4, 3, 5, 0.2, 17);
    const auto back = build_tensor(parse_results_text(format_results(t), "rt"), t.datasets(), t.measures());
    REQUIRE(back.methods() == t.methods());
    for (std::size_t d = 0; d < t.num_datasets(); ++d)
        for (std::size_t m = 0; m < t.num_methods(); ++m)
            for (std::size_t q = 0; q < t.num_measures(); ++q) {
                const auto a = t.cell(d, m, q), b = back.cell(d, m, q);
                CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
            }
}

TEST_CASE("build_tensor rejects unknown ids") {
    const auto r = parse_results_text("dataset_id,method_id,measure_id,iteration,value\nzz,m,ibrier,0,0.1\n", "x");
    CHECK_THROWS_AS(build_tensor(r, {{"a", 1, 10, 5, 3}}, {fixture::ibrier()}), DataError);
}

TEST_CASE("config") {
    SUBCASE("shipped config") {
        const auto c = parse_config(fixture::source_dir() / "data" / "paper.config");
        CHECK(c.multiverse.filters.size() == 9);
        CHECK(c.multiverse.measures.size() == 2);
        CHECK(c.multiverse.imputations.size() == 4);
        CHECK(c.multiverse.aggregations.size() == 4);
        CHECK(c.multiverse.defaults == fixture::study_grid().defaults);
        CHECK(c.sampling.seed.value() == 35);
    }
    SUBCASE("minimal config infers defaults") {
        const auto c = parse_config_text(minimal_config, "min.json");
        CHECK(c.multiverse.defaults.imputation.kind == ImputationKind::weighted);
        CHECK(c.multiverse.defaults.measure == "ibrier");
    }
    SUBCASE("default outside the options") {
        auto j = nlohmann::json::parse(minimal_config);
        j["multiverse"]["defaults"] = {{"aggregation", "median"}};
        CHECK(error_of([&] { parse_config_text(j.dump(), "c.json"); }).find("aggregation") != std::string::npos);
    }
    SUBCASE("unknown key names its path") {
        auto j = nlohmann::json::parse(minimal_config);
        j["unfolding"] = {{"dimz", 2}};
        CHECK(error_of([&] { parse_config_text(j.dump(), "c.json"); }).find("unfolding.dimz") != std::string::npos);
    }
    SUBCASE("missing default among several options") {
        auto j = nlohmann::json::parse(minimal_config);
        j["multiverse"]["aggregations"] = {"mean", "median"};
        CHECK(error_of([&] { parse_config_text(j.dump(), "c.json"); }).find("required") != std::string::npos);
    }
    SUBCASE("malformed JSON") { CHECK_THROWS_AS(parse_config_text("{", "c.json"), DataError); }
}

TEST_CASE("format_double keeps 17 digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("empty table writes a header and a manifest") {
    const auto dir = fixture::scratch_dir("empty");
    RankingTable table;
    table.methods = {"a", "b"};
    const auto c = fixture::study_grid();
    const auto files = write_outputs(dir, {&table, &c});
    CHECK(slurp(dir / "rankings.csv") == "universe,datasets,measure,imputation,aggregation,a,b\n");
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(files.size() == 1);
}

TEST_CASE("outputs are byte-identical across thread counts") {
    const auto t = fixture::random_tensor(6, 4, 4, 0.1, 2);
    const auto c = fixture::study_grid();
    std::string manifests[2];
    for (unsigned threads : {1u, 3u}) {
        const auto table = run_multiverse(t, c, threads);
        UnfoldOptions o;
        o.n_starts = 2;
        o.max_iter = 300;
        o.threads = threads;
        const auto solution = fit(rank_matrix(table.rows), o);
        DiagnosticsReport report;
        report.spp = stress_per_point(solution);
        report.default_distances = default_option_distances(solution, table, c);
        const auto dir = fixture::scratch_dir(fmt::format("threads{}", threads));
        write_outputs(dir, {&table, &c, &solution, &report});
        manifests[threads == 1 ? 0 : 1] = slurp(dir / "manifest.json");
        const auto j = nlohmann::json::parse(slurp(dir / "unfolding.json"));
        CHECK(j["universes"].size() == table.size());
    }
    CHECK(manifests[0] == manifests[1]);
}
