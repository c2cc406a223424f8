#include "benchfold/cli.hpp"
#include "fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace {

struct Run {
    int status;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "benchfold");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = benchfold::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

std::filesystem::path small_config(const std::filesystem::path& dir) {
    const auto demo = fixture::source_dir() / "data" / "demo";
    nlohmann::json j = {
        {"measures",
         {{{"id", "ibrier"}, {"orientation", "lower_better"}, {"random_value", 0.25}, {"best_value", 0}},
          {{"id", "cindex"}, {"orientation", "higher_better"}, {"random_value", 0.5}, {"best_value", 1}}}},
        {"multiverse",
         {{"filters", {"all", "n:below"}},
          {"imputations", {"threshold20"}},
          {"aggregations", {"mean", "median"}},
          {"defaults", {{"datasets", "all"}, {"measure", "ibrier"}, {"aggregation", "mean"}}}}},
        {"unfolding", {{"n_starts", 1}, {"max_iter", 500}, {"seed", 3}}},
        {"inputs", {{"results", (demo / "results.csv").string()}, {"datasets", (demo / "datasets.csv").string()}}}};
    const auto p = dir / "small.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

} // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).status == 0);
    const auto r = run({"multiverse", "--bogus"});
    CHECK(r.status == 1);
    CHECK_FALSE(r.err.empty());
    CHECK(run({}).status == 1);
    CHECK(run({"diagnose", "--permutations", "5"}).status == 1);
}

TEST_CASE("validate") {
    const auto dir = fixture::scratch_dir("cli_validate");
    const auto cfg = small_config(dir);
    CHECK(run({"--config", cfg.string(), "validate"}).status == 0);
    const auto bad = dir / "bad.csv";
    std::ofstream(bad) << "dataset_id,method_id,measure_id,iteration,value\nds01,coxph,ibrier,0,oops\n";
    const auto r = run({"--config", cfg.string(), "--results", bad.string(), "validate"});
    CHECK(r.status == 1);
    CHECK(r.err.find("bad.csv:2") != std::string::npos);
    CHECK(run({"--config", (dir / "missing.json").string(), "validate"}).status == 1);
}

TEST_CASE("unfold --dim 1 emits a one-dimensional solution") {
    const auto dir = fixture::scratch_dir("cli_unfold");
    const auto cfg = small_config(dir);
    const auto out = dir / "out";
    const auto r = run({"--config", cfg.string(), "--out", out.string(), "unfold", "--dim", "1"});
    REQUIRE(r.status == 0);
    std::ifstream in(out / "unfolding.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["dim"] == 1);
    CHECK(j["universes"].size() == 8);
    CHECK(j["ideal"][0].size() == 1);
    CHECK(std::filesystem::exists(out / "manifest.json"));
}

TEST_CASE("stepwise for every method") {
    const auto dir = fixture::scratch_dir("cli_stepwise");
    const auto cfg = small_config(dir);
    const auto out = dir / "out";
    REQUIRE(run({"--config", cfg.string(), "--out", out.string(), "stepwise", "--method", "all"}).status == 0);
    std::ifstream in(out / "stepwise.json");
    CHECK(nlohmann::json::parse(in)["trajectories"].size() == 6);
    CHECK(run({"--config", cfg.string(), "--out", out.string(), "stepwise", "--method", "nope"}).status == 1);
}
