#include "benchfold/cli.hpp"

#include "benchfold/diagnostics.hpp"
#include "benchfold/errors.hpp"
#include "benchfold/io.hpp"
#include "benchfold/parallel.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cstdlib>
#include <ostream>
#include <set>
#include <thread>

namespace benchfold {

namespace {

struct Globals {
    std::string config;
    std::string results;
    std::string datasets;
    std::string out = "benchfold-out";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

struct Study {
    StudyConfig config;
    PerformanceTensor tensor;
};

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("BENCHFOLD_SEED");
    if (!s || !*s) return std::nullopt;
    std::uint64_t v = 0;
    const std::string_view sv(s);
    auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc() || p != sv.data() + sv.size())
        throw DataError(fmt::format("BENCHFOLD_SEED: '{}' is not a nonnegative integer", sv));
    return v;
}

// Explicit value, else the config's, else BENCHFOLD_SEED, else 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config) {
    if (flag) return *flag;
    if (config) return *config;
    return env_seed().value_or(0);
}

StudyConfig load_config(const Globals& g) {
    if (g.config.empty()) throw DataError("--config is required");
    return parse_config(g.config);
}

Study load_study(const Globals& g, std::ostream& err, bool strict = true) {
    Study s{load_config(g), {}};
    const std::filesystem::path results = !g.results.empty() ? std::filesystem::path(g.results)
                                          : s.config.results ? *s.config.results
                                                             : throw DataError("no results file (--results or inputs.results)");
    const std::filesystem::path datasets = !g.datasets.empty() ? std::filesystem::path(g.datasets)
                                           : s.config.datasets ? *s.config.datasets
                                                               : throw DataError("no datasets file (--datasets or inputs.datasets)");
    s.tensor = build_tensor(parse_results(results), parse_datasets(datasets), s.config.measures);
    if (strict) {
        const auto violations = validate_tensor(s.tensor);
        for (const auto& v : violations) err << v.where << ": " << v.message << "\n";
        if (!violations.empty()) throw DataError(fmt::format("{} validation problem(s)", violations.size()));
    }
    return s;
}

UnfoldOptions unfold_options(const Study& s, const Globals& g, std::optional<int> dim) {
    UnfoldOptions o = s.config.unfold;
    if (!s.config.unfold_seed_set) o.seed = resolve_seed(std::nullopt, std::nullopt);
    if (dim) o.dim = *dim;
    o.threads = g.threads;
    return o;
}

RankingTable multiverse_table(const Study& s, const Globals& g, std::ostream& err) {
    RankingTable t = run_multiverse(s.tensor, s.config.multiverse, g.threads);
    for (const auto& w : t.warnings) err << "warning: " << w << "\n";
    return t;
}

UnfoldingSolution unfold_table(const RankingTable& t, const UnfoldOptions& o, std::ostream& err) {
    if (t.size() == 0) throw DataError("no universes to unfold");
    if (o.dim > static_cast<int>(t.methods.size()))
        throw DataError(fmt::format("--dim {} exceeds the number of methods ({})", o.dim, t.methods.size()));
    UnfoldingSolution sol = fit(rank_matrix(t.rows), o);
    if (!sol.converged) err << fmt::format("warning: unfolding stopped after {} iterations\n", sol.iterations);
    return sol;
}

std::vector<int> scree_dims(const StudyConfig& c, std::size_t methods) {
    if (!c.diagnostics.scree_dims.empty()) return c.diagnostics.scree_dims;
    std::vector<int> dims;
    for (int d = 1; d <= std::min<int>(static_cast<int>(methods) - 1, 5); ++d) dims.push_back(d);
    return dims;
}

DiagnosticsReport diagnose(const Study& s, const Globals& g, const RankingTable& t, const UnfoldingSolution& sol,
                           const UnfoldOptions& o, std::optional<int> permutations, std::optional<std::uint64_t> seed,
                           std::ostream& err) {
    const Matrix delta = rank_matrix(t.rows);
    DiagnosticsReport r;
    PermutationOptions p;
    p.n_perm = permutations.value_or(s.config.diagnostics.permutations);
    p.seed = resolve_seed(seed, s.config.diagnostics.seed);
    p.scheme = s.config.diagnostics.scheme;
    p.n_starts = s.config.diagnostics.permutation_starts;
    p.threads = g.threads;
    r.permutation = permutation_test(delta, o, p, sol.stress_penalized);
    r.spp = stress_per_point(sol, o.weights ? &*o.weights : nullptr);
    if (const auto dims = scree_dims(s.config, t.methods.size()); !dims.empty()) {
        r.scree = scree(delta, o, dims);
        for (const auto& w : r.scree->warnings) err << "warning: " << w << "\n";
    }
    r.default_distances = default_option_distances(sol, t, s.config.multiverse);
    return r;
}

std::vector<Trajectory> stepwise_all(const Study& s, const Globals& g, const std::vector<std::string>& methods) {
    std::vector<Trajectory> out(methods.size());
    parallel_for(methods.size(), g.threads,
                 [&](std::size_t i) { out[i] = stepwise_optimize(s.tensor, s.config.multiverse, methods[i]); });
    return out;
}

std::vector<SampledRanking> sample_rankings(const Study& s, const Globals& g, int permutations, std::uint64_t seed) {
    const auto groups =
        sample_prefix_groups(s.tensor.num_datasets(), static_cast<std::size_t>(permutations), seed);
    std::vector<SampledRanking> out(groups.size());
    parallel_for(groups.size(), g.threads, [&](std::size_t i) {
        out[i] = {groups[i], evaluate_on_datasets(s.tensor, groups[i], s.config.multiverse.defaults)};
    });
    return out;
}

void report(std::ostream& out, const std::filesystem::path& dir, const std::vector<ManifestEntry>& manifest) {
    for (const auto& e : manifest) out << (dir / e.name).string() << "\n";
}

std::array<Choice, 4> parse_order(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        parts.push_back(s.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    std::array<Choice, 4> order{};
    std::set<Choice> seen;
    if (parts.size() != 4) throw DataError("--order: expected four comma-separated choices");
    for (std::size_t i = 0; i < 4; ++i) {
        order[i] = choice_from_string(parts[i]);
        if (!seen.insert(order[i]).second) throw DataError(fmt::format("--order: '{}' appears twice", parts[i]));
    }
    return order;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiverse analysis and ordinal unfolding of benchmark results", "benchfold"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Study configuration (JSON)");
    app.add_option("--results", g.results, "Long-format results CSV (overrides the config)");
    app.add_option("--datasets", g.datasets, "Dataset metadata CSV (overrides the config)");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Check config and input files");
    auto* multiverse = app.add_subcommand("multiverse", "Rank methods in every universe");

    auto* stepwise = app.add_subcommand("stepwise", "Greedy per-choice optimisation for one method");
    std::string method, order;
    stepwise->add_option("--method", method, "Target method id, or 'all'")->required();
    stepwise->add_option("--order", order, "Choice order, e.g. imputation,aggregation,measure,datasets");

    auto* unfold = app.add_subcommand("unfold", "Unfold the ranking table");
    std::optional<int> dim;
    unfold->add_option("--dim", dim, "Dimensions")->check(CLI::PositiveNumber);

    auto* diag = app.add_subcommand("diagnose", "Unfold and compute fit diagnostics");
    std::optional<int> permutations;
    std::optional<std::uint64_t> seed;
    diag->add_option("--permutations", permutations, "Permutations for the permutation test")->check(CLI::Range(19, 1000000));
    diag->add_option("--seed", seed, "Permutation seed");

    auto* sample = app.add_subcommand("sample-datasets", "Default-universe rankings on random dataset prefixes");
    std::optional<int> sample_perms;
    std::optional<std::uint64_t> sample_seed;
    sample->add_option("--permutations", sample_perms, "Random dataset orders")->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_seed, "Sampling seed");

    auto* all = app.add_subcommand("all", "Run every stage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    const std::filesystem::path dir(g.out);
    try {
        if (validate->parsed()) {
            Study s = load_study(g, err, false);
            const auto violations = validate_tensor(s.tensor);
            for (const auto& v : violations) err << v.where << ": " << v.message << "\n";
            if (!violations.empty()) return 1;
            out << fmt::format("ok: {} datasets, {} methods, {} measures, {} universes\n", s.tensor.num_datasets(),
                               s.tensor.num_methods(), s.tensor.num_measures(),
                               enumerate_universes(s.config.multiverse).size());
            return 0;
        }

        Study s = load_study(g, err);
        const MultiverseConfig& mv = s.config.multiverse;

        if (multiverse->parsed()) {
            const RankingTable t = multiverse_table(s, g, err);
            report(out, dir, write_outputs(dir, {.table = &t, .config = &mv}));
        } else if (stepwise->parsed()) {
            if (!order.empty()) s.config.multiverse.stepwise_order = parse_order(order);
            std::vector<std::string> methods = method == "all" ? s.tensor.methods() : std::vector{method};
            if (method != "all" && !s.tensor.method_index(method))
                throw DataError(fmt::format("--method: unknown method '{}'", method));
            const auto ts = stepwise_all(s, g, methods);
            report(out, dir, write_outputs(dir, {.trajectories = &ts}));
        } else if (unfold->parsed()) {
            const RankingTable t = multiverse_table(s, g, err);
            const UnfoldOptions o = unfold_options(s, g, dim);
            const UnfoldingSolution sol = unfold_table(t, o, err);
            report(out, dir, write_outputs(dir, {.table = &t, .config = &mv, .solution = &sol}));
        } else if (diag->parsed()) {
            const RankingTable t = multiverse_table(s, g, err);
            const UnfoldOptions o = unfold_options(s, g, std::nullopt);
            const UnfoldingSolution sol = unfold_table(t, o, err);
            const DiagnosticsReport r = diagnose(s, g, t, sol, o, permutations, seed, err);
            report(out, dir,
                   write_outputs(dir, {.table = &t, .config = &mv, .solution = &sol, .diagnostics = &r}));
        } else if (sample->parsed()) {
            const int n = sample_perms.value_or(s.config.sampling.permutations);
            const auto samples = sample_rankings(s, g, n, resolve_seed(sample_seed, s.config.sampling.seed));
            report(out, dir, write_outputs(dir, {.samples = &samples, .tensor = &s.tensor}));
        } else if (all->parsed()) {
            const RankingTable t = multiverse_table(s, g, err);
            const UnfoldOptions o = unfold_options(s, g, std::nullopt);
            const UnfoldingSolution sol = unfold_table(t, o, err);
            const DiagnosticsReport r = diagnose(s, g, t, sol, o, std::nullopt, std::nullopt, err);
            const auto ts = stepwise_all(s, g, s.tensor.methods());
            const auto samples = sample_rankings(s, g, s.config.sampling.permutations,
                                                 resolve_seed(std::nullopt, s.config.sampling.seed));
            report(out, dir,
                   write_outputs(dir, {.table = &t,
                                       .config = &mv,
                                       .solution = &sol,
                                       .diagnostics = &r,
                                       .trajectories = &ts,
                                       .samples = &samples,
                                       .tensor = &s.tensor}));
        }
        return 0;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const StructuralError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const DegenerateInput& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace benchfold
