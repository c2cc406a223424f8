#include "benchfold/multiverse.hpp"

#include "benchfold/errors.hpp"
#include "benchfold/parallel.hpp"
#include "benchfold/rng.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <fmt/core.h>

namespace benchfold {

namespace {

std::string_view to_string(Characteristic c) {
    switch (c) {
    case Characteristic::clin: return "clin";
    case Characteristic::n: return "n";
    case Characteristic::n_eff: return "n_eff";
    case Characteristic::p: return "p";
    }
    return {};
}

double characteristic_value(const DatasetMeta& d, Characteristic c) {
    switch (c) {
    case Characteristic::clin: return static_cast<double>(d.clin);
    case Characteristic::n: return static_cast<double>(d.n);
    case Characteristic::n_eff: return static_cast<double>(d.n_eff);
    case Characteristic::p: return static_cast<double>(d.p);
    }
    return 0.0;
}

} // namespace

std::string DatasetFilter::key() const {
    if (kind == Kind::all) return "all";
    return fmt::format("{}:{}", to_string(characteristic), side == Side::below ? "below" : "at_or_above");
}

DatasetFilter filter_from_key(std::string_view key) {
    if (key == "all") return {};
    const auto colon = key.find(':');
    if (colon == std::string_view::npos) throw DataError(fmt::format("unknown dataset filter '{}'", key));
    DatasetFilter f;
    f.kind = DatasetFilter::Kind::median_split;
    const auto ch = key.substr(0, colon);
    const auto side = key.substr(colon + 1);
    if (ch == "clin") f.characteristic = Characteristic::clin;
    else if (ch == "n") f.characteristic = Characteristic::n;
    else if (ch == "n_eff") f.characteristic = Characteristic::n_eff;
    else if (ch == "p") f.characteristic = Characteristic::p;
    else throw DataError(fmt::format("unknown dataset characteristic '{}'", ch));
    if (side == "below") f.side = Side::below;
    else if (side == "at_or_above") f.side = Side::at_or_above;
    else throw DataError(fmt::format("unknown split side '{}'", side));
    return f;
}

std::vector<std::size_t> apply_filter(const std::vector<DatasetMeta>& datasets, const DatasetFilter& filter) {
    if (datasets.empty()) throw StructuralError("apply_filter: no datasets");
    std::vector<std::size_t> keep;
    if (filter.kind == DatasetFilter::Kind::all) {
        keep.resize(datasets.size());
        std::iota(keep.begin(), keep.end(), std::size_t{0});
        return keep;
    }
    std::vector<double> values;
    values.reserve(datasets.size());
    for (const auto& d : datasets) values.push_back(characteristic_value(d, filter.characteristic));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool below = values[i] < median;
        if (below == (filter.side == Side::below)) keep.push_back(i);
    }
    return keep;
}

std::string_view to_string(Choice c) {
    switch (c) {
    case Choice::datasets: return "datasets";
    case Choice::measure: return "measure";
    case Choice::imputation: return "imputation";
    case Choice::aggregation: return "aggregation";
    }
    return {};
}

Choice choice_from_string(std::string_view s) {
    if (s == "datasets") return Choice::datasets;
    if (s == "measure") return Choice::measure;
    if (s == "imputation") return Choice::imputation;
    if (s == "aggregation") return Choice::aggregation;
    throw DataError(fmt::format("unknown choice '{}'", s));
}

std::string Universe::key() const {
    return fmt::format("{}|{}|{}|{}", filter.key(), measure, imputation.key(), aggregation.key());
}

std::string Universe::option_key(Choice c) const {
    switch (c) {
    case Choice::datasets: return filter.key();
    case Choice::measure: return measure;
    case Choice::imputation: return imputation.key();
    case Choice::aggregation: return aggregation.key();
    }
    return {};
}

std::size_t MultiverseConfig::num_options(Choice c) const {
    switch (c) {
    case Choice::datasets: return filters.size();
    case Choice::measure: return measures.size();
    case Choice::imputation: return imputations.size();
    case Choice::aggregation: return aggregations.size();
    }
    return 0;
}

Universe MultiverseConfig::with_option(const Universe& u, Choice c, std::size_t index) const {
    Universe out = u;
    switch (c) {
    case Choice::datasets: out.filter = filters.at(index); break;
    case Choice::measure: out.measure = measures.at(index); break;
    case Choice::imputation: out.imputation = imputations.at(index); break;
    case Choice::aggregation: out.aggregation = aggregations.at(index); break;
    }
    return out;
}

std::vector<std::string> check_config(const MultiverseConfig& c) {
    std::vector<std::string> problems;
    for (Choice ch : {Choice::datasets, Choice::measure, Choice::imputation, Choice::aggregation}) {
        const auto name = to_string(ch);
        if (c.num_options(ch) == 0) {
            problems.push_back(fmt::format("{}: option list is empty", name));
            continue;
        }
        bool found = false;
        std::set<std::string> keys;
        for (std::size_t i = 0; i < c.num_options(ch); ++i) {
            const auto key = c.with_option(c.defaults, ch, i).option_key(ch);
            if (!keys.insert(key).second) problems.push_back(fmt::format("{}: duplicate option '{}'", name, key));
            found = found || key == c.defaults.option_key(ch);
        }
        if (!found)
            problems.push_back(fmt::format("{}: default '{}' is not among the options", name, c.defaults.option_key(ch)));
    }
    std::set<Choice> order(c.stepwise_order.begin(), c.stepwise_order.end());
    if (order.size() != 4) problems.push_back("stepwise_order: must be a permutation of the four choices");
    return problems;
}

std::vector<Universe> enumerate_universes(const MultiverseConfig& c) {
    std::vector<Universe> out;
    out.reserve(c.filters.size() * c.measures.size() * c.imputations.size() * c.aggregations.size());
    for (const auto& f : c.filters)
        for (const auto& m : c.measures)
            for (const auto& i : c.imputations)
                for (const auto& a : c.aggregations) out.push_back(Universe{f, m, i, a});
    return out;
}

PerfMatrix build_matrix(const PerformanceTensor& tensor, std::span<const std::size_t> datasets,
                        std::string_view measure, const ImputationStrategy& imputation) {
    const auto q = tensor.measure_index(measure);
    if (!q) throw DataError(fmt::format("unknown measure '{}'", measure));
    PerfMatrix m;
    m.measure = tensor.measures()[*q];
    m.methods = tensor.methods();
    m.values.reserve(datasets.size() * tensor.num_methods());
    for (std::size_t d : datasets) {
        m.datasets.push_back(tensor.datasets().at(d).id);
        for (std::size_t j = 0; j < tensor.num_methods(); ++j)
            m.values.push_back(impute_cell(tensor.cell(d, j, *q), m.measure, imputation));
    }
    return m;
}

Ranking evaluate_on_datasets(const PerformanceTensor& tensor, std::span<const std::size_t> datasets, const Universe& u) {
    if (datasets.empty()) throw DataError(fmt::format("universe {} selects no datasets", u.key()));
    return aggregate(build_matrix(tensor, datasets, u.measure, u.imputation), u.aggregation);
}

Ranking evaluate_universe(const PerformanceTensor& tensor, const Universe& u) {
    const auto keep = apply_filter(tensor.datasets(), u.filter);
    return evaluate_on_datasets(tensor, keep, u);
}

std::optional<std::size_t> RankingTable::find(const Universe& u) const {
    for (std::size_t i = 0; i < universes.size(); ++i)
        if (universes[i] == u) return i;
    return std::nullopt;
}

RankingTable run_multiverse(const PerformanceTensor& tensor, const MultiverseConfig& config, unsigned threads) {
    const auto universes = enumerate_universes(config);
    std::vector<std::optional<Ranking>> results(universes.size());
    std::vector<std::string> errors(universes.size());
    parallel_for(universes.size(), threads, [&](std::size_t i) {
        try {
            results[i] = evaluate_universe(tensor, universes[i]);
        } catch (const DataError& e) {
            errors[i] = e.what();
        }
    });

    RankingTable table;
    table.methods = tensor.methods();
    for (std::size_t i = 0; i < universes.size(); ++i) {
        if (results[i]) {
            table.universes.push_back(universes[i]);
            table.rows.push_back(std::move(*results[i]));
        } else {
            table.warnings.push_back(fmt::format("omitted {}: {}", universes[i].key(), errors[i]));
        }
    }
    return table;
}

std::vector<RankDistribution> rank_distribution(const RankingTable& table) {
    std::vector<RankDistribution> out;
    for (std::size_t j = 0; j < table.methods.size(); ++j) {
        RankDistribution d;
        d.method = table.methods[j];
        for (const auto& row : table.rows) d.counts[row.ranks[j]] += 1;
        if (!d.counts.empty()) {
            d.min_rank = d.counts.begin()->first;
            d.max_rank = d.counts.rbegin()->first;
        }
        out.push_back(std::move(d));
    }
    return out;
}

double performance_gap(const PerformanceTensor& tensor, const Universe& u, std::string_view method) {
    const auto j = tensor.method_index(method);
    if (!j) throw DataError(fmt::format("unknown method '{}'", method));
    const auto keep = apply_filter(tensor.datasets(), u.filter);
    if (keep.empty()) throw DataError(fmt::format("universe {} selects no datasets", u.key()));
    const auto m = build_matrix(tensor, keep, u.measure, u.imputation);
    double sum = 0.0;
    for (std::size_t l = 0; l < m.rows(); ++l) sum += m.at(l, *j);
    const double mean = sum / static_cast<double>(m.rows());
    return (mean - m.measure.best_value) / (m.measure.random_value - m.measure.best_value);
}

Trajectory stepwise_optimize(const PerformanceTensor& tensor, const MultiverseConfig& config, std::string_view method) {
    if (!tensor.method_index(method)) throw DataError(fmt::format("unknown method '{}'", method));

    Trajectory t;
    t.method = std::string(method);
    t.start = config.defaults;
    t.start_rank = evaluate_universe(tensor, config.defaults).rank_of(method);
    t.start_score = performance_gap(tensor, config.defaults, method);

    Universe current = config.defaults;
    double rank = t.start_rank;
    double score = t.start_score;
    for (Choice choice : config.stepwise_order) {
        Universe best = current;
        double best_rank = rank;
        double best_score = score;
        for (std::size_t i = 0; i < config.num_options(choice); ++i) {
            Universe candidate = config.with_option(current, choice, i);
            if (candidate == current) continue;
            double r, s;
            try {
                r = evaluate_universe(tensor, candidate).rank_of(method);
                s = performance_gap(tensor, candidate, method);
            } catch (const DataError&) {
                continue; // option leaves no datasets
            }
            if (r < best_rank || (r == best_rank && s < best_score)) {
                best = std::move(candidate);
                best_rank = r;
                best_score = s;
            }
        }
        t.steps.push_back(StepRecord{choice, best.option_key(choice), best_rank, best_score, best_rank < rank});
        current = std::move(best);
        rank = best_rank;
        score = best_score;
    }
    t.final_universe = current;
    t.final_rank = rank;
    return t;
}

std::vector<std::vector<std::size_t>> sample_prefix_groups(std::size_t num_datasets, std::size_t n_perms,
                                                           std::uint64_t seed) {
    if (num_datasets == 0) throw StructuralError("sample_prefix_groups: no datasets");
    if (n_perms == 0) throw StructuralError("sample_prefix_groups: n_perms must be positive");
    std::vector<std::vector<std::size_t>> groups;
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::size_t> perm(num_datasets);
    for (std::size_t k = 0; k < n_perms; ++k) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(derive_seed(seed, k));
        rng.shuffle(std::span<std::size_t>(perm));
        for (std::size_t l = 1; l < num_datasets; ++l) {
            std::vector<std::size_t> group(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(l));
            std::sort(group.begin(), group.end());
            if (seen.insert(group).second) groups.push_back(std::move(group));
        }
    }
    std::vector<std::size_t> full(num_datasets);
    std::iota(full.begin(), full.end(), std::size_t{0});
    groups.push_back(std::move(full));
    return groups;
}

} // namespace benchfold
