#include "benchfold/io.hpp"

#include "benchfold/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace benchfold {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError(fmt::format("cannot read '{}'", path.string()));
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
}

// Splits one CSV record. Fields may be double-quoted with "" as an escaped quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    std::size_t i = 0;
    while (true) {
        field.clear();
        if (i < line.size() && line[i] == '"') {
            ++i;
            while (true) {
                if (i >= line.size()) return std::nullopt;
                if (line[i] == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                field += line[i++];
            }
            if (i < line.size() && line[i] != ',') return std::nullopt;
        } else {
            while (i < line.size() && line[i] != ',') field += line[i++];
        }
        out.push_back(field);
        if (i >= line.size()) break;
        ++i;  // comma
    }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

struct Line {
    std::size_t number;
    std::vector<std::string> fields;
};

// Non-blank records after the header, which must equal `header`.
std::vector<Line> read_records(std::string_view text, std::string_view origin, const std::vector<std::string>& header) {
    std::vector<Line> out;
    std::size_t number = 0;
    bool seen_header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        auto fields = split_csv(line);
        if (!fields) throw DataError(fmt::format("{}:{}: unterminated quoted field", origin, number));
        if (!seen_header) {
            if (*fields != header)
                throw DataError(fmt::format("{}:{}: expected header '{}'", origin, number, fmt::join(header, ",")));
            seen_header = true;
        } else {
            if (fields->size() != header.size())
                throw DataError(fmt::format("{}:{}: expected {} fields, got {}", origin, number, header.size(),
                                            fields->size()));
            out.push_back({number, std::move(*fields)});
        }
        if (end == text.size()) break;
    }
    if (!seen_header) throw DataError(fmt::format("{}: missing header", origin));
    return out;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> to_int(std::string_view s) {
    Int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

void note_id(std::vector<std::string>& ids, std::set<std::string>& seen, const std::string& id) {
    if (seen.insert(id).second) ids.push_back(id);
}

} // namespace

ResultsFile parse_results_text(std::string_view text, std::string_view origin) {
    const auto records =
        read_records(text, origin, {"dataset_id", "method_id", "measure_id", "iteration", "value"});

    struct Slot {
        std::optional<double> value;
        std::size_t line;
    };
    std::map<ResultsFile::Key, std::map<std::int64_t, Slot>> slots;
    std::map<ResultsFile::Key, std::size_t> first_line;
    ResultsFile out;
    std::set<std::string> ds, ms, qs;

    for (const auto& [number, f] : records) {
        for (std::size_t k = 0; k < 3; ++k)
            if (f[k].empty()) throw DataError(fmt::format("{}:{}: empty id", origin, number));
        const auto iteration = to_int<std::int64_t>(f[3]);
        if (!iteration || *iteration < 0)
            throw DataError(fmt::format("{}:{}: iteration '{}' is not a nonnegative integer", origin, number, f[3]));
        std::optional<double> value;
        if (!f[4].empty()) {
            value = to_double(f[4]);
            if (!value) throw DataError(fmt::format("{}:{}: value '{}' is not numeric", origin, number, f[4]));
        }
        ResultsFile::Key key{f[0], f[1], f[2]};
        auto [it, inserted] = slots[key].try_emplace(*iteration, Slot{value, number});
        if (!inserted)
            throw DataError(fmt::format("{}:{}: duplicate key ({},{},{},{}) first seen on line {}", origin, number,
                                        f[0], f[1], f[2], *iteration, it->second.line));
        first_line.try_emplace(key, number);
        note_id(out.datasets, ds, f[0]);
        note_id(out.methods, ms, f[1]);
        note_id(out.measures, qs, f[2]);
    }

    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::string>> counts;
    for (auto& [key, cell] : slots) {
        const auto& [d, m, q] = key;
        const std::size_t line = first_line.at(key);
        if (static_cast<std::size_t>(cell.rbegin()->first) + 1 != cell.size())
            throw DataError(fmt::format("{}:{}: iterations of ({},{},{}) are not contiguous from 0", origin, line, d,
                                        m, q));
        auto [c, inserted] = counts.try_emplace({d, m}, cell.size(), q);
        if (!inserted && c->second.first != cell.size())
            throw DataError(fmt::format("{}:{}: ({},{}) has {} iterations for {} but {} for {}", origin, line, d, m,
                                        cell.size(), q, c->second.first, c->second.second));
        Cell values;
        values.reserve(cell.size());
        for (const auto& [_, slot] : cell) values.push_back(slot.value);
        out.cells.emplace(key, std::move(values));
    }
    return out;
}

ResultsFile parse_results(const fs::path& path) { return parse_results_text(read_file(path), path.string()); }

std::vector<DatasetMeta> parse_datasets_text(std::string_view text, std::string_view origin) {
    const auto records = read_records(text, origin, {"dataset_id", "clin", "n", "n_eff", "p"});
    std::vector<DatasetMeta> out;
    std::set<std::string> seen;
    static constexpr const char* names[] = {"clin", "n", "n_eff", "p"};
    for (const auto& [number, f] : records) {
        if (f[0].empty()) throw DataError(fmt::format("{}:{}: empty dataset_id", origin, number));
        if (!seen.insert(f[0]).second)
            throw DataError(fmt::format("{}:{}: duplicate dataset_id '{}'", origin, number, f[0]));
        std::int64_t v[4];
        for (std::size_t k = 0; k < 4; ++k) {
            const auto x = to_int<std::int64_t>(f[k + 1]);
            if (!x) throw DataError(fmt::format("{}:{}: {} '{}' is not an integer", origin, number, names[k], f[k + 1]));
            v[k] = *x;
        }
        out.push_back({f[0], v[0], v[1], v[2], v[3]});
    }
    return out;
}

std::vector<DatasetMeta> parse_datasets(const fs::path& path) {
    return parse_datasets_text(read_file(path), path.string());
}

PerformanceTensor build_tensor(const ResultsFile& results, const std::vector<DatasetMeta>& datasets,
                               const std::vector<MeasureSpec>& measures) {
    std::set<std::string> known_d, known_q;
    for (const auto& d : datasets) known_d.insert(d.id);
    for (const auto& q : measures) known_q.insert(q.id);
    for (const auto& d : results.datasets)
        if (!known_d.contains(d)) throw DataError(fmt::format("results: dataset '{}' has no metadata", d));
    for (const auto& q : results.measures)
        if (!known_q.contains(q)) throw DataError(fmt::format("results: measure '{}' is not configured", q));

    std::vector<Cell> cells;
    cells.reserve(datasets.size() * results.methods.size() * measures.size());
    for (const auto& d : datasets)
        for (const auto& m : results.methods)
            for (const auto& q : measures) {
                auto it = results.cells.find({d.id, m, q.id});
                cells.push_back(it == results.cells.end() ? Cell{} : it->second);
            }
    return PerformanceTensor(datasets, results.methods, measures, std::move(cells));
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_results(const PerformanceTensor& t) {
    std::string out = "dataset_id,method_id,measure_id,iteration,value\n";
    for (std::size_t d = 0; d < t.num_datasets(); ++d)
        for (std::size_t m = 0; m < t.num_methods(); ++m)
            for (std::size_t q = 0; q < t.num_measures(); ++q) {
                const auto cell = t.cell(d, m, q);
                for (std::size_t i = 0; i < cell.size(); ++i)
                    out += fmt::format("{},{},{},{},{}\n", csv_field(t.datasets()[d].id), csv_field(t.methods()[m]),
                                       csv_field(t.measures()[q].id), i,
                                       cell[i] ? format_double(*cell[i]) : std::string());
            }
    return out;
}

// ---------------------------------------------------------------- config

namespace {

class Field {
public:
    Field(const ojson& j, std::string path, std::string_view origin) : j_(j), path_(std::move(path)), origin_(origin) {}

    [[noreturn]] void fail(std::string_view msg) const {
        throw DataError(fmt::format("{}: {}: {}", origin_, path_.empty() ? "<root>" : path_, msg));
    }

    const ojson& json() const { return j_; }
    const std::string& path() const { return path_; }
    std::string_view origin() const { return origin_; }

    Field at(std::string_view key) const {
        return {j_.at(std::string(key)), path_.empty() ? std::string(key) : path_ + "." + std::string(key), origin_};
    }
    Field at(std::size_t i) const { return {j_.at(i), fmt::format("{}[{}]", path_, i), origin_}; }

    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    void object(std::initializer_list<std::string_view> allowed) const {
        if (!j_.is_object()) fail("expected an object");
        for (const auto& [k, _] : j_.items())
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                Field(j_.at(k), path_.empty() ? k : path_ + "." + k, origin_).fail("unknown key");
    }

    std::size_t array() const {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }

    std::string str() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    double number() const {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }

    std::int64_t integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<std::int64_t>();
    }

    std::uint64_t seed() const {
        if (j_.is_number_unsigned()) return j_.get<std::uint64_t>();
        if (j_.is_number_integer() && j_.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j_.get<std::int64_t>());
        fail("expected a nonnegative integer");
    }

    int positive_int() const {
        const auto v = integer();
        if (v < 1 || v > 1'000'000'000) fail("expected a positive integer");
        return static_cast<int>(v);
    }

    template <class F>
    auto convert(F&& f) const -> decltype(f(std::string_view{})) {
        const std::string s = str();
        try {
            return f(s);
        } catch (const DataError& e) {
            fail(e.what());
        }
    }

private:
    const ojson& j_;
    std::string path_;
    std::string_view origin_;
};

MeasureSpec parse_measure(const Field& f) {
    f.object({"id", "orientation", "random_value", "best_value"});
    for (auto key : {"id", "orientation", "random_value", "best_value"})
        if (!f.has(key)) f.fail(fmt::format("missing key '{}'", key));
    MeasureSpec m;
    m.id = f.at("id").str();
    m.orientation = f.at("orientation").convert(orientation_from_string);
    m.random_value = f.at("random_value").number();
    m.best_value = f.at("best_value").number();
    for (const auto& v : validate_measure(m)) f.fail(v.message);
    return m;
}

template <class T, class F>
std::vector<T> parse_list(const Field& f, F&& conv) {
    std::vector<T> out;
    const std::size_t n = f.array();
    for (std::size_t i = 0; i < n; ++i) out.push_back(f.at(i).convert(conv));
    return out;
}

void parse_multiverse(const Field& f, StudyConfig& c) {
    f.object({"filters", "measures", "imputations", "aggregations", "defaults", "stepwise_order"});
    MultiverseConfig& mv = c.multiverse;
    mv.filters = f.has("filters") ? parse_list<DatasetFilter>(f.at("filters"), filter_from_key)
                                  : std::vector<DatasetFilter>{DatasetFilter{}};
    if (f.has("measures")) {
        mv.measures = parse_list<std::string>(f.at("measures"), [](std::string_view s) { return std::string(s); });
        for (std::size_t i = 0; i < mv.measures.size(); ++i)
            if (std::none_of(c.measures.begin(), c.measures.end(), [&](const auto& m) { return m.id == mv.measures[i]; }))
                f.at("measures").at(i).fail(fmt::format("measure '{}' is not defined", mv.measures[i]));
    } else {
        for (const auto& m : c.measures) mv.measures.push_back(m.id);
    }
    for (auto key : {"imputations", "aggregations"})
        if (!f.has(key)) f.fail(fmt::format("missing key '{}'", key));
    mv.imputations = parse_list<ImputationStrategy>(f.at("imputations"), imputation_from_key);
    mv.aggregations = parse_list<AggregationStrategy>(f.at("aggregations"), aggregation_from_key);

    constexpr Choice choices[] = {Choice::datasets, Choice::measure, Choice::imputation, Choice::aggregation};
    for (Choice ch : choices)
        if (mv.num_options(ch) == 0) f.fail(fmt::format("no options for {}", to_string(ch)));

    std::optional<Field> defaults;
    if (f.has("defaults")) {
        defaults.emplace(f.at("defaults"));
        defaults->object({"datasets", "measure", "imputation", "aggregation"});
    }
    mv.defaults = mv.with_option(Universe{}, Choice::datasets, 0);
    for (Choice ch : choices) {
        const std::string name(to_string(ch));
        if (defaults && defaults->has(name)) {
            const Field d = defaults->at(name);
            const std::string key = d.str();
            bool found = false;
            for (std::size_t i = 0; i < mv.num_options(ch) && !found; ++i) {
                Universe u = mv.with_option(mv.defaults, ch, i);
                if (u.option_key(ch) == key) {
                    mv.defaults = u;
                    found = true;
                }
            }
            if (!found) d.fail(fmt::format("default '{}' is not among the options", key));
        } else if (mv.num_options(ch) == 1) {
            mv.defaults = mv.with_option(mv.defaults, ch, 0);
        } else {
            throw DataError(fmt::format("{}: {}.defaults.{}: required when there are several options", f.origin(),
                                        f.path(), name));
        }
    }
    if (f.has("stepwise_order")) {
        const Field o = f.at("stepwise_order");
        auto order = parse_list<Choice>(o, choice_from_string);
        std::set<Choice> distinct(order.begin(), order.end());
        if (order.size() != 4 || distinct.size() != 4) o.fail("must list each of the four choices once");
        std::copy(order.begin(), order.end(), mv.stepwise_order.begin());
    }
    for (const auto& problem : check_config(mv)) f.fail(problem);
}

void parse_unfolding(const Field& f, StudyConfig& c) {
    f.object({"dim", "max_iter", "eps", "penalty_lambda", "penalty_omega", "n_starts", "seed", "tie_rule",
              "conditionality"});
    UnfoldOptions& o = c.unfold;
    if (f.has("dim")) o.dim = f.at("dim").positive_int();
    if (f.has("max_iter")) o.max_iter = f.at("max_iter").positive_int();
    if (f.has("n_starts")) o.n_starts = f.at("n_starts").positive_int();
    if (f.has("eps")) {
        o.eps = f.at("eps").number();
        if (!(o.eps > 0.0)) f.at("eps").fail("must be positive");
    }
    if (f.has("penalty_lambda")) {
        o.penalty_lambda = f.at("penalty_lambda").number();
        if (!(o.penalty_lambda > 0.0 && o.penalty_lambda <= 1.0)) f.at("penalty_lambda").fail("must lie in (0, 1]");
    }
    if (f.has("penalty_omega")) {
        o.penalty_omega = f.at("penalty_omega").number();
        if (!(o.penalty_omega >= 0.0) || !std::isfinite(o.penalty_omega)) f.at("penalty_omega").fail("must be >= 0");
    }
    if (f.has("seed")) {
        o.seed = f.at("seed").seed();
        c.unfold_seed_set = true;
    }
    if (f.has("tie_rule")) {
        o.tie_rule = f.at("tie_rule").convert([](std::string_view s) {
            if (s == "primary") return TieRule::primary;
            if (s == "secondary") return TieRule::secondary;
            throw DataError(fmt::format("unknown tie rule '{}'", s));
        });
    }
    if (f.has("conditionality")) {
        o.conditionality = f.at("conditionality").convert([](std::string_view s) {
            if (s == "row") return Conditionality::row;
            if (s == "matrix") return Conditionality::matrix;
            throw DataError(fmt::format("unknown conditionality '{}'", s));
        });
    }
}

void parse_diagnostics(const Field& f, StudyConfig& c) {
    f.object({"permutations", "seed", "permutation_starts", "scheme", "scree_dims"});
    DiagnosticsSettings& d = c.diagnostics;
    if (f.has("permutations")) {
        d.permutations = f.at("permutations").positive_int();
        if (d.permutations < 19) f.at("permutations").fail("must be at least 19");
    }
    if (f.has("seed")) d.seed = f.at("seed").seed();
    if (f.has("permutation_starts")) d.permutation_starts = f.at("permutation_starts").positive_int();
    if (f.has("scheme")) {
        d.scheme = f.at("scheme").convert([](std::string_view s) {
            if (s == "within_row") return PermutationScheme::within_row;
            if (s == "global") return PermutationScheme::global;
            throw DataError(fmt::format("unknown permutation scheme '{}'", s));
        });
    }
    if (f.has("scree_dims")) {
        const Field s = f.at("scree_dims");
        const std::size_t n = s.array();
        for (std::size_t i = 0; i < n; ++i) d.scree_dims.push_back(s.at(i).positive_int());
    }
}

void parse_sampling(const Field& f, StudyConfig& c) {
    f.object({"permutations", "seed"});
    if (f.has("permutations")) c.sampling.permutations = f.at("permutations").positive_int();
    if (f.has("seed")) c.sampling.seed = f.at("seed").seed();
}

} // namespace

StudyConfig parse_config_text(std::string_view text, std::string_view origin, const fs::path& base_dir) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw DataError(fmt::format("{}: invalid JSON: {}", origin, e.what()));
    }
    const Field root(j, "", origin);
    root.object({"inputs", "measures", "multiverse", "unfolding", "diagnostics", "sampling"});

    StudyConfig c;
    if (!root.has("measures")) root.fail("missing key 'measures'");
    {
        const Field ms = root.at("measures");
        const std::size_t n = ms.array();
        if (n == 0) ms.fail("at least one measure is required");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) {
            c.measures.push_back(parse_measure(ms.at(i)));
            if (!ids.insert(c.measures.back().id).second) ms.at(i).fail("duplicate measure id");
        }
    }
    if (!root.has("multiverse")) root.fail("missing key 'multiverse'");
    parse_multiverse(root.at("multiverse"), c);
    if (root.has("unfolding")) parse_unfolding(root.at("unfolding"), c);
    if (root.has("diagnostics")) parse_diagnostics(root.at("diagnostics"), c);
    if (root.has("sampling")) parse_sampling(root.at("sampling"), c);
    if (root.has("inputs")) {
        const Field in = root.at("inputs");
        in.object({"results", "datasets"});
        if (in.has("results")) c.results = base_dir / in.at("results").str();
        if (in.has("datasets")) c.datasets = base_dir / in.at("datasets").str();
    }
    return c;
}

StudyConfig parse_config(const fs::path& path) {
    return parse_config_text(read_file(path), path.string(), path.parent_path());
}

// ---------------------------------------------------------------- outputs

namespace {

void dump(const ojson& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
    case ojson::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) out += ",\n";
            first = false;
            out += inner + ojson(k).dump() + ": ";
            dump(v, out, indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case ojson::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        const bool flat = std::none_of(j.begin(), j.end(), [](const ojson& v) { return v.is_structured(); });
        out += flat ? "[" : "[\n";
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += flat ? ", " : ",\n";
            first = false;
            if (!flat) out += inner;
            dump(v, out, indent + 1);
        }
        out += flat ? "]" : "\n" + pad + "]";
        return;
    }
    case ojson::value_t::number_float: {
        const double x = j.get<double>();
        out += std::isfinite(x) ? format_double(x) : "null";
        return;
    }
    default: out += j.dump();
    }
}

std::string dump_json(const ojson& j) {
    std::string out;
    dump(j, out, 0);
    return out + "\n";
}

ojson universe_json(const Universe& u) {
    return ojson{{"key", u.key()},
                 {"datasets", u.filter.key()},
                 {"measure", u.measure},
                 {"imputation", u.imputation.key()},
                 {"aggregation", u.aggregation.key()}};
}

ojson matrix_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string rankings_csv(const RankingTable& t) {
    std::string out = "universe,datasets,measure,imputation,aggregation";
    for (const auto& m : t.methods) out += "," + csv_field(m);
    out += "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Universe& u = t.universes[i];
        out += fmt::format("{},{},{},{},{}", csv_field(u.key()), csv_field(u.filter.key()), csv_field(u.measure),
                           csv_field(u.imputation.key()), csv_field(u.aggregation.key()));
        for (const auto& m : t.methods) out += "," + format_double(t.rows[i].rank_of(m));
        out += "\n";
    }
    return out;
}

std::string_view tie_name(TieRule r) { return r == TieRule::primary ? "primary" : "secondary"; }
std::string_view conditionality_name(Conditionality c) { return c == Conditionality::row ? "row" : "matrix"; }
std::string_view scheme_name(PermutationScheme s) {
    return s == PermutationScheme::within_row ? "within_row" : "global";
}

std::string unfolding_json(const UnfoldingSolution& s, const RankingTable* table, const MultiverseConfig* config) {
    ojson j;
    j["dim"] = s.options.dim;
    if (table) {
        ojson us = ojson::array();
        for (const auto& u : table->universes) us.push_back(universe_json(u));
        j["universes"] = std::move(us);
        j["methods"] = table->methods;
    }
    if (config) j["defaults"] = universe_json(config->defaults);
    j["ideal"] = matrix_json(s.ideal);
    j["objects"] = matrix_json(s.objects);
    j["disparities"] = matrix_json(s.disparities);
    j["distances"] = matrix_json(s.distances);
    ojson transform = ojson::array();
    for (const auto& row : s.transform) {
        ojson r = ojson::array();
        for (const auto& b : row) r.push_back(ojson{{"rank", b.rank}, {"disparity", b.disparity}});
        transform.push_back(std::move(r));
    }
    j["transform"] = std::move(transform);
    j["stress"] = ojson{{"penalized", s.stress_penalized}, {"raw", s.stress_raw}, {"normalized", s.stress_normalized}};
    j["iterations"] = s.iterations;
    j["converged"] = s.converged;
    j["best_start"] = s.best_start;
    const UnfoldOptions& o = s.options;
    j["options"] = ojson{{"dim", o.dim},
                         {"max_iter", o.max_iter},
                         {"eps", o.eps},
                         {"penalty_lambda", o.penalty_lambda},
                         {"penalty_omega", o.penalty_omega},
                         {"n_starts", o.n_starts},
                         {"seed", o.seed},
                         {"tie_rule", tie_name(o.tie_rule)},
                         {"conditionality", conditionality_name(o.conditionality)},
                         {"weighted", o.weights.has_value()}};
    return dump_json(j);
}

std::string diagnostics_json(const DiagnosticsReport& r, const RankingTable* table) {
    ojson j;
    if (r.permutation) {
        const auto& p = *r.permutation;
        ojson pj{{"p_value", p.p_value}, {"n_perm", p.n_perm},          {"observed", p.observed},
                 {"seed", p.seed},       {"scheme", scheme_name(p.scheme)}, {"permuted", p.permuted}};
        j["permutation"] = std::move(pj);
    } else {
        j["permutation"] = nullptr;
    }
    ojson rows = ojson::array(), cols = ojson::array();
    for (std::size_t i = 0; i < r.spp.rows.size(); ++i)
        rows.push_back(ojson{{"universe", table && i < table->size() ? table->universes[i].key() : std::to_string(i)},
                             {"share", r.spp.rows[i]}});
    for (std::size_t i = 0; i < r.spp.cols.size(); ++i)
        cols.push_back(ojson{{"method", table && i < table->methods.size() ? table->methods[i] : std::to_string(i)},
                             {"share", r.spp.cols[i]}});
    j["spp"] = ojson{{"rows", std::move(rows)}, {"cols", std::move(cols)}};
    if (r.scree) {
        ojson pts = ojson::array();
        for (const auto& [dim, v] : r.scree->stress) pts.push_back(ojson{{"dim", dim}, {"stress", v}});
        j["scree"] = ojson{{"stress", std::move(pts)}, {"warnings", r.scree->warnings}};
    } else {
        j["scree"] = nullptr;
    }
    return dump_json(j);
}

std::string distances_csv(const std::vector<DefaultDistance>& ds) {
    std::string out = "choice,alternative,context,distance\n";
    for (const auto& d : ds)
        out += fmt::format("{},{},{},{}\n", to_string(d.choice), csv_field(d.alternative), csv_field(d.context),
                           format_double(d.distance));
    return out;
}

std::string stepwise_json(const std::vector<Trajectory>& ts) {
    ojson arr = ojson::array();
    for (const auto& t : ts) {
        ojson steps = ojson::array();
        for (const auto& s : t.steps)
            steps.push_back(ojson{{"choice", to_string(s.choice)},
                                  {"option", s.option},
                                  {"rank", s.rank},
                                  {"score", s.score},
                                  {"improved", s.improved}});
        arr.push_back(ojson{{"method", t.method},
                            {"start", universe_json(t.start)},
                            {"start_rank", t.start_rank},
                            {"start_score", t.start_score},
                            {"steps", std::move(steps)},
                            {"final", universe_json(t.final_universe)},
                            {"final_rank", t.final_rank}});
    }
    return dump_json(ojson{{"trajectories", std::move(arr)}});
}

std::string samples_csv(const std::vector<SampledRanking>& samples, const PerformanceTensor* tensor) {
    std::string out = "group,size,datasets";
    const std::vector<std::string>* methods = samples.empty() ? nullptr : &samples.front().ranking.methods;
    if (methods)
        for (const auto& m : *methods) out += "," + csv_field(m);
    out += "\n";
    for (std::size_t g = 0; g < samples.size(); ++g) {
        const auto& s = samples[g];
        std::vector<std::string> ids;
        for (auto d : s.datasets) ids.push_back(tensor ? tensor->datasets().at(d).id : std::to_string(d));
        out += fmt::format("{},{},{}", g, s.datasets.size(), csv_field(fmt::format("{}", fmt::join(ids, ";"))));
        for (const auto& m : *methods) out += "," + format_double(s.ranking.rank_of(m));
        out += "\n";
    }
    return out;
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    std::string out;
    for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
}

std::vector<ManifestEntry> write_outputs(const fs::path& dir, const RunOutputs& o) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    std::vector<std::pair<std::string, std::string>> files;
    if (o.table) files.emplace_back("rankings.csv", rankings_csv(*o.table));
    if (o.solution) files.emplace_back("unfolding.json", unfolding_json(*o.solution, o.table, o.config));
    if (o.diagnostics) {
        files.emplace_back("diagnostics.json", diagnostics_json(*o.diagnostics, o.table));
        files.emplace_back("distances.csv", distances_csv(o.diagnostics->default_distances));
    }
    if (o.trajectories) files.emplace_back("stepwise.json", stepwise_json(*o.trajectories));
    if (o.samples) files.emplace_back("samples.csv", samples_csv(*o.samples, o.tensor));

    std::vector<ManifestEntry> manifest;
    for (const auto& [name, bytes] : files) {
        write_file(dir / name, bytes);
        manifest.push_back({name, bytes.size(), sha256_hex(bytes)});
    }
    std::sort(manifest.begin(), manifest.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

    ojson entries = ojson::array();
    for (const auto& e : manifest)
        entries.push_back(ojson{{"name", e.name}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    write_file(dir / "manifest.json", dump_json(ojson{{"files", std::move(entries)}}));
    return manifest;
}

} // namespace benchfold
