#include "benchfold/model.hpp"

#include "benchfold/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/core.h>

namespace benchfold {

std::string_view to_string(Orientation o) {
    return o == Orientation::lower_better ? "lower_better" : "higher_better";
}

Orientation orientation_from_string(std::string_view s) {
    if (s == "lower_better") return Orientation::lower_better;
    if (s == "higher_better") return Orientation::higher_better;
    throw DataError(fmt::format("unknown orientation '{}'", s));
}

PerformanceTensor::PerformanceTensor(std::vector<DatasetMeta> datasets, std::vector<std::string> methods,
                                     std::vector<MeasureSpec> measures, std::vector<Cell> cells)
    : datasets_(std::move(datasets)), methods_(std::move(methods)), measures_(std::move(measures)),
      cells_(std::move(cells)) {
    if (cells_.size() != datasets_.size() * methods_.size() * measures_.size())
        throw StructuralError(fmt::format("tensor expects {} cells, got {}",
                                          datasets_.size() * methods_.size() * measures_.size(), cells_.size()));
}

CellView PerformanceTensor::cell(std::size_t dataset, std::size_t method, std::size_t measure) const {
    if (dataset >= datasets_.size() || method >= methods_.size() || measure >= measures_.size())
        throw StructuralError("cell index out of range");
    return cells_[flat(dataset, method, measure)];
}

namespace {
template <class Range, class Proj>
std::optional<std::size_t> find_id(const Range& r, std::string_view id, Proj proj) {
    for (std::size_t i = 0; i < r.size(); ++i)
        if (proj(r[i]) == id) return i;
    return std::nullopt;
}
} // namespace

std::optional<std::size_t> PerformanceTensor::dataset_index(std::string_view id) const {
    return find_id(datasets_, id, [](const DatasetMeta& d) -> const std::string& { return d.id; });
}

std::optional<std::size_t> PerformanceTensor::method_index(std::string_view id) const {
    return find_id(methods_, id, [](const std::string& s) -> const std::string& { return s; });
}

std::optional<std::size_t> PerformanceTensor::measure_index(std::string_view id) const {
    return find_id(measures_, id, [](const MeasureSpec& m) -> const std::string& { return m.id; });
}

const MeasureSpec& PerformanceTensor::measure(std::string_view id) const {
    auto i = measure_index(id);
    if (!i) throw StructuralError(fmt::format("unknown measure '{}'", id));
    return measures_[*i];
}

double Ranking::rank_of(std::string_view method) const {
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (methods[i] == method) return ranks[i];
    throw StructuralError(fmt::format("method '{}' not in ranking", method));
}

std::vector<Violation> validate_measure(const MeasureSpec& m) {
    std::vector<Violation> out;
    const auto where = fmt::format("measure '{}'", m.id);
    if (!std::isfinite(m.random_value) || !std::isfinite(m.best_value)) {
        out.push_back({where, "random_value and best_value must be finite"});
        return out;
    }
    if (m.orientation == Orientation::lower_better && !(m.best_value < m.random_value))
        out.push_back({where, "lower_better measure needs best_value < random_value"});
    if (m.orientation == Orientation::higher_better && !(m.best_value > m.random_value))
        out.push_back({where, "higher_better measure needs best_value > random_value"});
    return out;
}

std::vector<Violation> validate_tensor(const PerformanceTensor& t) {
    std::vector<Violation> out;

    auto check_unique = [&](std::string_view kind, auto&& ids) {
        std::set<std::string> seen;
        for (const std::string& id : ids)
            if (!seen.insert(id).second) out.push_back({fmt::format("{} '{}'", kind, id), "duplicate id"});
    };
    std::vector<std::string> ids;
    for (const auto& d : t.datasets()) ids.push_back(d.id);
    check_unique("dataset", ids);
    check_unique("method", t.methods());
    ids.clear();
    for (const auto& m : t.measures()) ids.push_back(m.id);
    check_unique("measure", ids);

    for (const auto& m : t.measures())
        for (auto& v : validate_measure(m)) out.push_back(std::move(v));

    for (const auto& d : t.datasets()) {
        const auto where = fmt::format("dataset '{}'", d.id);
        if (d.n < 1) out.push_back({where, "n must be positive"});
        if (d.p < 1) out.push_back({where, "p must be positive"});
        if (d.clin < 0) out.push_back({where, "clin must be nonnegative"});
        if (d.n_eff < 0) out.push_back({where, "n_eff must be nonnegative"});
        if (d.n_eff > d.n) out.push_back({where, "n_eff exceeds n"});
    }

    for (std::size_t d = 0; d < t.num_datasets(); ++d) {
        for (std::size_t m = 0; m < t.num_methods(); ++m) {
            std::optional<std::size_t> slots;
            bool mismatch = false;
            for (std::size_t q = 0; q < t.num_measures(); ++q) {
                const auto& spec = t.measures()[q];
                const auto where = fmt::format("cell ({}, {}, {})", t.datasets()[d].id, t.methods()[m], spec.id);
                auto c = t.cell(d, m, q);
                if (c.empty()) {
                    out.push_back({where, "missing cell (no iteration slots)"});
                    continue;
                }
                if (!slots) slots = c.size();
                else if (*slots != c.size()) mismatch = true;
                for (std::size_t i = 0; i < c.size(); ++i) {
                    if (!c[i]) continue;
                    if (!std::isfinite(*c[i])) {
                        out.push_back({where, fmt::format("non-finite value at iteration {}", i)});
                    } else if (spec.orientation == Orientation::lower_better && spec.best_value == 0.0 && *c[i] < 0.0) {
                        out.push_back({where, fmt::format("negative value at iteration {}", i)});
                    }
                }
            }
            if (mismatch)
                out.push_back({fmt::format("pair ({}, {})", t.datasets()[d].id, t.methods()[m]),
                               "iteration count mismatch across measures"});
        }
    }
    return out;
}

bool is_valid_midrank(std::span<const double> r) {
    const double n = static_cast<double>(r.size());
    double sum = 0.0;
    for (double x : r) {
        if (!(x >= 1.0 && x <= n)) return false;
        sum += x;
    }
    return std::abs(sum - n * (n + 1.0) / 2.0) <= 1e-9 * n * n;
}

} // namespace benchfold
