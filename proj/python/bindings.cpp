#include "benchfold/aggregation.hpp"
#include "benchfold/cli.hpp"
#include "benchfold/diagnostics.hpp"
#include "benchfold/errors.hpp"
#include "benchfold/imputation.hpp"
#include "benchfold/isotonic.hpp"
#include "benchfold/multiverse.hpp"
#include "benchfold/unfolding.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace benchfold;

namespace {

TieRule tie_rule(const std::string& s) {
    if (s == "primary") return TieRule::primary;
    if (s == "secondary") return TieRule::secondary;
    throw DataError("tie_rule must be 'primary' or 'secondary'");
}

Conditionality conditionality(const std::string& s) {
    if (s == "row") return Conditionality::row;
    if (s == "matrix") return Conditionality::matrix;
    throw DataError("conditionality must be 'row' or 'matrix'");
}

UnfoldOptions options(int dim, int n_starts, std::uint64_t seed, int max_iter, double eps, double lambda, double omega,
                      const std::string& tie, const std::string& cond) {
    UnfoldOptions o;
    o.dim = dim;
    o.n_starts = n_starts;
    o.seed = seed;
    o.max_iter = max_iter;
    o.eps = eps;
    o.penalty_lambda = lambda;
    o.penalty_omega = omega;
    o.tie_rule = tie_rule(tie);
    o.conditionality = conditionality(cond);
    return o;
}

py::dict solution_dict(const UnfoldingSolution& s) {
    py::dict d;
    d["ideal"] = s.ideal;
    d["objects"] = s.objects;
    d["disparities"] = s.disparities;
    d["distances"] = s.distances;
    d["stress_penalized"] = s.stress_penalized;
    d["stress_raw"] = s.stress_raw;
    d["stress_normalized"] = s.stress_normalized;
    d["iterations"] = s.iterations;
    d["converged"] = s.converged;
    d["best_start"] = s.best_start;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multiverse analysis of benchmark rankings and ordinal unfolding";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<DegenerateInput>(m, "DegenerateInput", PyExc_ValueError);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"benchfold"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int status;
            {
                py::gil_scoped_release release;
                status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(status, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in process. Returns (status, stdout, stderr).");

    m.def(
        "impute_cell",
        [](const Cell& cell, const std::string& orientation, double random_value, double best_value,
           const std::string& strategy) {
            const MeasureSpec measure{"measure", orientation_from_string(orientation), random_value, best_value};
            return impute_cell(cell, measure, imputation_from_key(strategy));
        },
        py::arg("cell"), py::arg("orientation"), py::arg("random_value"), py::arg("best_value"),
        py::arg("strategy"), "Collapse one cell's iterations (None = failed) into one value.");

    m.def(
        "midranks",
        [](const std::vector<double>& scores, bool larger_better) {
            return midranks(scores, larger_better ? Better::larger : Better::smaller);
        },
        py::arg("scores"), py::arg("larger_better") = false);

    m.def(
        "monotone_regress",
        [](const std::vector<double>& ranks, const std::vector<double>& targets, const std::vector<double>& weights,
           const std::string& tie) { return monotone_regress(ranks, targets, weights, tie_rule(tie)); },
        py::arg("ranks"), py::arg("targets"), py::arg("weights") = std::vector<double>{},
        py::arg("tie_rule") = "primary");

    m.def(
        "unfold",
        [](const Matrix& delta, int dim, int n_starts, std::uint64_t seed, int max_iter, double eps, double lambda,
           double omega, const std::string& tie, const std::string& cond) {
            const auto o = options(dim, n_starts, seed, max_iter, eps, lambda, omega, tie, cond);
            UnfoldingSolution s;
            {
                py::gil_scoped_release release;
                s = fit(delta, o);
            }
            return solution_dict(s);
        },
        py::arg("delta"), py::arg("dim") = 2, py::arg("n_starts") = 4, py::arg("seed") = 0,
        py::arg("max_iter") = 10000, py::arg("eps") = 1e-6, py::arg("penalty_lambda") = 0.5,
        py::arg("penalty_omega") = 1.0, py::arg("tie_rule") = "primary", py::arg("conditionality") = "row",
        "Ordinal unfolding of a rank table (rows: universes, columns: methods).");

    m.def(
        "permutation_test",
        [](const Matrix& delta, int n_perm, std::uint64_t seed, int dim, int n_starts, const std::string& scheme) {
            UnfoldOptions o;
            o.dim = dim;
            o.n_starts = n_starts;
            o.seed = seed;
            PermutationOptions p;
            p.n_perm = n_perm;
            p.seed = seed;
            if (scheme == "global") p.scheme = PermutationScheme::global;
            else if (scheme != "within_row") throw DataError("scheme must be 'within_row' or 'global'");
            PermutationResult r;
            {
                py::gil_scoped_release release;
                r = permutation_test(delta, o, p);
            }
            py::dict d;
            d["p_value"] = r.p_value;
            d["observed"] = r.observed;
            d["permuted"] = r.permuted;
            return d;
        },
        py::arg("delta"), py::arg("n_perm") = 99, py::arg("seed") = 0, py::arg("dim") = 2, py::arg("n_starts") = 4,
        py::arg("scheme") = "within_row");

    m.def("sample_prefix_groups", &sample_prefix_groups, py::arg("num_datasets"), py::arg("n_perms"),
          py::arg("seed"));
}
