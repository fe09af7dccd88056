// Python bindings for the main pipeline operations: circuit generation,
// design construction and transfer, noise models, merit evaluation, design
// optimisation, outcome simulation, and eigenvalue estimation.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "aces/circuit.h"
#include "aces/design.h"
#include "aces/estimate.h"
#include "aces/io.h"
#include "aces/merit.h"
#include "aces/noise.h"
#include "aces/optimise.h"
#include "aces/simulator.h"

namespace py = pybind11;
using namespace aces;

namespace {

std::vector<LayerTuple> to_tuples(const std::vector<std::vector<int>>& raw) {
    std::vector<LayerTuple> out;
    out.reserve(raw.size());
    for (const auto& t : raw) out.push_back(LayerTuple{t});
    return out;
}

std::vector<std::vector<int>> from_tuples(const ExperimentalDesign& d) {
    std::vector<std::vector<int>> out;
    out.reserve(d.blocks.size());
    for (const auto& b : d.blocks) out.push_back(b.tuple.entries);
    return out;
}

py::dict merit_dict(const MeritReport& r) {
    py::dict out;
    out["estimator"] = std::string(estimator_kind_name(r.estimator_kind));
    out["merit"] = r.merit;
    out["variance"] = r.variance;
    out["trace_sigma"] = r.trace_sigma;
    out["trace_sigma_sq"] = r.trace_sigma_sq;
    out["columns"] = r.N;
    return out;
}

py::dict report_dict(const ExperimentalDesign& d, const FitResult& fit,
                     const NoiseModel* truth, double s_prime) {
    EstimationReport rep = report_metrics(d, fit, truth, s_prime);
    py::dict out;
    out["method"] = std::string(fit_method_name(fit.method));
    out["lambda_hat"] = fit.lambda_hat;
    out["converged"] = fit.converged;
    out["iterations"] = fit.iterations;
    out["fell_back_to_wls"] = fit.fell_back_to_wls;
    out["rows_excluded"] = fit.rows_excluded;
    out["s_prime"] = s_prime;
    if (truth) {
        out["nrmse"] = rep.nrmse;
        py::dict med;
        for (const auto& [type, tvd] : rep.type_median_tvd) med[py::str(type)] = tvd;
        out["type_median_tvd"] = med;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Averaged circuit eigenvalue sampling for syndrome extraction circuits";

    py::class_<Circuit>(m, "Circuit")
        .def_readonly("n", &Circuit::n)
        .def_readonly("family", &Circuit::family)
        .def_readonly("distance", &Circuit::distance)
        .def_property_readonly("num_layers",
                               [](const Circuit& c) { return c.layers.size(); })
        .def_property_readonly("unique_ids", &Circuit::unique_ids)
        .def("__repr__", [](const Circuit& c) {
            return "<Circuit " + c.family + " d=" + std::to_string(c.distance) +
                   " n=" + std::to_string(c.n) + ">";
        });

    py::class_<NoiseModel>(m, "NoiseModel")
        .def_readonly("generator", &NoiseModel::generator)
        .def_readonly("params", &NoiseModel::params)
        .def_readonly("seed", &NoiseModel::seed)
        .def("__repr__", [](const NoiseModel& n) {
            return "<NoiseModel " + n.generator + ", " +
                   std::to_string(n.channels.size()) + " channels>";
        });

    py::class_<ExperimentalDesign>(m, "Design")
        .def_property_readonly("rows", &ExperimentalDesign::rows)
        .def_property_readonly("cols", &ExperimentalDesign::cols)
        .def_property_readonly("experiments", &ExperimentalDesign::total_experiments)
        .def_property_readonly("tuples", &from_tuples)
        .def_property(
            "weights", [](const ExperimentalDesign& d) { return d.weights; },
            [](ExperimentalDesign& d, std::vector<double> w) {
                if (w.size() != d.blocks.size())
                    throw std::invalid_argument("weight count must match tuple count");
                d.weights = std::move(w);
            })
        .def_property_readonly("circuit",
                               [](const ExperimentalDesign& d) { return d.circuit; })
        .def("__repr__", [](const ExperimentalDesign& d) {
            return "<Design " + std::to_string(d.blocks.size()) + " tuples, " +
                   std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + ">";
        });

    py::class_<OutcomeDataset>(m, "Dataset")
        .def_readonly("S", &OutcomeDataset::S)
        .def_readonly("seed", &OutcomeDataset::seed)
        .def_readonly("mode", &OutcomeDataset::mode);

    m.def("build_rotated_circuit", &build_rotated_surface_circuit, py::arg("distance"));
    m.def("build_unrotated_circuit", &build_unrotated_surface_circuit,
          py::arg("distance"));

    m.def(
        "basic_design",
        [](const Circuit& c) { return build_design(c, basic_tuple_set(c)); },
        py::arg("circuit"),
        "Design over the basic tuple set (empty tuple plus each unique layer).");

    m.def(
        "design_from_tuples",
        [](const Circuit& c, const std::vector<std::vector<int>>& tuples) {
            return build_design(c, to_tuples(tuples));
        },
        py::arg("circuit"), py::arg("tuples"));

    m.def(
        "transfer_design",
        [](const std::string& tuple_set_path, int distance) {
            TupleSetFile ts = load_tuple_set(tuple_set_path);
            Circuit c = ts.family == "unrotated"
                            ? build_unrotated_surface_circuit(distance)
                            : build_rotated_surface_circuit(distance);
            ExperimentalDesign d = build_design(c, ts.tuples);
            double wsum = 0;
            for (double w : ts.weights) wsum += w;
            for (size_t i = 0; i < ts.weights.size(); i++)
                d.weights[i] = ts.weights[i] / wsum;
            return d;
        },
        py::arg("tuple_set_path"), py::arg("distance"),
        "Instantiate a saved tuple set at another code distance.");

    m.def("depolarising_noise", &depolarising_model, py::arg("circuit"),
          py::arg("r1") = 1e-3, py::arg("r2") = 5e-3, py::arg("rm") = 2e-3);
    m.def("lognormal_noise", &lognormal_model, py::arg("circuit"),
          py::arg("r1") = 7.5e-4, py::arg("r2") = 5e-3, py::arg("rm") = 2e-2,
          py::arg("sigma_tot_sq") = std::log(10.0 / 9.0), py::arg("seed") = 0);

    m.def(
        "merit",
        [](const ExperimentalDesign& d, const NoiseModel& n, const std::string& est) {
            return merit_dict(merit(d, n, estimator_kind_from_name(est)));
        },
        py::arg("design"), py::arg("noise"), py::arg("estimator") = "wls");

    m.def(
        "optimise_design",
        [](const Circuit& c, const NoiseModel& n, int excursions, int excursion_length,
           int target_size, int trial_factor, int grad_steps, const std::string& est,
           uint64_t seed) {
            OptimiserConfig cfg;
            cfg.n_ex = excursions;
            cfg.l_ex = excursion_length;
            cfg.l_set = target_size;
            cfg.f_trial = trial_factor;
            cfg.max_grad_steps = grad_steps;
            cfg.estimator = estimator_kind_from_name(est);
            cfg.seed = seed;
            return optimise_design(c, n, cfg);
        },
        py::arg("circuit"), py::arg("noise"), py::arg("excursions") = 3,
        py::arg("excursion_length") = 10, py::arg("target_size") = 0,
        py::arg("trial_factor") = 20, py::arg("grad_steps") = 400,
        py::arg("estimator") = "wls", py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "design_matrix",
        [](const ExperimentalDesign& d) {
            std::vector<uint32_t> rows, cols;
            std::vector<double> vals;
            uint32_t row0 = 0;
            for (const auto& b : d.blocks) {
                for (uint32_t r = 0; r < b.matrix.rows; r++)
                    for (uint32_t k = b.matrix.row_ptr[r]; k < b.matrix.row_ptr[r + 1];
                         k++) {
                        rows.push_back(row0 + r);
                        cols.push_back(b.matrix.col[k]);
                        vals.push_back((double)b.matrix.val[k]);
                    }
                row0 += b.matrix.rows;
            }
            return py::make_tuple(rows, cols, vals,
                                  py::make_tuple(d.rows(), d.cols()));
        },
        py::arg("design"),
        "Sparse design matrix as (rows, cols, values, shape) COO triplets.");

    m.def("true_eigenvalues", &true_column_eigenvalues, py::arg("design"),
          py::arg("noise"), "Per-column gate eigenvalues of a noise model.");

    m.def(
        "simulate",
        [](const ExperimentalDesign& d, const NoiseModel& n, double S, uint64_t seed,
           const std::string& mode) { return simulate_design(d, n, S, seed, mode); },
        py::arg("design"), py::arg("noise"), py::arg("shots"), py::arg("seed") = 0,
        py::arg("mode") = "frame", py::call_guard<py::gil_scoped_release>());

    m.def(
        "estimate",
        [](const ExperimentalDesign& d, const OutcomeDataset& data,
           const std::string& method, const NoiseModel* truth) {
            CircuitEigenvalueEstimates est = estimate_circuit_eigenvalues(d, data);
            FitOptions opt;
            opt.method = fit_method_from_name(method);
            FitResult fit = fit_gate_eigenvalues(d, est, opt);
            ShotAllocation alloc = shot_allocation(d, data.S);
            return report_dict(d, fit, truth, alloc.S_prime);
        },
        py::arg("design"), py::arg("dataset"), py::arg("method") = "wls",
        py::arg("truth") = nullptr,
        "Fit gate eigenvalues from outcome counts; reports error metrics when the "
        "true noise model is supplied.");

    m.def("wht_forward", &wht_forward, py::arg("probs"));
    m.def("wht_inverse", &wht_inverse, py::arg("eigenvalues"));
    m.def("project_simplex", &project_simplex, py::arg("v"));

    m.def(
        "save_design",
        [](const ExperimentalDesign& d, const std::string& path) {
            save_json_file(design_to_json(d), path);
        },
        py::arg("design"), py::arg("path"));
    m.def(
        "load_design",
        [](const std::string& path) { return design_from_json(load_json_file(path)); },
        py::arg("path"));
    m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
    m.def(
        "load_dataset", [](const std::string& path) { return load_dataset(path); },
        py::arg("path"));
}
