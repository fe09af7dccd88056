// Command-line front end for the ACES noise-characterisation pipeline:
// circuit generation, design optimisation and transfer, simulation,
// estimation, merit prediction, scaling studies, and toy-model curves.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "aces/circuit.h"
#include "aces/design.h"
#include "aces/estimate.h"
#include "aces/io.h"
#include "aces/merit.h"
#include "aces/noise.h"
#include "aces/optimise.h"
#include "aces/simulator.h"

using namespace aces;

namespace {

struct StageTimer {
    std::vector<std::pair<std::string, double>> timings;

    template <typename F>
    auto run(const std::string& stage, F&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            auto t1 = std::chrono::steady_clock::now();
            timings.emplace_back(stage,
                                 std::chrono::duration<double, std::milli>(t1 - t0).count());
        } else {
            auto out = fn();
            auto t1 = std::chrono::steady_clock::now();
            timings.emplace_back(stage,
                                 std::chrono::duration<double, std::milli>(t1 - t0).count());
            return out;
        }
    }
};

Circuit make_circuit(const std::string& kind, int distance) {
    if (kind == "rotated") return build_rotated_surface_circuit(distance);
    if (kind == "unrotated") return build_unrotated_surface_circuit(distance);
    throw std::invalid_argument("unknown circuit kind '" + kind + "'");
}

// Shared noise specification: inline depolarising rates, an optional
// log-normal spread, or a model file.
struct NoiseSpec {
    std::string file;
    double r1 = 1e-3, r2 = 5e-3, rm = 2e-3;
    double lognormal_sigma = -1;  // < 0: depolarising
    uint64_t seed = 0;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--noise", file, "Noise model JSON (overrides inline rates)");
        cmd->add_option("--r1", r1, "Single-qubit gate infidelity");
        cmd->add_option("--r2", r2, "Two-qubit gate infidelity");
        cmd->add_option("--rm", rm, "Measurement error probability");
        cmd->add_option("--lognormal-sigma", lognormal_sigma,
                        "Total log-normal variance; enables log-normal noise");
        cmd->add_option("--noise-seed", seed, "Seed for random noise instances");
    }

    NoiseModel build(const Circuit& c) const {
        if (!file.empty()) return noise_from_json(load_json_file(file));
        if (lognormal_sigma >= 0)
            return lognormal_model(c, r1, r2, rm, lognormal_sigma, seed);
        return depolarising_model(c, r1, r2, rm);
    }

    std::string digest_text() const {
        std::ostringstream os;
        os << file << "|" << r1 << "|" << r2 << "|" << rm << "|" << lognormal_sigma
           << "|" << seed;
        return os.str();
    }
};

// Loads tuples + weights either from a design JSON or a tuple-set file,
// instantiated on the circuit family at the requested distance.
ExperimentalDesign design_at_distance(const std::string& design_file,
                                      const std::string& tuple_set_file, int distance) {
    std::string family;
    std::vector<LayerTuple> tuples;
    std::vector<double> weights;
    if (!tuple_set_file.empty()) {
        TupleSetFile f = load_tuple_set(tuple_set_file);
        family = f.family;
        tuples = std::move(f.tuples);
        weights = std::move(f.weights);
        if (distance <= 0) distance = f.distance;
    } else {
        ExperimentalDesign d = design_from_json(load_json_file(design_file));
        if (distance <= 0 || distance == d.circuit.distance) return d;
        family = d.circuit.family;
        for (const TupleBlock& b : d.blocks) tuples.push_back(b.tuple);
        weights = d.weights;
    }
    if (family != "rotated" && family != "unrotated")
        throw std::invalid_argument(
            "cannot instantiate a '" + family + "' design at another distance");
    ExperimentalDesign d = build_design(make_circuit(family, distance), tuples);
    double total = 0;
    for (double w : weights) total += w;
    if (weights.size() != d.blocks.size() || total <= 0)
        throw std::invalid_argument("design weights do not match its tuples");
    for (double& w : weights) w /= total;
    d.weights = std::move(weights);
    return d;
}

void finish_manifest(const std::string& command, const std::string& config,
                     uint64_t seed, std::vector<std::string> inputs,
                     std::vector<std::string> outputs, StageTimer& timer,
                     const std::string& path) {
    RunManifest m;
    m.command = command;
    m.config_hash = config_digest(config);
    m.seed = seed;
    m.inputs = std::move(inputs);
    m.outputs = std::move(outputs);
    m.timings_ms = timer.timings;
    write_manifest(m, path);
}

// Least-squares quadratic fit y ~ a + b d + c d^2; returns coefficients and
// the maximum relative residual.
struct QuadFit {
    double a = 0, b = 0, c = 0, max_rel_residual = 0;
};

QuadFit fit_quadratic(const std::vector<double>& d, const std::vector<double>& y) {
    Eigen::MatrixXd x((int)d.size(), 3);
    Eigen::VectorXd v((int)d.size());
    for (size_t i = 0; i < d.size(); i++) {
        x((int)i, 0) = 1;
        x((int)i, 1) = d[i];
        x((int)i, 2) = d[i] * d[i];
        v[(int)i] = y[i];
    }
    Eigen::VectorXd coef = x.colPivHouseholderQr().solve(v);
    QuadFit fit{coef[0], coef[1], coef[2], 0};
    for (size_t i = 0; i < d.size(); i++) {
        double pred = fit.a + fit.b * d[i] + fit.c * d[i] * d[i];
        fit.max_rel_residual =
            std::max(fit.max_rel_residual, std::abs(pred - y[i]) / std::abs(y[i]));
    }
    return fit;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Averaged circuit eigenvalue sampling for syndrome extraction circuits"};
    app.require_subcommand(1);
    int threads = 0;
    if (const char* env = std::getenv("ACES_LAB_THREADS")) threads = std::atoi(env);
    app.add_option("--threads", threads, "Worker thread cap (default: all cores)");

    std::function<void()> action;

    // circuit -----------------------------------------------------------
    auto* c_circ = app.add_subcommand("circuit", "Generate a syndrome extraction circuit");
    auto circ_kind = std::make_shared<std::string>("rotated");
    auto circ_d = std::make_shared<int>(3);
    auto circ_out = std::make_shared<std::string>();
    c_circ->add_option("kind", *circ_kind, "rotated or unrotated");
    c_circ->add_option("--distance,-d", *circ_d, "Code distance");
    c_circ->add_option("--out,-o", *circ_out, "Circuit JSON path")->required();
    c_circ->callback([=, &action]() {
        action = [=]() {
            StageTimer timer;
            Circuit c = timer.run("generate", [&] { return make_circuit(*circ_kind, *circ_d); });
            ColumnLayout layout = ColumnLayout::build(c);
            save_json_file(circuit_to_json(c), *circ_out);
            std::printf("circuit %s d=%d: n=%u layers=%zu unique_layers=%zu N=%u\n",
                        circ_kind->c_str(), *circ_d, c.n, c.layers.size(),
                        c.unique_ids().size(), layout.total);
            finish_manifest("circuit", *circ_kind + "/" + std::to_string(*circ_d), 0, {},
                            {*circ_out}, timer, *circ_out + ".manifest.json");
        };
    });

    // optimise ----------------------------------------------------------
    auto* c_opt = app.add_subcommand("optimise", "Optimise an experimental design");
    auto opt_circ = std::make_shared<std::string>();
    auto opt_noise = std::make_shared<NoiseSpec>();
    auto opt_cfg = std::make_shared<OptimiserConfig>();
    auto opt_est = std::make_shared<std::string>("wls");
    auto opt_out = std::make_shared<std::string>();
    auto opt_hist = std::make_shared<std::string>();
    c_opt->add_option("--circuit", *opt_circ, "Circuit JSON")->required();
    opt_noise->add_options(c_opt);
    c_opt->add_option("--estimator", *opt_est, "ols, wls, or gls");
    c_opt->add_option("--seed", opt_cfg->seed, "Optimiser seed");
    c_opt->add_option("--excursions", opt_cfg->n_ex, "Number of greedy excursions");
    c_opt->add_option("--excursion-length", opt_cfg->l_ex, "Tuples beyond target per excursion");
    c_opt->add_option("--target-size", opt_cfg->l_set, "Target tuple-set size (0: 5x layers)");
    c_opt->add_option("--trial-factor", opt_cfg->f_trial, "Sampling trials per slot");
    c_opt->add_option("--grad-steps", opt_cfg->max_grad_steps, "Shot-weight descent cap");
    c_opt->add_option("--out,-o", *opt_out, "Design JSON path")->required();
    c_opt->add_option("--history", *opt_hist, "Optimisation history CSV");
    c_opt->callback([=, &action]() {
        action = [=]() {
            Circuit c = circuit_from_json(load_json_file(*opt_circ));
            NoiseModel m = opt_noise->build(c);
            OptimiserConfig cfg = *opt_cfg;
            cfg.estimator = estimator_kind_from_name(*opt_est);
            cfg.validate();
            StageTimer timer;
            ExperimentalDesign basic = build_design(c, basic_tuple_set(c));
            double f_basic = merit(basic, m, cfg.estimator).merit;
            OptimisationHistory history;
            ExperimentalDesign best = timer.run(
                "optimise", [&] { return optimise_design(c, m, cfg, &history); });
            double f_final = merit(best, m, cfg.estimator).merit;
            save_json_file(design_to_json(best), *opt_out);
            std::vector<std::string> outputs{*opt_out};
            if (!opt_hist->empty()) {
                write_history_csv(history, *opt_hist);
                outputs.push_back(*opt_hist);
            }
            std::printf("initial F=%.6g final F=%.6g gain=%.3f tuples=%zu experiments=%zu\n",
                        f_basic, f_final, f_basic / f_final, best.blocks.size(),
                        best.total_experiments());
            finish_manifest("optimise", *opt_circ + "|" + opt_noise->digest_text(),
                            cfg.seed, {*opt_circ}, outputs, timer,
                            *opt_out + ".manifest.json");
        };
    });

    // transfer ----------------------------------------------------------
    auto* c_tr = app.add_subcommand("transfer", "Instantiate a design at another distance");
    auto tr_design = std::make_shared<std::string>();
    auto tr_set = std::make_shared<std::string>();
    auto tr_d = std::make_shared<int>(0);
    auto tr_out = std::make_shared<std::string>();
    c_tr->add_option("--design", *tr_design, "Design JSON");
    c_tr->add_option("--tuple-set", *tr_set, "Tuple-set JSON (weights + patterns)");
    c_tr->add_option("--distance,-d", *tr_d, "Target code distance")->required();
    c_tr->add_option("--out,-o", *tr_out, "Design JSON path")->required();
    c_tr->callback([=, &action]() {
        action = [=]() {
            if (tr_design->empty() == tr_set->empty())
                throw std::invalid_argument("pass exactly one of --design / --tuple-set");
            StageTimer timer;
            ExperimentalDesign d = timer.run(
                "transfer", [&] { return design_at_distance(*tr_design, *tr_set, *tr_d); });
            save_json_file(design_to_json(d), *tr_out);
            std::printf("transferred to d=%d: n=%u tuples=%zu experiments=%zu rows=%u N=%u\n",
                        *tr_d, d.circuit.n, d.blocks.size(), d.total_experiments(),
                        d.rows(), d.cols());
            finish_manifest("transfer", *tr_design + *tr_set + std::to_string(*tr_d), 0,
                            {tr_design->empty() ? *tr_set : *tr_design}, {*tr_out},
                            timer, *tr_out + ".manifest.json");
        };
    });

    // run ---------------------------------------------------------------
    auto* c_run = app.add_subcommand("run", "Simulate a design and estimate the noise");
    auto run_design = std::make_shared<std::string>();
    auto run_noise = std::make_shared<NoiseSpec>();
    auto run_s = std::make_shared<double>(0);
    auto run_seed = std::make_shared<uint64_t>(0);
    auto run_method = std::make_shared<std::string>("wls");
    auto run_mode = std::make_shared<std::string>("frame");
    auto run_prefix = std::make_shared<std::string>();
    c_run->add_option("--design", *run_design, "Design JSON")->required();
    run_noise->add_options(c_run);
    c_run->add_option("--shots,-S", *run_s, "Measurement budget S")->required();
    c_run->add_option("--seed", *run_seed, "Simulation seed");
    c_run->add_option("--method", *run_method, "ols, wls, or fgls");
    c_run->add_option("--mode", *run_mode, "frame or independent");
    c_run->add_option("--out,-o", *run_prefix, "Output path prefix")->required();
    c_run->callback([=, &action]() {
        action = [=]() {
            if (*run_s <= 0) throw std::invalid_argument("budget S must be positive");
            FitOptions fopt;
            fopt.method = fit_method_from_name(*run_method);
            ExperimentalDesign d = design_from_json(load_json_file(*run_design));
            NoiseModel m = run_noise->build(d.circuit);
            StageTimer timer;
            OutcomeDataset data = timer.run(
                "simulate", [&] { return simulate_design(d, m, *run_s, *run_seed, *run_mode); });
            CircuitEigenvalueEstimates est = timer.run(
                "estimate", [&] { return estimate_circuit_eigenvalues(d, data); });
            FitResult fit =
                timer.run("fit", [&] { return fit_gate_eigenvalues(d, est, fopt); });
            double s_prime = shot_allocation(d, *run_s).S_prime;
            EstimationReport rep = timer.run(
                "report", [&] { return report_metrics(d, fit, &m, s_prime); });

            std::string ds = *run_prefix + ".dataset.json";
            std::string rj = *run_prefix + ".report.json";
            std::string mc = *run_prefix + ".metrics.csv";
            std::string dc = *run_prefix + ".distributions.csv";
            save_dataset(data, ds);
            save_json_file(report_to_json(rep), rj);
            write_metrics_csv(rep, mc);
            write_distributions_csv(d, rep.recovered, &m, dc);
            std::printf("S=%.3g S'=%.6g method=%s nrmse=%.6g\n", *run_s, s_prime,
                        run_method->c_str(), rep.nrmse);
            for (const auto& [type, median] : rep.type_median_tvd)
                std::printf("median tvd %-12s %.6g\n", type.c_str(), median);
            finish_manifest("run",
                            *run_design + "|" + run_noise->digest_text() + "|" +
                                std::to_string(*run_s) + "|" + *run_method + "|" + *run_mode,
                            *run_seed, {*run_design}, {ds, rj, mc, dc}, timer,
                            *run_prefix + ".manifest.json");
        };
    });

    // merit -------------------------------------------------------------
    auto* c_mer = app.add_subcommand("merit", "Predict estimator performance for a design");
    auto mer_design = std::make_shared<std::string>();
    auto mer_noise = std::make_shared<NoiseSpec>();
    auto mer_est = std::make_shared<std::string>("wls");
    auto mer_out = std::make_shared<std::string>();
    c_mer->add_option("--design", *mer_design, "Design JSON")->required();
    mer_noise->add_options(c_mer);
    c_mer->add_option("--estimator", *mer_est, "ols, wls, or gls");
    c_mer->add_option("--out,-o", *mer_out, "Summary JSON path");
    c_mer->callback([=, &action]() {
        action = [=]() {
            ExperimentalDesign d = design_from_json(load_json_file(*mer_design));
            NoiseModel m = mer_noise->build(d.circuit);
            EstimatorKind kind = estimator_kind_from_name(*mer_est);
            StageTimer timer;
            MeritReport rep = timer.run("merit", [&] { return merit(d, m, kind); });
            std::printf("estimator=%s N=%u trace=%.8g trace_sq=%.8g F=%.8g sqrtV=%.8g\n",
                        mer_est->c_str(), rep.N, rep.trace_sigma, rep.trace_sigma_sq,
                        rep.merit, std::sqrt(rep.variance));
            if (!mer_out->empty()) {
                save_json_file(Json{{"estimator", *mer_est},
                                    {"N", rep.N},
                                    {"trace", rep.trace_sigma},
                                    {"trace_sq", rep.trace_sigma_sq},
                                    {"merit", rep.merit},
                                    {"variance", rep.variance}},
                               *mer_out);
                finish_manifest("merit", *mer_design + "|" + mer_noise->digest_text(), 0,
                                {*mer_design}, {*mer_out}, timer,
                                *mer_out + ".manifest.json");
            }
        };
    });

    // scaling -----------------------------------------------------------
    auto* c_sc = app.add_subcommand("scaling", "Merit scaling across code distances");
    auto sc_design = std::make_shared<std::string>();
    auto sc_set = std::make_shared<std::string>();
    auto sc_dists = std::make_shared<std::vector<int>>();
    auto sc_noise = std::make_shared<NoiseSpec>();
    auto sc_est = std::make_shared<std::string>("wls");
    auto sc_ens = std::make_shared<int>(0);
    auto sc_out = std::make_shared<std::string>();
    c_sc->add_option("--design", *sc_design, "Design JSON");
    c_sc->add_option("--tuple-set", *sc_set, "Tuple-set JSON");
    c_sc->add_option("--distances", *sc_dists, "Code distances")->required()->expected(-1);
    sc_noise->add_options(c_sc);
    c_sc->add_option("--estimator", *sc_est, "ols, wls, or gls");
    c_sc->add_option("--ensemble", *sc_ens, "Log-normal instances per distance");
    c_sc->add_option("--out,-o", *sc_out, "Scaling CSV path")->required();
    c_sc->callback([=, &action]() {
        action = [=]() {
            if (sc_design->empty() == sc_set->empty())
                throw std::invalid_argument("pass exactly one of --design / --tuple-set");
            EstimatorKind kind = estimator_kind_from_name(*sc_est);
            StageTimer timer;
            std::ofstream out(*sc_out);
            if (!out) throw IoError("cannot write " + *sc_out);
            out << "d,n,N,trace,trace_sq,merit,sqrt_variance";
            if (*sc_ens > 0) out << ",lognormal_mean_merit,lognormal_sd_merit";
            out << "\n";
            std::vector<double> dv, traces, traces_sq;
            for (int dist : *sc_dists) {
                ExperimentalDesign d = timer.run(
                    "build-d" + std::to_string(dist),
                    [&] { return design_at_distance(*sc_design, *sc_set, dist); });
                NoiseModel dep = depolarising_model(d.circuit, sc_noise->r1, sc_noise->r2,
                                                    sc_noise->rm);
                MeritReport rep = timer.run("merit-d" + std::to_string(dist),
                                            [&] { return merit(d, dep, kind); });
                out << dist << "," << d.circuit.n << "," << rep.N << ","
                    << rep.trace_sigma << "," << rep.trace_sigma_sq << "," << rep.merit
                    << "," << std::sqrt(rep.variance);
                if (*sc_ens > 0) {
                    double sum = 0, sum2 = 0;
                    double sigma =
                        sc_noise->lognormal_sigma >= 0 ? sc_noise->lognormal_sigma : 0.25;
                    for (int s = 0; s < *sc_ens; s++) {
                        NoiseModel ln = lognormal_model(d.circuit, sc_noise->r1,
                                                        sc_noise->r2, sc_noise->rm, sigma,
                                                        sc_noise->seed + (uint64_t)s);
                        double f = merit(d, ln, kind).merit;
                        sum += f;
                        sum2 += f * f;
                    }
                    double mean = sum / *sc_ens;
                    double sd = std::sqrt(std::max(0.0, sum2 / *sc_ens - mean * mean));
                    out << "," << mean << "," << sd;
                }
                out << "\n";
                std::printf("d=%d N=%u F=%.6g\n", dist, rep.N, rep.merit);
                dv.push_back(dist);
                traces.push_back(rep.trace_sigma);
                traces_sq.push_back(rep.trace_sigma_sq);
            }
            out.close();
            std::vector<std::string> outputs{*sc_out};
            if (dv.size() >= 3) {
                QuadFit ft = fit_quadratic(dv, traces);
                QuadFit ft2 = fit_quadratic(dv, traces_sq);
                std::string fits = *sc_out + ".fits.csv";
                std::ofstream fo(fits);
                if (!fo) throw IoError("cannot write " + fits);
                fo << "quantity,c0,c1,c2,max_rel_residual\n";
                fo << "trace," << ft.a << "," << ft.b << "," << ft.c << ","
                   << ft.max_rel_residual << "\n";
                fo << "trace_sq," << ft2.a << "," << ft2.b << "," << ft2.c << ","
                   << ft2.max_rel_residual << "\n";
                std::printf("trace quadratic max rel residual %.3g\n",
                            ft.max_rel_residual);
                outputs.push_back(fits);
            }
            finish_manifest("scaling", *sc_design + *sc_set + "|" + sc_noise->digest_text(),
                            sc_noise->seed, {sc_design->empty() ? *sc_set : *sc_design},
                            outputs, timer, *sc_out + ".manifest.json");
        };
    });

    // toy ---------------------------------------------------------------
    auto* c_toy = app.add_subcommand("toy", "Single-Pauli-layer model curves and optima");
    auto toy_lambda = std::make_shared<double>(0.995);
    auto toy_lambda_m = std::make_shared<double>(0.96);
    auto toy_tau = std::make_shared<double>(660.0 / 29.0);
    auto toy_out = std::make_shared<std::string>();
    c_toy->add_option("--lambda", *toy_lambda, "Uniform gate eigenvalue");
    c_toy->add_option("--lambda-m", *toy_lambda_m, "Measurement eigenvalue");
    c_toy->add_option("--tau", *toy_tau, "Measurement/reset time in layer units");
    c_toy->add_option("--out,-o", *toy_out, "Curve CSV path");
    c_toy->callback([=, &action]() {
        action = [=]() {
            StageTimer timer;
            ToyOptimum timed = toy_optimal(*toy_lambda, *toy_lambda_m, *toy_tau, true);
            ToyOptimum sampled = toy_optimal(*toy_lambda, *toy_lambda_m, *toy_tau, false);
            std::printf("time-optimised:   phi=%lld gamma=%.6g F=%.8g\n", timed.phi_opt,
                        timed.gamma_opt, timed.f_opt);
            std::printf("sample-optimised: phi=%lld F'=%.8g\n", sampled.phi_opt,
                        sampled.f_opt);
            if (!toy_out->empty()) {
                std::ofstream out(*toy_out);
                if (!out) throw IoError("cannot write " + *toy_out);
                out << "phi,gamma_opt,f_time,f_sample\n";
                double hi = std::max(4.0 * timed.phi_continuous, 16.0);
                for (int i = 0; i < 200; i++) {
                    double phi = std::exp(std::log(hi) * (i + 1) / 200.0);
                    out << phi << ","
                        << toy_optimal_gamma(*toy_lambda, *toy_lambda_m, *toy_tau, 0, phi)
                        << "," << toy_merit_time(*toy_lambda, *toy_lambda_m, *toy_tau, phi)
                        << "," << toy_merit_sample(*toy_lambda, *toy_lambda_m, phi) << "\n";
                }
                finish_manifest("toy",
                                std::to_string(*toy_lambda) + "|" +
                                    std::to_string(*toy_lambda_m) + "|" +
                                    std::to_string(*toy_tau),
                                0, {}, {*toy_out}, timer, *toy_out + ".manifest.json");
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    (void)threads;  // single-threaded build; accepted for interface stability
    action();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
