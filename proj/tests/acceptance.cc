// Acceptance gate: ten end-to-end checks of the characterisation pipeline,
// one per invocation (argv[1] = criterion number, argv[2] = bundled data
// directory).  Each criterion prints a single PASS/FAIL line with the
// measured quantities and its pinned tolerances.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "aces/circuit.h"
#include "aces/design.h"
#include "aces/estimate.h"
#include "aces/io.h"
#include "aces/merit.h"
#include "aces/noise.h"
#include "aces/optimise.h"
#include "aces/rng.h"
#include "aces/simulator.h"

using namespace aces;

namespace {

std::string g_data_dir;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

// The paper-style log-normal noise instance used by criteria 4 and 7: mean
// infidelities r1 = 0.075%, r2 = 0.5%, rm = 2%, total log-variance log(10/9).
NoiseModel reference_lognormal(const Circuit& c, uint64_t seed) {
    return lognormal_model(c, 7.5e-4, 5e-3, 2e-2, std::log(10.0 / 9.0), seed);
}

ExperimentalDesign bundled_design_at(int distance) {
    TupleSetFile ts = load_tuple_set(g_data_dir + "/rotated_d3_optimised_design.json");
    double wsum = 0;
    for (double w : ts.weights) wsum += w;
    Circuit c = build_rotated_surface_circuit(distance);
    ExperimentalDesign d = build_design(c, ts.tuples);
    for (size_t i = 0; i < ts.weights.size(); i++) d.weights[i] = ts.weights[i] / wsum;
    return d;
}

Eigen::SparseMatrix<double> design_matrix(const ExperimentalDesign& d) {
    std::vector<Eigen::Triplet<double>> trips;
    uint32_t row0 = 0;
    for (const TupleBlock& b : d.blocks) {
        const SparseMatrix& m = b.matrix;
        for (uint32_t r = 0; r < m.rows; r++)
            for (uint32_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; k++)
                trips.emplace_back(row0 + r, m.col[k], (double)m.val[k]);
        row0 += m.rows;
    }
    Eigen::SparseMatrix<double> a(row0, d.cols());
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

// Extreme eigenvalues of A^T A by power iteration and LDLT-based inverse
// iteration; enough accuracy for condition numbers of well-separated spectra.
struct SpectrumEdge {
    double lambda_max = 0, lambda_min = 0;
    bool factorised = false;
};

SpectrumEdge gram_spectrum_edges(const Eigen::SparseMatrix<double>& a) {
    Eigen::SparseMatrix<double> gram = (a.transpose() * a).pruned();
    SpectrumEdge out;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.cols()).normalized();
    double prev = 0;
    for (int it = 0; it < 5000; it++) {
        Eigen::VectorXd w = gram * v;
        double lam = w.norm();
        v = w / lam;
        if (std::abs(lam - prev) < 1e-13 * lam && it > 30) { prev = lam; break; }
        prev = lam;
    }
    out.lambda_max = prev;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return out;
    out.factorised = true;
    v = Eigen::VectorXd::Ones(gram.cols()).normalized();
    prev = 0;
    for (int it = 0; it < 5000; it++) {
        Eigen::VectorXd w = ldlt.solve(v);
        double mu = w.norm();  // converges to 1 / lambda_min
        v = w / mu;
        double lam = 1.0 / mu;
        if (std::abs(lam - prev) < 1e-13 * lam && it > 30) { prev = lam; break; }
        prev = lam;
    }
    out.lambda_min = prev;
    return out;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); i++) { mx += xs[i]; my += ys[i]; }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); i++) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

// Asymptotic two-sample Kolmogorov-Smirnov p-value.
double ks_p_value(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) i++;
        else j++;
        double fa = (double)i / a.size(), fb = (double)j / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    double ne = (double)a.size() * b.size() / (a.size() + b.size());
    double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 0;
    for (int k = 1; k <= 100; k++)
        p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    return std::min(1.0, std::max(0.0, p));
}

std::vector<double> softmax_neg(const std::vector<double>& gamma) {
    double lo = *std::min_element(gamma.begin(), gamma.end());
    std::vector<double> w(gamma.size());
    double tot = 0;
    for (size_t i = 0; i < gamma.size(); i++) {
        w[i] = std::exp(-(gamma[i] - lo));
        tot += w[i];
    }
    for (double& x : w) x /= tot;
    return w;
}

Layer make_layer(std::vector<CliffordGate> gates, LayerClass cls, uint32_t n) {
    Layer l;
    l.gates = std::move(gates);
    l.layer_time = 29e-9;
    l.layer_class = cls;
    l.finalise(n);
    return l;
}

// ---------------------------------------------------------------------------
// 1. Structural exactness of the circuit families.
bool criterion_1() {
    bool ok = true;
    for (int d : {3, 5, 7, 9, 11}) {
        Circuit r = build_rotated_surface_circuit(d);
        uint32_t nr = ColumnLayout::build(r).total;
        uint32_t nr_expect = (uint32_t)(84 * d * d - 36 * d - 24);
        if (r.n != (uint32_t)(2 * d * d - 1) || nr != nr_expect) {
            printf("  rotated d=%d: n=%u (expect %d), N=%u (expect %u)\n", d, r.n,
                   2 * d * d - 1, nr, nr_expect);
            ok = false;
        }
        Circuit u = build_unrotated_surface_circuit(d);
        uint32_t nu = ColumnLayout::build(u).total;
        uint32_t nu_expect = (uint32_t)(144 * d * d - 180 * d + 54);
        if (u.n != (uint32_t)((2 * d - 1) * (2 * d - 1)) || nu != nu_expect) {
            printf("  unrotated d=%d: n=%u (expect %d), N=%u (expect %u)\n", d, u.n,
                   (2 * d - 1) * (2 * d - 1), nu, nu_expect);
            ok = false;
        }
    }
    printf("criterion 1: %s (rotated n=2d^2-1, N=84d^2-36d-24; unrotated n=(2d-1)^2, "
           "N=144d^2-180d+54; d in {3,5,7,9,11})\n",
           ok ? "PASS" : "FAIL");
    return ok;
}

// ---------------------------------------------------------------------------
// 2. Basic-design spectra: full rank, d=3 condition number and pseudoinverse
// norm, and saturating growth towards d=11.
bool criterion_2() {
    std::map<int, double> cond, pinv;
    bool full_rank = true;
    for (int d : {3, 5, 7, 9, 11}) {
        Circuit c = build_rotated_surface_circuit(d);
        ExperimentalDesign des = build_design(c, basic_tuple_set(c));
        SpectrumEdge e = gram_spectrum_edges(design_matrix(des));
        bool rank_ok = e.factorised && e.lambda_min > 1e-10 * e.lambda_max;
        if (d <= 5 && !rank_ok) full_rank = false;
        cond[d] = std::sqrt(e.lambda_max / e.lambda_min);
        pinv[d] = 1.0 / std::sqrt(e.lambda_min);
        printf("  d=%d: cond=%.4f pinv_norm=%.4f rank %s\n", d, cond[d], pinv[d],
               rank_ok ? "full" : "DEFICIENT");
    }
    bool d3_ok = std::abs(cond[3] - 29.39) / 29.39 < 0.02 &&
                 std::abs(pinv[3] - 5.4211) / 5.4211 < 0.02;
    bool growth_ok = cond[11] / cond[3] < 1.12 && pinv[11] / pinv[3] < 1.12 &&
                     cond[11] >= cond[3] * 0.999 && pinv[11] >= pinv[3] * 0.999;
    bool ok = full_rank && d3_ok && growth_ok;
    printf("criterion 2: %s (full rank d<=5: %s; d=3 cond %.4f vs 29.39 and pinv %.4f vs "
           "5.4211 within 2%%: %s; growth d=3->11 %.2f%%/%.2f%% < 12%%: %s)\n",
           ok ? "PASS" : "FAIL", full_rank ? "yes" : "no", cond[3], pinv[3],
           d3_ok ? "yes" : "no", 100 * (cond[11] / cond[3] - 1),
           100 * (pinv[11] / pinv[3] - 1), growth_ok ? "yes" : "no");
    return ok;
}

// ---------------------------------------------------------------------------
// 3. Prediction/simulation agreement of the error distribution.
bool criterion_3() {
    Circuit c = build_rotated_surface_circuit(3);
    ExperimentalDesign d = build_design(c, basic_tuple_set(c));
    NoiseModel noise = depolarising_model(c, 1e-3, 5e-3, 2e-3);
    MeritContext ctx = make_merit_context(d, noise);
    CovarianceResult cov = gate_covariance(ctx, d.weights, EstimatorKind::WLS);
    MeritReport rep = merit_from_traces(cov.trace, cov.trace_sq, ctx.N, EstimatorKind::WLS);
    NrmseDistribution dist = nrmse_distribution(cov.sigma, 1.0, ctx.N, 100000, 1234);

    const double S = 1e8;
    const int trials = 200;
    ShotAllocation alloc = shot_allocation(d, S);
    std::vector<double> truth = true_column_eigenvalues(d, noise);
    std::vector<double> empirical;
    for (int t = 0; t < trials; t++) {
        OutcomeDataset data = simulate_design(d, noise, S, 1000 + (uint64_t)t, "frame");
        CircuitEigenvalueEstimates est = estimate_circuit_eigenvalues(d, data);
        FitResult fit = fit_gate_eigenvalues(d, est);
        double ss = 0;
        for (size_t i = 0; i < truth.size(); i++) {
            double e = fit.lambda_hat[i] - truth[i];
            ss += e * e;
        }
        empirical.push_back(std::sqrt(alloc.S_prime * ss / truth.size()));
    }
    double mean = 0;
    for (double v : empirical) mean += v;
    mean /= trials;
    double se = dist.sd / std::sqrt((double)trials);
    bool mean_ok = std::abs(mean - rep.merit) < 3 * se;
    double p = ks_p_value(empirical, dist.samples);
    bool ks_ok = p > 0.01;
    bool ok = mean_ok && ks_ok;
    printf("criterion 3: %s (empirical NRMSE mean %.5f vs F=%.5f, |diff|=%.2f "
           "predicted-sd-of-mean < 3; KS p=%.4f > 0.01; d=3 basic, S=1e8, %d trials)\n",
           ok ? "PASS" : "FAIL", mean, rep.merit, std::abs(mean - rep.merit) / se, p,
           trials);
    return ok;
}

// ---------------------------------------------------------------------------
// 4. Optimisation gain at d=3 under the seed-0 log-normal instance.
bool criterion_4() {
    Circuit c = build_rotated_surface_circuit(3);
    NoiseModel noise = reference_lognormal(c, 0);
    ExperimentalDesign basic = build_design(c, basic_tuple_set(c));
    double f_basic = merit(basic, noise, EstimatorKind::WLS).merit;
    printf("  basic design F=%.5f\n", f_basic);
    fflush(stdout);

    OptimiserConfig cfg;
    cfg.n_ex = 3;
    cfg.l_ex = 5;
    cfg.f_trial = 4;
    cfg.l_set = 16;
    cfg.max_grad_steps = 150;
    cfg.max_rep_cycles = 2;
    OptimisationHistory hist;
    ExperimentalDesign opt = optimise_design(c, noise, cfg, &hist);
    double f_opt = merit(opt, noise, EstimatorKind::WLS).merit;
    double gain = f_basic / f_opt;
    bool ok = gain >= 2.5;
    printf("criterion 4: %s (optimised F=%.5f, gain F(basic)/F(opt)=%.3f >= 2.5; %zu "
           "tuples; seed-0 log-normal r1=0.075%% r2=0.5%% rm=2%%)\n",
           ok ? "PASS" : "FAIL", f_opt, gain, opt.blocks.size());
    return ok;
}

// ---------------------------------------------------------------------------
// 5. Analytic shot-weight gradients vs central finite differences.
bool criterion_5() {
    struct Case {
        std::string name;
        MeritContext ctx;
        std::vector<double> gamma;
    };
    std::vector<Case> cases;

    {
        Circuit c = build_rotated_surface_circuit(3);
        auto tuples = basic_tuple_set(c);
        ExperimentalDesign d = build_design(c, tuples);
        NoiseModel noise = depolarising_model(c, 1e-3, 5e-3, 2e-3);
        Case cs{"rotated d=3 basic", make_merit_context(d, noise), {}};
        for (size_t i = 0; i < d.weights.size(); i++)
            cs.gamma.push_back(-std::log(d.weights[i]) + 0.11 * (double)i);
        cases.push_back(std::move(cs));
    }
    {
        Circuit c;
        c.n = 2;
        c.family = "custom";
        c.layers = {make_layer({{GateKind::H, 0, 0}, {GateKind::S, 1, 0}},
                               LayerClass::single_qubit, 2),
                    make_layer({{GateKind::CZ, 0, 1}}, LayerClass::two_qubit, 2)};
        c.meas_reset_time = 660e-9;
        c.compute_unique_index();
        auto tuples = basic_tuple_set(c);
        tuples.push_back(LayerTuple{{1, 2}});
        tuples.push_back(LayerTuple{{2, 1, 2}});
        ExperimentalDesign d = build_design(c, tuples);
        NoiseModel noise = depolarising_model(c, 2e-3, 8e-3, 5e-3);
        Case cs{"2-layer toy", make_merit_context(d, noise), {}};
        for (size_t i = 0; i < d.weights.size(); i++)
            cs.gamma.push_back(-std::log(d.weights[i]) + 0.17 * (double)i);
        cases.push_back(std::move(cs));
    }

    bool ok = true;
    const double h = 1e-5;
    for (const Case& cs : cases) {
        for (auto kind : {EstimatorKind::OLS, EstimatorKind::WLS, EstimatorKind::GLS}) {
            std::vector<double> grad =
                gradient_log_weights(cs.ctx, softmax_neg(cs.gamma), kind);
            double gnorm = 0, enorm = 0;
            for (size_t i = 0; i < cs.gamma.size(); i++) {
                std::vector<double> gp = cs.gamma, gm = cs.gamma;
                gp[i] += h;
                gm[i] -= h;
                double fd = (merit(cs.ctx, softmax_neg(gp), kind).merit -
                             merit(cs.ctx, softmax_neg(gm), kind).merit) /
                            (2 * h);
                gnorm += fd * fd;
                enorm += (grad[i] - fd) * (grad[i] - fd);
            }
            double rel = std::sqrt(enorm / gnorm);
            printf("  %s %s: rel error %.2e\n", cs.name.c_str(), estimator_kind_name(kind),
                   rel);
            ok = ok && rel < 1e-6;
        }
    }
    printf("criterion 5: %s (analytic vs central-FD gradients, relative error < 1e-6 for "
           "OLS/WLS/GLS on both circuits)\n",
           ok ? "PASS" : "FAIL");
    return ok;
}

// ---------------------------------------------------------------------------
// 6. Toy-model scaling laws.
bool criterion_6() {
    const double lm = 0.96, tau = 660.0 / 29.0;

    // Sample-optimised law: phi_opt ~ 1/(1-lambda), so phi_opt (1-lambda) is
    // constant, and F' ~ (1-lambda) (log-log slope 1).
    std::vector<double> scaled, logf, logx;
    for (double lam : {0.99, 0.999, 0.9999}) {
        ToyOptimum opt = toy_optimal(lam, lm, tau, false);
        scaled.push_back(opt.phi_continuous * (1 - lam));
        logx.push_back(std::log(1 - lam));
        logf.push_back(std::log(opt.f_opt));
    }
    double spread = *std::max_element(scaled.begin(), scaled.end()) /
                    *std::min_element(scaled.begin(), scaled.end());
    double slope_sample = fit_slope(logx, logf);
    printf("  sample-optimised F': phi_opt(1-lambda) spread %.4f (< 1.10), slope %.4f "
           "(target 1.0 +- 0.05)\n",
           spread, slope_sample);

    // Time-optimised law: F ~ sqrt(1-lambda).  The square-root asymptote sets
    // in more slowly, so the slope is measured deeper into lambda -> 1.
    logx.clear();
    logf.clear();
    for (double lam : {0.999, 0.9997, 0.9999, 0.99997, 0.99999}) {
        ToyOptimum opt = toy_optimal(lam, lm, tau, true);
        logx.push_back(std::log(1 - lam));
        logf.push_back(std::log(opt.f_opt));
    }
    double slope_time = fit_slope(logx, logf);
    printf("  time-optimised F: slope %.4f (target 0.5 +- 0.05)\n", slope_time);

    bool ok = spread < 1.10 && std::abs(slope_sample - 1.0) < 0.05 &&
              std::abs(slope_time - 0.5) < 0.05;
    printf("criterion 6: %s (phi_opt(1-lambda) constant within 10%% over lambda in "
           "{0.99,0.999,0.9999}; log-log slopes 1.0 +- 0.05 sample-optimised, 0.5 +- "
           "0.05 time-optimised)\n",
           ok ? "PASS" : "FAIL");
    return ok;
}

// ---------------------------------------------------------------------------
// 7. Sample-efficiency trend of the per-type median TVDs.
bool criterion_7() {
    ExperimentalDesign d = bundled_design_at(5);
    NoiseModel noise = reference_lognormal(d.circuit, 0);
    std::vector<double> log_s, pauli_tvd, meas_tvd;
    for (double S : {1e6, 1e7, 1e8}) {
        OutcomeDataset data = simulate_design(d, noise, S, 7, "frame");
        CircuitEigenvalueEstimates est = estimate_circuit_eigenvalues(d, data);
        FitResult fit = fit_gate_eigenvalues(d, est);
        ShotAllocation alloc = shot_allocation(d, S);
        EstimationReport rep = report_metrics(d, fit, &noise, alloc.S_prime);
        log_s.push_back(std::log10(S));
        pauli_tvd.push_back(std::log10(rep.type_median_tvd.at("pauli")));
        meas_tvd.push_back(std::log10(rep.type_median_tvd.at("measurement")));
        printf("  S=%.0e: median TVD pauli %.3e, measurement %.3e\n", S,
               rep.type_median_tvd.at("pauli"), rep.type_median_tvd.at("measurement"));
        fflush(stdout);
    }
    double sp = fit_slope(log_s, pauli_tvd);
    double sm = fit_slope(log_s, meas_tvd);
    bool ok = std::abs(sp + 0.5) < 0.075 && std::abs(sm + 0.5) < 0.075;
    printf("criterion 7: %s (log-log TVD slope vs S: pauli %.4f, measurement %.4f; "
           "target -0.5 +- 0.075; d=5 bundled design, seed-0 log-normal)\n",
           ok ? "PASS" : "FAIL", sp, sm);
    return ok;
}

// ---------------------------------------------------------------------------
// 8. Micro-scale oracle equivalence: frame simulation vs analytic eigenvalues
// on every 2-qubit circuit of at most 3 layers, plus exact transform checks.
bool criterion_8() {
    // Layer alphabet: CZ, or an ordered pair of single-qubit gates from
    // {I, H, S, X} (the all-identity layer excluded).
    std::vector<Layer> alphabet;
    alphabet.push_back(make_layer({{GateKind::CZ, 0, 1}}, LayerClass::two_qubit, 2));
    const GateKind singles[4] = {GateKind::I, GateKind::H, GateKind::S, GateKind::X};
    for (GateKind g0 : singles)
        for (GateKind g1 : singles) {
            if (g0 == GateKind::I && g1 == GateKind::I) continue;
            alphabet.push_back(
                make_layer({{g0, 0, 0}, {g1, 1, 0}}, LayerClass::single_qubit, 2));
        }

    const int64_t shots = 1000000;
    size_t circuits = 0, rows_checked = 0;
    double worst = 0;
    bool ok = true;
    size_t n_types = alphabet.size();
    for (size_t len = 1; len <= 3 && ok; len++) {
        size_t count = 1;
        for (size_t i = 0; i < len; i++) count *= n_types;
        for (size_t code = 0; code < count && ok; code++) {
            Circuit c;
            c.n = 2;
            c.family = "custom";
            size_t rem = code;
            for (size_t i = 0; i < len; i++) {
                c.layers.push_back(alphabet[rem % n_types]);
                rem /= n_types;
            }
            c.meas_reset_time = 660e-9;
            c.compute_unique_index();
            LayerTuple t{c.unique_index};
            ExperimentalDesign d = build_design(c, {t});

            // Random Pauli channels, deterministic per circuit.
            NoiseModel m = depolarising_model(c, 0.05, 0.08, 0.04);
            uint64_t key = CounterRng::derive(0xace5, (uint64_t)(len * 1000003 + code));
            for (GateChannel& ch : m.channels) {
                CounterRng rng(CounterRng::derive(key, ch.id.key()));
                if (ch.is_measurement()) {
                    double p = 0.01 + 0.05 * rng.uniform();
                    ch.probs = {1 - p, p};
                } else {
                    double total = 0;
                    for (size_t a = 1; a < ch.probs.size(); a++) {
                        ch.probs[a] = 0.12 * rng.uniform() / (ch.probs.size() - 1);
                        total += ch.probs[a];
                    }
                    ch.probs[0] = 1 - total;
                }
                ch.refresh_eigenvalues();
            }

            const TupleBlock& blk = d.blocks[0];
            std::vector<double> lam_cols = column_eigenvalues(d, m);
            std::vector<double> truth = circuit_eigenvalues(blk.matrix, lam_cols);
            std::vector<double> num(blk.rows(), 0), den(blk.rows(), 0);
            for (size_t e = 0; e < blk.experiments.size(); e++) {
                std::vector<int64_t> plus = simulate_experiment(d, m, 0, e, shots, key);
                const Experiment& ex = blk.experiments[e];
                for (size_t i = 0; i < ex.rows.size(); i++) {
                    num[ex.rows[i]] += (double)plus[i];
                    den[ex.rows[i]] += (double)shots;
                }
            }
            for (uint32_t r = 0; r < blk.rows(); r++) {
                double est = 2.0 * num[r] / den[r] - 1.0;
                double se = std::sqrt(std::max(1e-12, 1 - truth[r] * truth[r]) / den[r]);
                double dev = std::abs(est - truth[r]) / se;
                worst = std::max(worst, dev);
                rows_checked++;
                if (std::abs(est - truth[r]) > 4 * se + 2e-4) {
                    printf("  mismatch: len=%zu code=%zu row %u: est %.6f truth %.6f "
                           "(%.2f se)\n",
                           len, code, r, est, truth[r], dev);
                    ok = false;
                }
            }
            circuits++;
        }
    }
    printf("  %zu circuits, %zu rows, worst deviation %.2f se\n", circuits, rows_checked,
           worst);

    // Dense Walsh-Hadamard and marginalisation identities.
    bool exact = true;
    CounterRng rng(99);
    for (int rep = 0; rep < 200 && exact; rep++) {
        std::vector<double> p(16);
        double tot = 0;
        for (double& x : p) { x = rng.uniform(); tot += x; }
        for (double& x : p) x /= tot;
        std::vector<double> eig = wht_forward(p);
        std::vector<double> back = wht_inverse(eig);
        for (int a = 0; a < 16; a++) exact &= std::abs(back[a] - p[a]) < 1e-12;
        exact &= std::abs(eig[0] - 1.0) < 1e-12;
        // Marginal channel eigenvalues are the subset eigenvalues with the
        // identity on the traced-out qubit.
        for (uint32_t q = 0; q < 2 && exact; q++) {
            std::vector<double> marg = marginalise(p, 2, {q});
            std::vector<double> meig = wht_forward(marg);
            for (uint32_t a = 0; a < 4; a++) {
                uint32_t full = (q == 0) ? a : a << 2;
                exact &= std::abs(meig[a] - eig[full]) < 1e-12;
            }
        }
        // A valid distribution is a fixed point of the simplex projection.
        std::vector<double> proj = project_simplex(p);
        for (int a = 0; a < 16; a++) exact &= std::abs(proj[a] - p[a]) < 1e-12;
    }
    ok = ok && exact;
    printf("criterion 8: %s (frame vs analytic within 4 se + 2e-4 over all <=3-layer "
           "2-qubit circuits at 1e6 shots; WHT/marginalisation identities exact to "
           "1e-12: %s)\n",
           ok ? "PASS" : "FAIL", exact ? "yes" : "no");
    return ok;
}

// ---------------------------------------------------------------------------
// 9. Desk-scale capability: transfer to d=15, simulate 1e6 shots, estimate.
bool criterion_9() {
    double t0 = now_seconds();
    ExperimentalDesign d = bundled_design_at(15);
    double t1 = now_seconds();
    printf("  design: %u rows x %u cols, %zu experiments (%.1f s)\n", d.rows(), d.cols(),
           d.total_experiments(), t1 - t0);
    fflush(stdout);
    NoiseModel noise = reference_lognormal(d.circuit, 0);
    OutcomeDataset data = simulate_design(d, noise, 1e6, 15, "frame");
    double t2 = now_seconds();
    printf("  simulation: %.1f s\n", t2 - t1);
    fflush(stdout);
    CircuitEigenvalueEstimates est = estimate_circuit_eigenvalues(d, data);
    FitResult fit = fit_gate_eigenvalues(d, est);
    ShotAllocation alloc = shot_allocation(d, 1e6);
    EstimationReport rep = report_metrics(d, fit, &noise, alloc.S_prime);
    double t3 = now_seconds();
    double total = t3 - t0;
    bool ok = total < 1800.0 && fit.lambda_hat.size() == d.cols();
    printf("criterion 9: %s (d=15 transfer + S=1e6 simulation + estimation in %.1f s "
           "< 1800 s; fit %s, NRMSE %.3f)\n",
           ok ? "PASS" : "FAIL", total, fit.converged ? "converged" : "not converged",
           rep.nrmse);
    return ok;
}

// ---------------------------------------------------------------------------
// 10. Paper-design replication at d=25.
bool criterion_10() {
    ExperimentalDesign d = bundled_design_at(25);
    size_t experiments = d.total_experiments();
    uint32_t rows = d.rows(), cols = d.cols();
    bool ok = experiments == 261 && rows == 267357 && cols == 51576;
    printf("criterion 10: %s (bundled 31-tuple design at d=25: %zu experiments (expect "
           "261), %u rows (expect 267357), %u columns (expect 51576))\n",
           ok ? "PASS" : "FAIL", experiments, rows, cols);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        fprintf(stderr, "usage: acceptance <criterion 1..10> <data dir>\n");
        return 2;
    }
    int k = std::atoi(argv[1]);
    g_data_dir = argv[2];
    bool ok = false;
    switch (k) {
        case 1: ok = criterion_1(); break;
        case 2: ok = criterion_2(); break;
        case 3: ok = criterion_3(); break;
        case 4: ok = criterion_4(); break;
        case 5: ok = criterion_5(); break;
        case 6: ok = criterion_6(); break;
        case 7: ok = criterion_7(); break;
        case 8: ok = criterion_8(); break;
        case 9: ok = criterion_9(); break;
        case 10: ok = criterion_10(); break;
        default: fprintf(stderr, "unknown criterion %d\n", k); return 2;
    }
    return ok ? 0 : 1;
}
