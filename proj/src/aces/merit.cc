#include "aces/merit.h"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aces/rng.h"

namespace aces {

const char* estimator_kind_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::OLS: return "OLS";
        case EstimatorKind::WLS: return "WLS";
        case EstimatorKind::GLS: return "GLS";
    }
    return "?";
}

EstimatorKind estimator_kind_from_name(const std::string& s) {
    if (s == "OLS" || s == "ols") return EstimatorKind::OLS;
    if (s == "WLS" || s == "wls") return EstimatorKind::WLS;
    if (s == "GLS" || s == "gls") return EstimatorKind::GLS;
    throw std::invalid_argument("unknown estimator kind: " + s);
}

namespace {

constexpr uint32_t kDenseGuard = 5000;

// Cholesky with a diagnostic that names deficient columns on failure.
Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& h) {
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() == Eigen::Success) return llt;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
    std::string msg = "singular normal matrix; rank " + std::to_string(lu.rank()) + " of " +
                      std::to_string(h.rows()) + "; near-null columns:";
    Eigen::MatrixXd kernel = lu.kernel();
    int shown = 0;
    for (int c = 0; c < kernel.cols() && shown < 8; c++) {
        int idx;
        kernel.col(c).cwiseAbs().maxCoeff(&idx);
        msg += " " + std::to_string(idx);
        shown++;
    }
    throw std::runtime_error(msg);
}

}  // namespace

double basic_time_factor(const Circuit& c) {
    // Default weights are proportional to 1/tau, so the time factor is the
    // harmonic mean of the basic tuple durations.
    double inv = 0;
    auto basic = basic_tuple_set(c);
    for (const auto& t : basic) inv += 1.0 / c.tuple_duration(t);
    return basic.size() / inv;
}

TupleContextBlock make_context_block(const TupleBlock& b,
                                     const std::vector<double>& lambda_cols) {
    TupleContextBlock out;
    out.tau = b.tau;
    out.rows = b.rows();
    for (uint32_t r = 0; r < b.rows(); r++)
        for (uint32_t k = b.matrix.row_ptr[r]; k < b.matrix.row_ptr[r + 1]; k++)
            out.triplets.emplace_back((int)r, (int)b.matrix.col[k], (double)b.matrix.val[k]);

    // Per-shot log covariance via the first-order map
    // Omega'_ab = Omega_ab / (Lambda_a Lambda_b), scaled by |E_T|.
    auto lam = circuit_eigenvalues(b.matrix, lambda_cols);
    TupleCovariance cov = tuple_covariance(b, lambda_cols);
    double scale = (double)b.experiments.size();
    out.omega = Eigen::MatrixXd::Zero(b.rows(), b.rows());
    for (uint32_t r = 0; r < b.rows(); r++)
        out.omega(r, r) = scale * cov.diag[r] / (lam[r] * lam[r]);
    for (size_t k = 0; k < cov.pairs.size(); k++) {
        auto [ra, rb] = cov.pairs[k];
        double v = scale * cov.offdiag[k] / (lam[ra] * lam[rb]);
        out.omega(ra, rb) = v;
        out.omega(rb, ra) = v;
    }
    return out;
}

MeritContext assemble_merit_context(const std::vector<const TupleContextBlock*>& blocks,
                                    const std::vector<double>& lambda_cols,
                                    double tau_basic, uint32_t n_cols) {
    if (n_cols > kDenseGuard)
        throw std::runtime_error(
            "gate eigenvalue count too large for dense covariance; use moment approximation");
    MeritContext ctx;
    ctx.N = n_cols;
    ctx.tau_basic = tau_basic;
    ctx.lambda = Eigen::Map<const Eigen::VectorXd>(lambda_cols.data(), (int)lambda_cols.size());

    std::vector<Eigen::Triplet<double>> trip;
    uint32_t row = 0;
    for (const TupleContextBlock* b : blocks) {
        ctx.block_start.push_back(row);
        ctx.tau.push_back(b->tau);
        for (const auto& t : b->triplets)
            trip.emplace_back((int)row + t.row(), t.col(), t.value());
        ctx.omega_star.push_back(b->omega / tau_basic);
        row += b->rows;
    }
    ctx.M = row;
    ctx.block_start.push_back(row);
    ctx.A.resize(ctx.M, ctx.N);
    ctx.A.setFromTriplets(trip.begin(), trip.end());
    return ctx;
}

MeritContext make_merit_context(const ExperimentalDesign& d, const NoiseModel& m) {
    auto lambda_cols = column_eigenvalues(d, m);
    std::vector<TupleContextBlock> blocks;
    blocks.reserve(d.blocks.size());
    for (const auto& b : d.blocks) blocks.push_back(make_context_block(b, lambda_cols));
    std::vector<const TupleContextBlock*> ptrs;
    for (const auto& b : blocks) ptrs.push_back(&b);
    return assemble_merit_context(ptrs, lambda_cols, basic_time_factor(d.circuit), d.cols());
}

CovarianceResult gate_covariance(const MeritContext& ctx, const std::vector<double>& weights,
                                 EstimatorKind kind) {
    if (weights.size() != ctx.tuples())
        throw std::invalid_argument("weight count does not match tuple count");
    double time_factor = 0;
    for (size_t i = 0; i < weights.size(); i++) time_factor += weights[i] * ctx.tau[i];

    // Block scale factors: Omega'_U = (tau_{T,Gamma} / Gamma_U) Omega*_U.
    std::vector<double> block_scale(ctx.tuples());
    for (size_t i = 0; i < weights.size(); i++) {
        if (weights[i] <= 0) throw std::invalid_argument("shot weights must be positive");
        block_scale[i] = time_factor / weights[i];
    }

    CovarianceResult res;
    const auto& a = ctx.A;

    if (kind == EstimatorKind::GLS) {
        // Sigma' = (A^T Omega'^-1 A)^-1, accumulated per block.
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(ctx.N, ctx.N);
        for (size_t u = 0; u < ctx.tuples(); u++) {
            uint32_t r0 = ctx.block_start[u], r1 = ctx.block_start[u + 1];
            Eigen::MatrixXd au = Eigen::MatrixXd(a.middleRows(r0, r1 - r0));
            Eigen::MatrixXd ob = block_scale[u] * ctx.omega_star[u];
            Eigen::LLT<Eigen::MatrixXd> bl(ob);
            if (bl.info() != Eigen::Success)
                throw std::runtime_error("covariance block not positive definite");
            h.noalias() += au.transpose() * bl.solve(au);
        }
        auto llt = checked_llt(h);
        Eigen::MatrixXd sigma_p = llt.solve(Eigen::MatrixXd::Identity(ctx.N, ctx.N));
        res.sigma = ctx.lambda.asDiagonal() * sigma_p * ctx.lambda.asDiagonal();
        // a_star = diag(lambda) (A^T O^-1 A)^-1 A^T O^-1, built blockwise.
        res.a_star.resize(ctx.N, ctx.M);
        for (size_t u = 0; u < ctx.tuples(); u++) {
            uint32_t r0 = ctx.block_start[u], r1 = ctx.block_start[u + 1];
            Eigen::MatrixXd au = Eigen::MatrixXd(a.middleRows(r0, r1 - r0));
            Eigen::MatrixXd ob = block_scale[u] * ctx.omega_star[u];
            res.a_star.middleCols(r0, r1 - r0) =
                ctx.lambda.asDiagonal() *
                llt.solve(Eigen::LLT<Eigen::MatrixXd>(ob).solve(au).transpose());
        }
    } else {
        // OLS (W = I) and WLS (W = diag(Omega')^-1) share the sandwich form
        //   Sigma' = H^-1 A^T W Omega' W A H^-1,  H = A^T W A.
        Eigen::VectorXd w = Eigen::VectorXd::Ones(ctx.M);
        if (kind == EstimatorKind::WLS) {
            for (size_t u = 0; u < ctx.tuples(); u++) {
                uint32_t r0 = ctx.block_start[u], r1 = ctx.block_start[u + 1];
                for (uint32_t r = r0; r < r1; r++)
                    w[r] = 1.0 / (block_scale[u] * ctx.omega_star[u](r - r0, r - r0));
            }
            res.w_diag = w;
        }
        Eigen::SparseMatrix<double> wa = w.asDiagonal() * a;
        Eigen::MatrixXd h = Eigen::MatrixXd(a.transpose() * wa);
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ctx.N, ctx.N);
        for (size_t u = 0; u < ctx.tuples(); u++) {
            uint32_t r0 = ctx.block_start[u], r1 = ctx.block_start[u + 1];
            Eigen::MatrixXd wau = Eigen::MatrixXd(wa.middleRows(r0, r1 - r0));
            k.noalias() +=
                wau.transpose() * (block_scale[u] * ctx.omega_star[u]) * wau;
        }
        auto llt = checked_llt(h);
        Eigen::MatrixXd hin_k = llt.solve(k);
        Eigen::MatrixXd sigma_p = llt.solve(hin_k.transpose()).transpose();
        sigma_p = 0.5 * (sigma_p + sigma_p.transpose());
        res.sigma = ctx.lambda.asDiagonal() * sigma_p * ctx.lambda.asDiagonal();
        res.a_star =
            ctx.lambda.asDiagonal() * llt.solve(Eigen::MatrixXd(wa.transpose()));
    }
    res.trace = res.sigma.trace();
    res.trace_sq = res.sigma.squaredNorm();  // symmetric: tr(S^2) = ||S||_F^2
    return res;
}

MeritReport merit_from_traces(double tr, double tr2, uint32_t n, EstimatorKind kind) {
    MeritReport rep;
    rep.estimator_kind = kind;
    rep.trace_sigma = tr;
    rep.trace_sigma_sq = tr2;
    rep.N = n;
    double ratio = tr2 / (tr * tr);
    rep.merit = std::sqrt(tr / n) * (1.0 - 0.25 * ratio);
    rep.variance = (tr2 / tr) / (2.0 * n) * (1.0 - 0.125 * ratio);
    return rep;
}

MeritReport merit(const MeritContext& ctx, const std::vector<double>& weights,
                  EstimatorKind kind) {
    CovarianceResult cov = gate_covariance(ctx, weights, kind);
    return merit_from_traces(cov.trace, cov.trace_sq, ctx.N, kind);
}

Eigen::MatrixXd gate_covariance(const ExperimentalDesign& d, const NoiseModel& m,
                                EstimatorKind kind) {
    MeritContext ctx = make_merit_context(d, m);
    return gate_covariance(ctx, d.weights, kind).sigma;
}

MeritReport merit(const ExperimentalDesign& d, const NoiseModel& m, EstimatorKind kind) {
    MeritContext ctx = make_merit_context(d, m);
    return merit(ctx, d.weights, kind);
}

double NrmseDistribution::quantile(double p) const {
    if (samples.empty()) throw std::logic_error("empty distribution");
    if (p <= 0) return samples.front();
    if (p >= 1) return samples.back();
    double idx = p * (samples.size() - 1);
    size_t lo = (size_t)idx;
    double frac = idx - lo;
    return samples[lo] * (1 - frac) + samples[std::min(lo + 1, samples.size() - 1)] * frac;
}

NrmseDistribution nrmse_distribution(const Eigen::MatrixXd& sigma, double s_prime, uint32_t n,
                                     size_t draws, uint64_t seed) {
    if (sigma.rows() > (int)kDenseGuard)
        throw std::runtime_error("covariance too large for eigendecomposition; "
                                 "use moment approximation");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0);

    NrmseDistribution out;
    out.samples.resize(draws);
    CounterRng rng(CounterRng::derive(seed, 0x6e726d7365ull));
    double scale = s_prime / n;
    for (size_t s = 0; s < draws; s++) {
        double q = 0;
        for (int v = 0; v < sv.size(); v++) {
            double z = rng.normal();
            q += sv[v] * z * z;
        }
        out.samples[s] = std::sqrt(scale * q);
    }
    std::sort(out.samples.begin(), out.samples.end());
    double sum = 0, sum2 = 0;
    for (double x : out.samples) { sum += x; sum2 += x * x; }
    out.mean = sum / draws;
    out.sd = std::sqrt(std::max(0.0, sum2 / draws - out.mean * out.mean));
    return out;
}

namespace {

void toy_check(double lambda, double lambda_m, double phi) {
    if (!(lambda > 0 && lambda <= 1) || !(lambda_m > 0 && lambda_m <= 1))
        throw std::invalid_argument("toy eigenvalues must lie in (0, 1]");
    if (!(phi >= 1)) throw std::invalid_argument("toy repetition gap must be >= 1");
}

double toy_f1(double l, double lm, double phi1, double phi) {
    return l * l * (std::pow(l, -2 * phi1) - lm * lm) / (phi * phi);
}
double toy_f2(double l, double lm, double phi1, double phi) {
    return l * l * (std::pow(l, -2 * (phi1 + phi)) - lm * lm) / (phi * phi);
}

}  // namespace

double toy_merit(double lambda, double lambda_m, double tau, double phi1, double phi,
                 double gamma) {
    toy_check(lambda, lambda_m, phi);
    if (!(tau > 0)) throw std::invalid_argument("toy tau must be positive");
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("toy gamma must be in (0, 1)");
    double f1 = toy_f1(lambda, lambda_m, phi1, phi);
    double f2 = toy_f2(lambda, lambda_m, phi1, phi);
    return std::sqrt((2 * tau + 1) * (tau + phi1 + gamma * phi) / (4 * tau * (tau + 1)) *
                     (f1 / (1 - gamma) + f2 / gamma));
}

double toy_optimal_gamma(double lambda, double lambda_m, double tau, double phi1, double phi) {
    toy_check(lambda, lambda_m, phi);
    double f1 = toy_f1(lambda, lambda_m, phi1, phi);
    double f2 = toy_f2(lambda, lambda_m, phi1, phi);
    double a = std::sqrt((tau + phi1 + phi) * f1), b = std::sqrt((tau + phi1) * f2);
    return b / (a + b);
}

double toy_merit_time(double lambda, double lambda_m, double tau, double phi) {
    toy_check(lambda, lambda_m, phi);
    double lm2 = lambda_m * lambda_m;
    return std::sqrt((2 * tau + 1) / (4 * tau * (tau + 1))) * lambda / phi *
           (std::sqrt(tau * (1 - lm2)) +
            std::sqrt((tau + phi) * (std::pow(lambda, -2 * phi) - lm2)));
}

double toy_merit_sample(double lambda, double lambda_m, double phi) {
    toy_check(lambda, lambda_m, phi);
    double lm2 = lambda_m * lambda_m;
    return lambda / (std::sqrt(2.0) * phi) *
           (std::sqrt(1 - lm2) + std::sqrt(std::pow(lambda, -2 * phi) - lm2));
}

ToyOptimum toy_optimal(double lambda, double lambda_m, double tau, bool account_time) {
    toy_check(lambda, lambda_m, 1.0);
    auto f = [&](double phi) {
        return account_time ? toy_merit_time(lambda, lambda_m, tau, phi)
                            : toy_merit_sample(lambda, lambda_m, phi);
    };
    // Golden-section search on log(phi); the objective is unimodal.
    double lo = 0.0, hi = std::log(1e9);
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = f(std::exp(c)), fd = f(std::exp(d));
    for (int it = 0; it < 200; it++) {
        if (fc < fd) {
            hi = d; d = c; fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(std::exp(c));
        } else {
            lo = c; c = d; fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(std::exp(d));
        }
    }
    ToyOptimum out;
    out.phi_continuous = std::exp(0.5 * (lo + hi));
    long long fl = std::max(1ll, (long long)std::floor(out.phi_continuous));
    long long ce = fl + 1;
    out.phi_opt = f((double)fl) <= f((double)ce) ? fl : ce;
    out.f_opt = f((double)out.phi_opt);
    out.gamma_opt = account_time
                        ? toy_optimal_gamma(lambda, lambda_m, tau, 0, (double)out.phi_opt)
                        : [&] {
                              double f1 = toy_f1(lambda, lambda_m, 0, (double)out.phi_opt);
                              double f2 = toy_f2(lambda, lambda_m, 0, (double)out.phi_opt);
                              return std::sqrt(f2) / (std::sqrt(f1) + std::sqrt(f2));
                          }();
    return out;
}

}  // namespace aces
