#ifndef ACES_MERIT_H
#define ACES_MERIT_H

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "aces/design.h"
#include "aces/noise.h"

namespace aces {

enum class EstimatorKind : uint8_t { OLS, WLS, GLS };

const char* estimator_kind_name(EstimatorKind k);
EstimatorKind estimator_kind_from_name(const std::string& s);

// Predicted estimator quality for a design under known noise.  All traces are
// reported in units of one measurement shot (S' = 1); the figure of merit and
// variance are normalised and therefore S'-independent.
struct MeritReport {
    EstimatorKind estimator_kind = EstimatorKind::WLS;
    double trace_sigma = 0;     // tr(Sigma) * S'
    double trace_sigma_sq = 0;  // tr(Sigma^2) * S'^2
    double merit = 0;           // F
    double variance = 0;        // V
    uint32_t N = 0;             // gate-eigenvalue count (design columns)
};

// Noise-dependent context precomputed once so that merit and gradient
// evaluations over varying shot weights are cheap.  The covariance block for
// tuple U at shot weights Gamma is (tau_{T,Gamma}/Gamma_U) * omega_star[U],
// where omega_star already carries the per-tuple factor |E_U| / tau_basic.
struct MeritContext {
    Eigen::SparseMatrix<double> A;  // M x N design matrix
    Eigen::VectorXd lambda;         // gate eigenvalues per column (N)
    std::vector<Eigen::MatrixXd> omega_star;  // per tuple, log units
    std::vector<double> tau;                  // per-tuple durations
    std::vector<uint32_t> block_start;        // row offset per tuple (+ total)
    double tau_basic = 0;
    uint32_t M = 0, N = 0;

    size_t tuples() const { return tau.size(); }
};

// Noise-dependent pieces of one tuple's contribution to a merit context,
// reusable across tuple sets (the optimiser caches these per tuple).  omega
// is the per-shot log covariance times |E_T|, without the 1/tau_basic factor.
struct TupleContextBlock {
    std::vector<Eigen::Triplet<double>> triplets;  // (local row, column, power)
    Eigen::MatrixXd omega;
    double tau = 0;
    uint32_t rows = 0;
};

TupleContextBlock make_context_block(const TupleBlock& b,
                                     const std::vector<double>& lambda_cols);
MeritContext assemble_merit_context(const std::vector<const TupleContextBlock*>& blocks,
                                    const std::vector<double>& lambda_cols,
                                    double tau_basic, uint32_t n_cols);
// Default-weight time factor of the circuit's basic tuple set.
double basic_time_factor(const Circuit& c);

MeritContext make_merit_context(const ExperimentalDesign& d, const NoiseModel& m);

// One full covariance evaluation at fixed shot weights.  a_star is the
// lambda-scaled estimator matrix diag(lambda) A^+ used by the analytic
// shot-weight gradients; w_diag is the WLS weight diagonal (empty otherwise).
struct CovarianceResult {
    Eigen::MatrixXd sigma;   // N x N gate eigenvalue covariance, S' = 1 units
    Eigen::MatrixXd a_star;  // N x M
    Eigen::VectorXd w_diag;
    double trace = 0, trace_sq = 0;
};

CovarianceResult gate_covariance(const MeritContext& ctx, const std::vector<double>& weights,
                                 EstimatorKind kind);

MeritReport merit_from_traces(double tr, double tr2, uint32_t n, EstimatorKind kind);
MeritReport merit(const MeritContext& ctx, const std::vector<double>& weights,
                  EstimatorKind kind);

// Convenience entry points using the design's stored shot weights.
Eigen::MatrixXd gate_covariance(const ExperimentalDesign& d, const NoiseModel& m,
                                EstimatorKind kind);
MeritReport merit(const ExperimentalDesign& d, const NoiseModel& m, EstimatorKind kind);

// Monte-Carlo description of the normalised RMS error distribution
// sqrt(S'/N) * ||lambda_hat - lambda||_2, from the generalised chi-squared
// quadratic form with weights given by the eigenvalues of Sigma.  Pass Sigma
// in S' = 1 units together with s_prime = 1 (the normalisation cancels).
struct NrmseDistribution {
    double mean = 0;
    double sd = 0;
    std::vector<double> samples;  // sorted ascending

    double quantile(double p) const;
};

NrmseDistribution nrmse_distribution(const Eigen::MatrixXd& sigma, double s_prime, uint32_t n,
                                     size_t draws = 100000, uint64_t seed = 0);

// Closed forms for the single-Pauli-layer toy model: two tuples repeating the
// layer phi1 and phi2 = phi1 + phi times, measurement/reset time tau in layer
// units, uniform gate eigenvalue lambda and SPAM eigenvalue lambda_m.  The
// merit is the large-n limit restricted to the gate-eigenvalue block.
double toy_merit(double lambda, double lambda_m, double tau, double phi1, double phi,
                 double gamma);
double toy_optimal_gamma(double lambda, double lambda_m, double tau, double phi1, double phi);
// F at the optimal shot weight (phi1 = 0 unless stated).
double toy_merit_time(double lambda, double lambda_m, double tau, double phi);
// The sample-optimised variant F' that ignores gate durations (phi1 = 0).
double toy_merit_sample(double lambda, double lambda_m, double phi);

struct ToyOptimum {
    double phi_continuous = 0;
    long long phi_opt = 1;  // floor/ceil of the continuous optimum, best F
    double gamma_opt = 0;
    double f_opt = 0;
};

ToyOptimum toy_optimal(double lambda, double lambda_m, double tau, bool account_time);

}  // namespace aces

#endif
