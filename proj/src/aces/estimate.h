#ifndef ACES_ESTIMATE_H
#define ACES_ESTIMATE_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aces/design.h"
#include "aces/noise.h"
#include "aces/simulator.h"

namespace aces {

enum class FitMethod { OLS, WLS, FGLS };
const char* fit_method_name(FitMethod m);
FitMethod fit_method_from_name(const std::string& s);

// Pooled circuit-eigenvalue estimates over the global design rows (blocks
// concatenated in design order).
struct CircuitEigenvalueEstimates {
    std::vector<double> lambda_hat;   // (2 * plus / shots) - 1, shot-weighted
    std::vector<double> variance;     // (1 - lambda_hat^2) / total_shots
    std::vector<double> total_shots;  // pooled over measuring experiments
    std::vector<uint32_t> block_start;  // per tuple, plus total rows

    uint32_t rows() const { return block_start.empty() ? 0 : block_start.back(); }
};

CircuitEigenvalueEstimates estimate_circuit_eigenvalues(const ExperimentalDesign& d,
                                                        const OutcomeDataset& data);

struct FitOptions {
    FitMethod method = FitMethod::WLS;
    int max_iterations = 10;       // FGLS refinement cap
    double tol = 1e-10;            // FGLS infinity-norm step tolerance
    uint32_t gls_block_limit = 1500;  // rows per tuple above which FGLS -> WLS
};

struct FitResult {
    FitMethod method = FitMethod::WLS;
    std::vector<double> x_hat;       // gate log-eigenvalues, >= 0
    std::vector<double> lambda_hat;  // exp(-x_hat), in (0, 1]
    // Diagnostics.
    uint32_t rows_excluded = 0;      // zero-shot rows dropped
    uint32_t rows_clipped = 0;       // lambda_hat rows clipped to the floor
    uint32_t negative_zeroed = 0;    // x entries set to 0
    uint32_t clipped_to_one = 0;     // lambda entries clipped to 1 (= negatives)
    int iterations = 0;              // FGLS refinement steps taken
    bool converged = true;
    bool fell_back_to_wls = false;   // FGLS size guard triggered
};

// Log-linear least squares for the gate log-eigenvalues:  b = -log Lambda_hat
// clipped to [1/(2 shots), 1]; WLS scales rows by sqrt(total_shots
// lambda^2/(1-lambda^2)); FGLS iterates GLS with the covariance rebuilt from
// the current estimates, solved blockwise by dense Cholesky.
FitResult fit_gate_eigenvalues(const ExperimentalDesign& d,
                               const CircuitEigenvalueEstimates& est,
                               const FitOptions& opt = {});

// Per-channel error distributions from fitted eigenvalues: inverse
// Walsh-Hadamard transform followed by a simplex projection.  The result is a
// noise model over the design's circuit with generator "estimated".
NoiseModel recover_probabilities(const ExperimentalDesign& d,
                                 const std::vector<double>& lambda_hat);

// True eigenvalue per design column of a noise model (the regression target).
std::vector<double> true_column_eigenvalues(const ExperimentalDesign& d, const NoiseModel& m);

struct GateTvdEntry {
    ChannelId id;
    std::string type;  // pauli / hadamard / s / cz / cx / measurement
    double tvd = 0;
};

struct EstimationReport {
    FitResult fit;
    NoiseModel recovered;
    bool has_truth = false;
    double nrmse = 0;  // sqrt(S'/N) * ||lambda_hat - lambda||_2
    double s_prime = 0;
    std::vector<GateTvdEntry> gate_tvds;
    std::map<std::string, double> type_median_tvd;
};

// Assemble the report; truth may be null (metrics omitted), s_prime is the
// time-normalised budget entering the NRMSE.
EstimationReport report_metrics(const ExperimentalDesign& d, const FitResult& fit,
                                const NoiseModel* truth, double s_prime);

// Gate-type label used in the per-type TVD medians.
std::string channel_type_name(const ExperimentalDesign& d, ChannelId id);

}  // namespace aces

#endif
