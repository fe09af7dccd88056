#ifndef ACES_OPTIMISE_H
#define ACES_OPTIMISE_H

#include <cstdint>
#include <string>
#include <vector>

#include "aces/design.h"
#include "aces/merit.h"
#include "aces/noise.h"
#include "aces/rng.h"

namespace aces {

struct OptimiserConfig {
    // Nesterov shot-weight descent.
    double eta = 5.623413251903491;    // 10^(3/4)
    double mu = 0.99;
    double eta_r = 1.7782794100389228; // 10^(1/4)
    int max_grad_steps = 400;
    int warm_grad_steps = 8;           // inside candidate evaluations
    double tol = 1e-6;                 // relative merit improvement over 10 steps
    // Greedy excursion tuple-set optimisation.
    int n_ex = 3;
    int l_ex = 10;
    int l_set = 0;  // 0 -> 5 * (unique layer count)
    int f_trial = 20;
    // Repetition coordinate descent.
    int max_rep_cycles = 10;
    EstimatorKind estimator = EstimatorKind::WLS;
    uint64_t seed = 0;

    void validate() const;
    int resolved_l_set(const Circuit& c) const;
};

struct OptimisationStep {
    std::string action;
    double merit = 0;
    std::string detail;
};
using OptimisationHistory = std::vector<OptimisationStep>;

// Analytic derivative of the figure of merit with respect to the shot
// log-weights gamma (Gamma_T = softmax(-gamma)_T), at the given weights.
std::vector<double> gradient_log_weights(const MeritContext& ctx,
                                         const std::vector<double>& weights,
                                         EstimatorKind kind);
std::vector<double> gradient_log_weights(const ExperimentalDesign& d, const NoiseModel& m,
                                         EstimatorKind kind);

struct ShotOptimisationResult {
    std::vector<double> weights;
    double merit = 0;
    int steps = 0;
};

// Nesterov-momentum descent on the shot log-weights; worsening steps are
// reverted with the velocity zeroed, and the learning rate shrinks by eta_r
// after two reversions within five steps.  step_cap < 0 uses the config cap.
ShotOptimisationResult optimise_shot_weights(const MeritContext& ctx,
                                             const std::vector<double>& init,
                                             const OptimiserConfig& cfg, int step_cap = -1);
// In-place convenience: updates d.weights.
ShotOptimisationResult optimise_shot_weights(ExperimentalDesign& d, const NoiseModel& m,
                                             const OptimiserConfig& cfg);

// Involution patterns to be repeated many times: each non-empty basic tuple
// for plain circuits; for dynamically decoupled circuits the single-qubit
// layers alone and each multi-qubit layer interleaved with the decoupling
// layer (e.g. (2, 5, 2, 5)).
std::vector<LayerTuple> repeated_tuple_patterns(const Circuit& c);
LayerTuple repeat_pattern(const LayerTuple& pattern, int repetitions);

// Odd repetition numbers per pattern, optimised by coordinate descent on the
// merit of basic + repeated tuples with warm-started shot re-optimisation.
std::vector<int> optimise_repetitions(const Circuit& c, const NoiseModel& m,
                                      const std::vector<LayerTuple>& patterns,
                                      const OptimiserConfig& cfg,
                                      OptimisationHistory* history = nullptr);

// Zipf-distributed integer on [1, u_max] with weight 1/u^s.
uint32_t zipf_sample(CounterRng& rng, double s, uint32_t u_max);

// Random tuple: Zipf(1) length up to twice the circuit depth, optional
// mirroring of the leading floor((L-1)/2) entries, single- or Zipf(2)-copy
// appending; decoupled circuits never repeat multi-qubit layers back-to-back.
LayerTuple sample_random_tuple(const Circuit& c, CounterRng& rng);

// Greedy excursions: grow the tuple set with sampled tuples that reduce the
// merit, then prune while removal helps or the set exceeds its target size.
ExperimentalDesign optimise_tuple_set(const Circuit& c, const NoiseModel& m,
                                      std::vector<LayerTuple> tuples,
                                      const OptimiserConfig& cfg,
                                      OptimisationHistory* history = nullptr);

// Full pipeline: optimise repetitions of the repeated patterns, run the
// excursions from basic + repeated, then a final shot-weight optimisation.
ExperimentalDesign optimise_design(const Circuit& c, const NoiseModel& m,
                                   const OptimiserConfig& cfg,
                                   OptimisationHistory* history = nullptr);

}  // namespace aces

#endif
