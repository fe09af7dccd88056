#ifndef ACES_SIMULATOR_H
#define ACES_SIMULATOR_H

#include <cstdint>
#include <string>
#include <vector>

#include "aces/design.h"
#include "aces/noise.h"
#include "aces/rng.h"

namespace aces {

// Monte-Carlo outcome counts for one packed experiment: plus[i] counts the
// shots whose sign-corrected outcome for experiment row i was +1.
struct ExperimentOutcome {
    int64_t shots = 0;
    std::vector<int64_t> plus;
};

struct TupleOutcome {
    std::vector<ExperimentOutcome> experiments;
};

struct OutcomeDataset {
    double S = 0;
    uint64_t seed = 0;
    std::string mode;             // "frame" or "independent"
    std::string noise_generator;  // provenance
    uint64_t noise_seed = 0;
    std::vector<TupleOutcome> tuples;
};

// Pauli-frame simulation of one experiment: per shot, per layer, sample a
// Pauli error per gate channel and conjugate the frame through the ideal
// layer; flip measurement bits that anticommute with the frame plus SPAM
// noise; record per-row parities over supp(T(a)), corrected by the row sign.
// Bit-sliced 64 shots per word; deterministic in (seed, tuple, experiment).
std::vector<int64_t> simulate_experiment(const ExperimentalDesign& d, const NoiseModel& m,
                                         size_t tuple_index, size_t experiment_index,
                                         int64_t shots, uint64_t seed);

// Simulate every experiment of the design with shots from shot_allocation.
// "independent" mode draws each row as a Bernoulli with the analytic
// eigenvalue instead (fast, correlation-free diagnostic).
OutcomeDataset simulate_design(const ExperimentalDesign& d, const NoiseModel& m, double S,
                               uint64_t seed, const std::string& mode = "frame");

// Binomial sampling helper (exact for small means, Gaussian tail otherwise).
int64_t binomial_sample(CounterRng& rng, int64_t n, double p);

}  // namespace aces

#endif
