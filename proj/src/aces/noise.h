#ifndef ACES_NOISE_H
#define ACES_NOISE_H

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "aces/circuit.h"
#include "aces/pauli.h"

namespace aces {

// Identifies one noisy operation: a gate (unique layer id >= 1, gate index
// within that layer) or a measurement channel (layer 0, gate = 3*qubit+basis
// with basis 0=X, 1=Y, 2=Z).
struct ChannelId {
    int32_t layer = 0;
    int32_t gate = 0;

    bool operator==(const ChannelId& o) const { return layer == o.layer && gate == o.gate; }
    uint64_t key() const { return ((uint64_t)(uint32_t)layer << 32) | (uint32_t)gate; }
};

constexpr int32_t kMeasurementLayer = 0;

inline ChannelId measurement_channel_id(uint32_t qubit, int basis) {
    return ChannelId{kMeasurementLayer, (int32_t)(3 * qubit + basis)};
}

// Pauli channel attached to one gate, or a classical flip channel attached to
// one measurement basis.  Pauli vectors are indexed by the local symplectic
// code sum_k 4^k (x_k + 2 z_k) over the gate's qubit list, so index 0 is the
// identity; measurements have length-2 vectors {1-p, p}.
struct GateChannel {
    ChannelId id;
    std::vector<uint32_t> qubits;    // support; empty for measurement channels
    std::vector<double> probs;       // length 4^b, or 2 for measurements
    std::vector<double> eigenvalues; // cached transform of probs

    int arity() const { return (int)qubits.size(); }
    bool is_measurement() const { return id.layer == kMeasurementLayer; }
    // Sum of non-identity probabilities (entanglement infidelity for gates).
    double infidelity() const;
    void refresh_eigenvalues();
    // Eigenvalue picked up by a Pauli restricted to this channel's support
    // (local code computed from the global Pauli).
    double eigenvalue_for(const PauliString& p) const;
};

struct NoiseModel {
    std::vector<GateChannel> channels;  // gate channels then measurement channels
    std::string generator;              // "depolarising" or "lognormal"
    std::vector<double> params;
    uint64_t seed = 0;
    uint32_t n = 0;

    const GateChannel& channel(ChannelId id) const;
    bool has_channel(ChannelId id) const;
    void rebuild_index();

  private:
    std::unordered_map<uint64_t, size_t> index_;
};

// Walsh-Hadamard transforms between Pauli error probabilities and channel
// eigenvalues, in the symplectic index order above.
//   forward:  lambda_{a'} = sum_a (-1)^{w(a,a')} p_a
//   inverse:  p_a = 4^{-b} sum_{a'} (-1)^{w(a,a')} lambda_{a'}
std::vector<double> wht_forward(const std::vector<double>& probs);
std::vector<double> wht_inverse(const std::vector<double>& eigenvalues);

// Symplectic form between two local Pauli indices (base-4 digit codes).
int local_symplectic_form(uint32_t a, uint32_t b);

NoiseModel depolarising_model(const Circuit& c, double r1, double r2, double rm);

// Log-normal random Pauli noise: each non-identity error probability is an
// independent log-normal sample whose parameters moment-match the target mean
// infidelities r1/r2/rm with total variance sigma_tot_sq.
NoiseModel lognormal_model(const Circuit& c, double r1, double r2, double rm,
                           double sigma_tot_sq, uint64_t seed);

// Euclidean projection onto the probability simplex {p >= 0, sum p = 1}.
std::vector<double> project_simplex(const std::vector<double>& v);

// Marginal of an n-qubit Pauli distribution (length 4^n, symplectic index
// order) onto a qubit subset, summing over the remaining qubits.
std::vector<double> marginalise(const std::vector<double>& dist, uint32_t n,
                                const std::vector<uint32_t>& subset);

double tvd(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace aces

#endif
