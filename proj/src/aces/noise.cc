#include "aces/noise.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "aces/rng.h"

namespace aces {

int local_symplectic_form(uint32_t a, uint32_t b) {
    int w = 0;
    while (a | b) {
        uint32_t ca = a & 3, cb = b & 3;
        w ^= ((ca & 1) & (cb >> 1)) ^ ((ca >> 1) & (cb & 1));
        a >>= 2;
        b >>= 2;
    }
    return w;
}

static void check_power_of_4(size_t len) {
    size_t m = len;
    while (m > 1) {
        if (m % 4 != 0) throw std::invalid_argument("Pauli vector length must be a power of 4");
        m /= 4;
    }
    if (len == 0) throw std::invalid_argument("empty Pauli vector");
}

std::vector<double> wht_forward(const std::vector<double>& probs) {
    check_power_of_4(probs.size());
    for (double p : probs)
        if (p < -1e-15) throw std::invalid_argument("negative probability");
    std::vector<double> lam(probs.size(), 0.0);
    for (uint32_t ap = 0; ap < probs.size(); ap++)
        for (uint32_t a = 0; a < probs.size(); a++)
            lam[ap] += local_symplectic_form(a, ap) ? -probs[a] : probs[a];
    return lam;
}

std::vector<double> wht_inverse(const std::vector<double>& eigenvalues) {
    check_power_of_4(eigenvalues.size());
    std::vector<double> p(eigenvalues.size(), 0.0);
    double inv = 1.0 / (double)eigenvalues.size();
    for (uint32_t a = 0; a < eigenvalues.size(); a++) {
        for (uint32_t ap = 0; ap < eigenvalues.size(); ap++)
            p[a] += local_symplectic_form(a, ap) ? -eigenvalues[ap] : eigenvalues[ap];
        p[a] *= inv;
    }
    return p;
}

double GateChannel::infidelity() const {
    if (is_measurement()) return probs[1];
    double s = 0;
    for (size_t a = 1; a < probs.size(); a++) s += probs[a];
    return s;
}

void GateChannel::refresh_eigenvalues() {
    if (is_measurement())
        eigenvalues = {1.0, 1.0 - 2.0 * probs[1]};
    else
        eigenvalues = wht_forward(probs);
}

double GateChannel::eigenvalue_for(const PauliString& p) const {
    uint32_t idx = 0;
    for (size_t k = 0; k < qubits.size(); k++) idx |= (uint32_t)p.code(qubits[k]) << (2 * k);
    return eigenvalues[idx];
}

const GateChannel& NoiseModel::channel(ChannelId id) const {
    auto it = index_.find(id.key());
    if (it == index_.end())
        throw std::out_of_range("no channel for layer " + std::to_string(id.layer) +
                                " gate " + std::to_string(id.gate));
    return channels[it->second];
}

bool NoiseModel::has_channel(ChannelId id) const { return index_.count(id.key()) > 0; }

void NoiseModel::rebuild_index() {
    index_.clear();
    for (size_t i = 0; i < channels.size(); i++) index_[channels[i].id.key()] = i;
}

// Enumerate all channels of a circuit in the canonical order: gate channels
// by ascending (unique layer id, gate index), then measurement channels by
// (qubit, basis).  `fill` assigns the probability vector of each channel.
template <typename Fill>
static NoiseModel make_model(const Circuit& c, Fill&& fill) {
    NoiseModel m;
    m.n = c.n;
    for (int id : c.unique_ids()) {
        const Layer& layer = c.unique_layer(id);
        for (size_t j = 0; j < layer.gates.size(); j++) {
            const CliffordGate& g = layer.gates[j];
            GateChannel ch;
            ch.id = {id, (int32_t)j};
            ch.qubits = {g.q0};
            if (g.is_two_qubit()) ch.qubits.push_back(g.q1);
            ch.probs.assign(g.is_two_qubit() ? 16 : 4, 0.0);
            fill(ch);
            ch.refresh_eigenvalues();
            m.channels.push_back(std::move(ch));
        }
    }
    for (uint32_t q = 0; q < c.n; q++) {
        for (int basis = 0; basis < 3; basis++) {
            GateChannel ch;
            ch.id = measurement_channel_id(q, basis);
            ch.probs = {1.0, 0.0};
            fill(ch);
            ch.refresh_eigenvalues();
            m.channels.push_back(std::move(ch));
        }
    }
    m.rebuild_index();
    return m;
}

NoiseModel depolarising_model(const Circuit& c, double r1, double r2, double rm) {
    for (double r : {r1, r2, rm})
        if (r < 0 || r >= 1) throw std::invalid_argument("infidelity out of [0,1)");
    NoiseModel m = make_model(c, [&](GateChannel& ch) {
        if (ch.is_measurement()) {
            ch.probs = {1.0 - rm, rm};
            return;
        }
        size_t bp = ch.probs.size() - 1;  // 4^b - 1 non-identity Paulis
        double r = ch.arity() == 2 ? r2 : r1;
        ch.probs[0] = 1.0 - r;
        for (size_t a = 1; a <= bp; a++) ch.probs[a] = r / (double)bp;
    });
    m.generator = "depolarising";
    m.params = {r1, r2, rm};
    return m;
}

NoiseModel lognormal_model(const Circuit& c, double r1, double r2, double rm,
                           double sigma_tot_sq, uint64_t seed) {
    for (double r : {r1, r2, rm})
        if (r <= 0 || r >= 1) throw std::invalid_argument("infidelity out of (0,1)");
    if (sigma_tot_sq <= 0) throw std::invalid_argument("sigma_tot_sq must be positive");
    // Per-probability log-normal parameters from the moment-matching rule:
    // the sum of the 4^b-1 probabilities targets mean r_b, variance matched
    // to a log-normal with sigma_{Z;b}^2 = sigma_tot^2.
    auto gate_params = [&](int b, double rb, double& mu_z, double& sigma_z) {
        double bp = std::pow(4.0, b) - 1.0;
        double sz2 = std::log(1.0 + bp * (std::exp(sigma_tot_sq) - 1.0));
        mu_z = std::log(rb / bp) - sz2 / 2.0;
        sigma_z = std::sqrt(sz2);
    };
    double mu1, s1, mu2, s2;
    gate_params(1, r1, mu1, s1);
    gate_params(2, r2, mu2, s2);
    double mu_m = std::log(rm) - sigma_tot_sq / 2.0;
    double s_m = std::sqrt(sigma_tot_sq);

    NoiseModel m = make_model(c, [&](GateChannel& ch) {
        CounterRng rng(CounterRng::derive(seed, ch.id.key()));
        if (ch.is_measurement()) {
            double p = std::exp(mu_m + s_m * rng.normal());
            if (p >= 1) p = 0.5;  // vanishing-probability guard for absurd params
            ch.probs = {1.0 - p, p};
            return;
        }
        double mu = ch.arity() == 2 ? mu2 : mu1;
        double sg = ch.arity() == 2 ? s2 : s1;
        double total = 0;
        for (size_t a = 1; a < ch.probs.size(); a++) {
            ch.probs[a] = std::exp(mu + sg * rng.normal());
            total += ch.probs[a];
        }
        if (total >= 1) {  // renormalise pathological draws, keeps a valid channel
            for (size_t a = 1; a < ch.probs.size(); a++) ch.probs[a] *= 0.5 / total;
            total = 0.5;
        }
        ch.probs[0] = 1.0 - total;
    });
    m.generator = "lognormal";
    m.params = {r1, r2, rm, sigma_tot_sq};
    m.seed = seed;
    return m;
}

std::vector<double> project_simplex(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite entry");
    // Sort-based projection: find the largest k with
    // v_(k) - (sum_{i<=k} v_(i) - 1)/k > 0, then shift and clamp.
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0, theta = 0;
    int k = 0;
    for (size_t i = 0; i < u.size(); i++) {
        cumulative += u[i];
        double t = (cumulative - 1.0) / (double)(i + 1);
        if (u[i] - t > 0) {
            k = (int)(i + 1);
            theta = t;
        }
    }
    (void)k;
    std::vector<double> p(v.size());
    for (size_t i = 0; i < v.size(); i++) p[i] = std::max(0.0, v[i] - theta);
    return p;
}

std::vector<double> marginalise(const std::vector<double>& dist, uint32_t n,
                                const std::vector<uint32_t>& subset) {
    if (dist.size() != (size_t)1 << (2 * n))
        throw std::invalid_argument("distribution length is not 4^n");
    for (uint32_t q : subset)
        if (q >= n) throw std::invalid_argument("subset qubit out of range");
    std::vector<double> out((size_t)1 << (2 * subset.size()), 0.0);
    for (size_t a = 0; a < dist.size(); a++) {
        size_t idx = 0;
        for (size_t k = 0; k < subset.size(); k++) idx |= ((a >> (2 * subset[k])) & 3) << (2 * k);
        out[idx] += dist[a];
    }
    return out;
}

double tvd(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("tvd: length mismatch");
    double s = 0;
    for (size_t i = 0; i < p.size(); i++) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

}  // namespace aces
