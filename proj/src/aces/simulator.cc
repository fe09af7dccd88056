#include "aces/simulator.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "aces/rng.h"

namespace aces {

namespace {

// Vose alias table for O(1) draws from a small discrete distribution.
struct AliasTable {
    std::vector<double> prob;
    std::vector<uint32_t> alt;
    std::vector<uint32_t> value;

    void build(const std::vector<uint32_t>& values, const std::vector<double>& weights) {
        size_t k = values.size();
        value = values;
        prob.assign(k, 1.0);
        alt.assign(k, 0);
        double total = 0;
        for (double w : weights) total += w;
        std::vector<double> scaled(k);
        std::vector<uint32_t> small, large;
        for (size_t i = 0; i < k; i++) {
            scaled[i] = weights[i] * (double)k / total;
            (scaled[i] < 1.0 ? small : large).push_back((uint32_t)i);
        }
        while (!small.empty() && !large.empty()) {
            uint32_t s = small.back(), l = large.back();
            small.pop_back();
            large.pop_back();
            prob[s] = scaled[s];
            alt[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        // Leftovers are 1 up to rounding.
    }

    uint32_t sample(CounterRng& rng) const {
        uint32_t i = (uint32_t)rng.uniform_int(value.size());
        return rng.uniform() < prob[i] ? value[i] : value[alt[i]];
    }
};

// Per-gate Pauli error sampler: geometric skipping over the 64 shots of a
// word (cheap when errors are rare) with an alias draw for the error kind.
struct ErrorSampler {
    double p_any = 0;
    double pow64 = 1;       // (1 - p_any)^64: no error in a full word
    double inv_log1m = 0;   // 1 / log(1 - p_any)
    std::vector<uint32_t> qubits;
    AliasTable alias;       // over non-identity local codes

    void set_rate(double p) {
        p_any = p;
        pow64 = p < 1.0 ? std::pow(1.0 - p, 64.0) : 0.0;
        inv_log1m = p < 1.0 && p > 0.0 ? 1.0 / std::log1p(-p) : 0.0;
    }
};

// Compact frame-conjugation op; I/X/Y/Z and markers conjugate trivially.
struct FrameOp {
    enum : uint8_t { H, S, CX, CZ } kind;
    uint32_t a = 0, b = 0;
};

struct TupleSimContext {
    std::vector<std::vector<FrameOp>> layer_ops;
    std::vector<std::vector<ErrorSampler>> layer_samplers;
};

TupleSimContext build_tuple_context(const Circuit& c, const LayerTuple& t,
                                    const NoiseModel& m) {
    TupleSimContext ctx;
    for (int id : t.entries) {
        const Layer& layer = c.unique_layer(id);
        std::vector<FrameOp> ops;
        std::vector<ErrorSampler> samplers;
        for (size_t g = 0; g < layer.gates.size(); g++) {
            const CliffordGate& gate = layer.gates[g];
            switch (gate.kind) {
                case GateKind::H: ops.push_back({FrameOp::H, gate.q0, 0}); break;
                case GateKind::S: ops.push_back({FrameOp::S, gate.q0, 0}); break;
                case GateKind::CX: ops.push_back({FrameOp::CX, gate.q0, gate.q1}); break;
                case GateKind::CZ: ops.push_back({FrameOp::CZ, gate.q0, gate.q1}); break;
                default: break;
            }
            const GateChannel& ch = m.channel(ChannelId{id, (int32_t)g});
            double p = ch.infidelity();
            if (p <= 0) continue;
            ErrorSampler s;
            s.set_rate(p);
            s.qubits = ch.qubits;
            std::vector<uint32_t> codes;
            std::vector<double> weights;
            for (uint32_t a = 1; a < ch.probs.size(); a++) {
                if (ch.probs[a] > 0) {
                    codes.push_back(a);
                    weights.push_back(ch.probs[a]);
                }
            }
            s.alias.build(codes, weights);
            samplers.push_back(std::move(s));
        }
        ctx.layer_ops.push_back(std::move(ops));
        ctx.layer_samplers.push_back(std::move(samplers));
    }
    return ctx;
}

// First index >= `from` of a Bernoulli(p) success, geometric skipping.
inline int geometric_next(CounterRng& rng, double inv_log1m, int from) {
    double u = 1.0 - rng.uniform();  // (0, 1]
    return from + (int)(std::log(u) * inv_log1m);
}

// 64 Bernoulli(p) bits.
inline uint64_t bernoulli_word(CounterRng& rng, const ErrorSampler& s) {
    double u = 1.0 - rng.uniform();
    if (u <= s.pow64) return 0;
    uint64_t w = 0;
    int pos = (int)(std::log(u) * s.inv_log1m);
    while (pos < 64) {
        w |= 1ull << pos;
        pos = geometric_next(rng, s.inv_log1m, pos + 1);
    }
    return w;
}

struct MeasuredQubit {
    uint32_t q = 0;
    int basis = 0;         // 0=X, 1=Y, 2=Z
    ErrorSampler flips;    // classical outcome flip channel
};

std::vector<int64_t> run_experiment(const Circuit& c, const TupleBlock& block,
                                    const TupleSimContext& ctx, const NoiseModel& m,
                                    size_t experiment_index, int64_t shots, uint64_t key) {
    const Experiment& exp = block.experiments[experiment_index];
    std::vector<int64_t> plus(exp.rows.size(), 0);
    if (shots <= 0) return plus;

    std::vector<MeasuredQubit> measured;
    for (uint32_t q = 0; q < c.n; q++) {
        int code = exp.meas.code(q);
        if (code == 0) continue;
        MeasuredQubit mq;
        mq.q = q;
        mq.basis = code == 1 ? 0 : (code == 3 ? 1 : 2);  // X, Y, Z
        mq.flips.set_rate(m.channel(measurement_channel_id(q, mq.basis)).probs[1]);
        measured.push_back(mq);
    }
    std::vector<std::vector<uint32_t>> supports(exp.rows.size());
    for (size_t i = 0; i < exp.rows.size(); i++)
        supports[i] = block.mapped[exp.rows[i]].support();

    std::vector<uint64_t> fx(c.n), fz(c.n), out(c.n, 0);
    int64_t words = (shots + 63) / 64;
    for (int64_t w = 0; w < words; w++) {
        CounterRng rng(CounterRng::derive(key, (uint64_t)w));
        std::fill(fx.begin(), fx.end(), 0);
        std::fill(fz.begin(), fz.end(), 0);

        for (size_t li = 0; li < ctx.layer_ops.size(); li++) {
            // Noise acts before the ideal layer.
            for (const ErrorSampler& s : ctx.layer_samplers[li]) {
                double u = 1.0 - rng.uniform();
                if (u <= s.pow64) continue;
                int pos = (int)(std::log(u) * s.inv_log1m);
                while (pos < 64) {
                    uint32_t code = s.alias.sample(rng);
                    uint64_t bit = 1ull << pos;
                    for (uint32_t q : s.qubits) {
                        if (code & 1) fx[q] ^= bit;
                        if (code & 2) fz[q] ^= bit;
                        code >>= 2;
                    }
                    pos = geometric_next(rng, s.inv_log1m, pos + 1);
                }
            }
            for (const FrameOp& op : ctx.layer_ops[li]) {
                switch (op.kind) {
                    case FrameOp::H: std::swap(fx[op.a], fz[op.a]); break;
                    case FrameOp::S: fz[op.a] ^= fx[op.a]; break;
                    case FrameOp::CX:
                        fx[op.b] ^= fx[op.a];
                        fz[op.a] ^= fz[op.b];
                        break;
                    case FrameOp::CZ:
                        fz[op.a] ^= fx[op.b];
                        fz[op.b] ^= fx[op.a];
                        break;
                }
            }
        }

        for (const MeasuredQubit& mq : measured) {
            uint64_t anti = mq.basis == 0   ? fz[mq.q]
                            : mq.basis == 2 ? fx[mq.q]
                                            : fx[mq.q] ^ fz[mq.q];
            out[mq.q] = anti ^ bernoulli_word(rng, mq.flips);
        }

        int64_t rem = shots - w * 64;
        uint64_t mask = rem >= 64 ? ~0ull : (1ull << rem) - 1;
        for (size_t i = 0; i < exp.rows.size(); i++) {
            uint64_t pword = 0;
            for (uint32_t q : supports[i]) pword ^= out[q];
            // The frame flip is the deviation from the ideal outcome, whose
            // sign (+-)_{T,a} the estimator divides out again, so the
            // sign-corrected outcome is +1 exactly when no flip occurred.
            plus[i] += std::popcount(~pword & mask);
        }
    }
    return plus;
}

uint64_t experiment_key(uint64_t seed, size_t tuple_index, size_t experiment_index) {
    uint64_t k = CounterRng::derive(seed, 0x73696d756c617465ull);
    k = CounterRng::derive(k, (uint64_t)tuple_index);
    return CounterRng::derive(k, (uint64_t)experiment_index);
}

}  // namespace

int64_t binomial_sample(CounterRng& rng, int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("binomial_sample: negative count");
    p = std::clamp(p, 0.0, 1.0);
    if (n == 0 || p == 0) return 0;
    if (p == 1) return n;
    if (p > 0.5) return n - binomial_sample(rng, n, 1.0 - p);
    double mean = (double)n * p;
    double var = mean * (1.0 - p);
    if (var > 100.0) {
        // Gaussian tail; error is negligible against the sampling noise at
        // this variance.
        double k = std::round(mean + rng.normal() * std::sqrt(var));
        return (int64_t)std::clamp(k, 0.0, (double)n);
    }
    // Exact CDF inversion; the walk length is O(mean) <= ~100.
    double q = 1.0 - p, ratio = p / q;
    double pmf = std::exp((double)n * std::log(q));
    double cdf = pmf;
    double u = rng.uniform();
    int64_t k = 0;
    while (u > cdf && k < n) {
        pmf *= ratio * (double)(n - k) / (double)(k + 1);
        k++;
        cdf += pmf;
    }
    return k;
}

std::vector<int64_t> simulate_experiment(const ExperimentalDesign& d, const NoiseModel& m,
                                         size_t tuple_index, size_t experiment_index,
                                         int64_t shots, uint64_t seed) {
    const TupleBlock& block = d.blocks.at(tuple_index);
    TupleSimContext ctx = build_tuple_context(d.circuit, block.tuple, m);
    return run_experiment(d.circuit, block, ctx, m, experiment_index, shots,
                          experiment_key(seed, tuple_index, experiment_index));
}

OutcomeDataset simulate_design(const ExperimentalDesign& d, const NoiseModel& m, double S,
                               uint64_t seed, const std::string& mode) {
    if (mode != "frame" && mode != "independent")
        throw std::invalid_argument("simulate_design: unknown mode '" + mode + "'");
    ShotAllocation alloc = shot_allocation(d, S);
    OutcomeDataset data;
    data.S = S;
    data.seed = seed;
    data.mode = mode;
    data.noise_generator = m.generator;
    data.noise_seed = m.seed;
    data.tuples.resize(d.blocks.size());

    std::vector<double> lam_cols;
    if (mode == "independent") lam_cols = column_eigenvalues(d, m);

    for (size_t t = 0; t < d.blocks.size(); t++) {
        const TupleBlock& block = d.blocks[t];
        int64_t shots = alloc.shots[t];
        TupleOutcome& out = data.tuples[t];
        out.experiments.resize(block.experiments.size());
        if (mode == "frame") {
            TupleSimContext ctx = build_tuple_context(d.circuit, block.tuple, m);
            for (size_t e = 0; e < block.experiments.size(); e++) {
                out.experiments[e].shots = shots;
                out.experiments[e].plus = run_experiment(d.circuit, block, ctx, m, e, shots,
                                                         experiment_key(seed, t, e));
            }
        } else {
            std::vector<double> lam = circuit_eigenvalues(block.matrix, lam_cols);
            for (size_t e = 0; e < block.experiments.size(); e++) {
                const Experiment& exp = block.experiments[e];
                CounterRng rng(experiment_key(seed, t, e));
                out.experiments[e].shots = shots;
                out.experiments[e].plus.resize(exp.rows.size());
                for (size_t i = 0; i < exp.rows.size(); i++) {
                    double p_plus = 0.5 * (1.0 + lam[exp.rows[i]]);
                    out.experiments[e].plus[i] = binomial_sample(rng, shots, p_plus);
                }
            }
        }
    }
    return data;
}

}  // namespace aces
