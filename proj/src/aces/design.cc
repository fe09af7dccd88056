#include "aces/design.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace aces {

void SparseMatrix::append_row(const std::vector<std::pair<uint32_t, uint16_t>>& entries) {
    for (const auto& [c, v] : entries) {
        col.push_back(c);
        val.push_back(v);
    }
    rows++;
    row_ptr.push_back((uint32_t)col.size());
}

ColumnLayout ColumnLayout::build(const Circuit& c) {
    ColumnLayout l;
    l.n = c.n;
    uint32_t off = 0;
    for (int id : c.unique_ids()) {
        const Layer& layer = c.unique_layer(id);
        for (size_t j = 0; j < layer.gates.size(); j++) {
            uint32_t count = layer.gates[j].is_two_qubit() ? 15 : 3;
            ChannelId cid{id, (int32_t)j};
            l.offsets_[cid.key()] = off;
            for (uint32_t p = 1; p <= count; p++) {
                l.col_channel.push_back(cid);
                l.col_pauli.push_back((uint16_t)p);
            }
            off += count;
        }
    }
    l.gate_columns = off;
    for (uint32_t q = 0; q < c.n; q++) {
        for (int basis = 0; basis < 3; basis++) {
            l.col_channel.push_back(measurement_channel_id(q, basis));
            l.col_pauli.push_back(1);
        }
    }
    l.total = off + 3 * c.n;
    return l;
}

uint32_t ColumnLayout::column(ChannelId id, uint32_t local_pauli) const {
    auto it = offsets_.find(id.key());
    if (it == offsets_.end() || local_pauli == 0)
        throw std::out_of_range("no design column for the requested gate eigenvalue");
    return it->second + local_pauli - 1;
}

uint32_t ExperimentalDesign::rows() const {
    uint32_t r = 0;
    for (const auto& b : blocks) r += b.rows();
    return r;
}

size_t ExperimentalDesign::total_experiments() const {
    size_t e = 0;
    for (const auto& b : blocks) e += b.experiments.size();
    return e;
}

double ExperimentalDesign::time_factor() const {
    double t = 0;
    for (size_t i = 0; i < blocks.size(); i++) t += weights[i] * blocks[i].tau;
    return t;
}

void ExperimentalDesign::set_default_weights() {
    weights.resize(blocks.size());
    double total = 0;
    for (size_t i = 0; i < blocks.size(); i++) total += (weights[i] = 1.0 / blocks[i].tau);
    for (auto& w : weights) w /= total;
}

const TupleBlock* ExperimentalDesign::find_block(const LayerTuple& t) const {
    for (const auto& b : blocks)
        if (b.tuple == t) return &b;
    return nullptr;
}

// Map a measurement-basis code (1=X, 2=Z, 3=Y) to the SPAM basis index
// (0=X, 1=Y, 2=Z).
static int basis_of_code(int code) { return code == 1 ? 0 : (code == 3 ? 1 : 2); }

std::vector<PauliString> pauli_preparation_set(const Circuit& c, const LayerTuple& t) {
    std::vector<PauliString> set;
    auto push = [&](PauliString&& p) { set.push_back(std::move(p)); };
    if (t.entries.empty()) {
        // SPAM-only circuit: the 3n single-qubit Paulis.
        for (uint32_t q = 0; q < c.n; q++)
            for (int code : {1, 3, 2}) {
                PauliString p(c.n);
                p.set_code(q, code);
                push(std::move(p));
            }
    } else {
        std::vector<int> ids;
        for (int id : t.entries)
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        for (int id : ids) {
            for (const auto& g : c.unique_layer(id).gates) {
                if (g.is_two_qubit()) {
                    for (int local = 1; local < 16; local++) {
                        PauliString p(c.n);
                        p.set_code(g.q0, local & 3);
                        p.set_code(g.q1, local >> 2);
                        push(std::move(p));
                    }
                } else {
                    for (int code : {1, 2, 3}) {
                        PauliString p(c.n);
                        p.set_code(g.q0, code);
                        push(std::move(p));
                    }
                }
            }
        }
        std::sort(set.begin(), set.end(),
                  [](const PauliString& a, const PauliString& b) { return a.bits_less(b); });
        set.erase(std::unique(set.begin(), set.end(),
                              [](const PauliString& a, const PauliString& b) {
                                  return a.bits_equal(b);
                              }),
                  set.end());
    }
    // Packing order: descending measurement support size, ties by text form.
    std::vector<PauliString> mapped;
    mapped.reserve(set.size());
    for (const auto& p : set) mapped.push_back(c.propagate(t, p));
    std::vector<size_t> order(set.size());
    for (size_t i = 0; i < order.size(); i++) order[i] = i;
    std::vector<uint32_t> msize(set.size());
    std::vector<std::string> text(set.size());
    for (size_t i = 0; i < set.size(); i++) {
        msize[i] = mapped[i].weight();
        text[i] = set[i].str().substr(1);  // sign-free text for ordering
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (msize[a] != msize[b]) return msize[a] > msize[b];
        return text[a] < text[b];
    });
    std::vector<PauliString> out;
    out.reserve(set.size());
    for (size_t i : order) out.push_back(std::move(set[i]));
    return out;
}

bool t_consistent(const PauliString& a, const PauliString& ta,
                  const PauliString& b, const PauliString& tb) {
    auto conflict = [](const PauliString& p, const PauliString& q) {
        for (size_t w = 0; w < p.words(); w++) {
            uint64_t diff = (p.x[w] ^ q.x[w]) | (p.z[w] ^ q.z[w]);
            if (diff & (p.x[w] | p.z[w]) & (q.x[w] | q.z[w])) return true;
        }
        return false;
    };
    return !conflict(a, b) && !conflict(ta, tb);
}

namespace {

// Dynamic bitset over row indices.
struct RowSet {
    std::vector<uint64_t> w;
    explicit RowSet(size_t bits = 0, bool fill = false)
        : w((bits + 63) / 64, fill ? ~0ull : 0ull) {
        if (fill && bits % 64) w.back() = (1ull << (bits % 64)) - 1;
    }
    bool test(size_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    void clear(size_t i) { w[i >> 6] &= ~(1ull << (i & 63)); }
    bool any() const {
        for (uint64_t v : w)
            if (v) return true;
        return false;
    }
};

uint64_t pair_key(uint32_t a, uint32_t b) { return ((uint64_t)a << 32) | b; }

}  // namespace

std::vector<Experiment> pack_experiments(const std::vector<PauliString>& paulis,
                                         const std::vector<PauliString>& mapped,
                                         uint32_t n) {
    const size_t m = paulis.size();
    std::vector<Experiment> out;
    if (m == 0) return out;
    const size_t words = (n + 63) / 64;

    // Per-qubit inverted indexes over preparation and measurement supports,
    // used to enumerate potential consistency conflicts cheaply.
    std::vector<std::vector<uint32_t>> prep_at(n), meas_at(n);
    for (uint32_t i = 0; i < m; i++) {
        for (uint32_t q : paulis[i].support()) prep_at[q].push_back(i);
        for (uint32_t q : mapped[i].support()) meas_at[q].push_back(i);
    }
    auto conflicts_of = [&](uint32_t i) {
        std::vector<uint32_t> cand;
        for (uint32_t q : paulis[i].support()) cand.insert(cand.end(), prep_at[q].begin(), prep_at[q].end());
        for (uint32_t q : mapped[i].support()) cand.insert(cand.end(), meas_at[q].begin(), meas_at[q].end());
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        std::vector<uint32_t> conf;
        for (uint32_t j : cand)
            if (j != i && !t_consistent(paulis[i], mapped[i], paulis[j], mapped[j]))
                conf.push_back(j);
        return conf;
    };

    RowSet unadded(m, true);  // script-U: rows not yet in any experiment
    size_t unadded_count = m;
    while (unadded_count > 0) {
        Experiment e;
        e.prep = PauliString((uint32_t)n);
        e.meas = PauliString((uint32_t)n);
        RowSet u = unadded;             // T-consistent unadded candidates
        RowSet q_set(m, true);          // T-consistent preparation candidates
        std::vector<uint64_t> mmask(words, 0);  // current measurement support

        auto overlap = [&](uint32_t i) {
            uint32_t c = 0;
            for (size_t w = 0; w < words; w++)
                c += (uint32_t)std::popcount((mapped[i].x[w] | mapped[i].z[w]) & mmask[w]);
            return c;
        };
        auto add_row = [&](uint32_t i, bool from_unadded) {
            e.rows.push_back(i);
            for (size_t w = 0; w < words; w++) {
                e.prep.x[w] |= paulis[i].x[w];
                e.prep.z[w] |= paulis[i].z[w];
                e.meas.x[w] |= mapped[i].x[w];
                e.meas.z[w] |= mapped[i].z[w];
                mmask[w] |= mapped[i].x[w] | mapped[i].z[w];
            }
            q_set.clear(i);
            u.clear(i);
            for (uint32_t j : conflicts_of(i)) {
                q_set.clear(j);
                u.clear(j);
            }
            if (from_unadded && unadded.test(i)) {
                unadded.clear(i);
                unadded_count--;
            }
        };
        auto argmax_live = [&](const RowSet& live) {
            int64_t best = -1;
            uint32_t best_ov = 0;
            for (size_t wi = 0; wi < live.w.size(); wi++) {
                uint64_t v = live.w[wi];
                while (v) {
                    uint32_t i = (uint32_t)(wi * 64 + std::countr_zero(v));
                    v &= v - 1;
                    uint32_t ov = overlap(i);
                    if (best < 0 || ov > best_ov) {
                        best = i;
                        best_ov = ov;
                    }
                }
            }
            return best;
        };

        // Drain unadded candidates first, then fill from the whole set.
        while (u.any()) add_row((uint32_t)argmax_live(u), true);
        while (q_set.any()) add_row((uint32_t)argmax_live(q_set), false);
        out.push_back(std::move(e));
    }
    return out;
}

TupleBlock build_tuple_block(const Circuit& c, const ColumnLayout& layout,
                             const LayerTuple& t) {
    TupleBlock b;
    b.tuple = t;
    b.tau = c.tuple_duration(t);
    b.paulis = pauli_preparation_set(c, t);
    const size_t m = b.paulis.size();
    const size_t words = (c.n + 63) / 64;
    b.mapped.reserve(m);
    b.sign.reserve(m);

    // Design rows by layer-by-layer propagation, recording for each row the
    // interaction mask: every qubit belonging to a gate the Pauli touched,
    // including the final measurement support.  Two rows with disjoint
    // interaction masks have exactly multiplicative eigenvalues, hence zero
    // covariance.
    auto rearranged = c.rearrange(t);
    std::vector<std::vector<uint64_t>> imask(m, std::vector<uint64_t>(words, 0));
    b.matrix.cols = layout.total;
    b.pair_rows.cols = layout.total;

    // Unique id of each rearranged layer pointer, in tuple order.
    std::vector<int> layer_ids(rearranged.size());
    for (size_t u = 0; u < rearranged.size(); u++) {
        for (int id : c.unique_ids())
            if (&c.unique_layer(id) == rearranged[u]) layer_ids[u] = id;
    }
    auto make_row = [&](const PauliString& start, std::vector<uint64_t>* mask_out)
        -> std::pair<std::vector<std::pair<uint32_t, uint16_t>>, PauliString> {
        std::unordered_map<uint32_t, uint32_t> acc;
        PauliString p = start;
        p.phase = 0;
        std::vector<int32_t> gates_hit;
        for (size_t u = 0; u < rearranged.size(); u++) {
            const Layer* layer = rearranged[u];
            int layer_id = layer_ids[u];
            gates_hit.clear();
            for (uint32_t q : p.support()) {
                int32_t gi = layer->gate_at[q];
                if (gates_hit.empty() || gates_hit.back() != gi) gates_hit.push_back(gi);
            }
            std::sort(gates_hit.begin(), gates_hit.end());
            gates_hit.erase(std::unique(gates_hit.begin(), gates_hit.end()), gates_hit.end());
            for (int32_t gi : gates_hit) {
                const CliffordGate& g = layer->gates[gi];
                uint32_t local = (uint32_t)p.code(g.q0);
                if (g.is_two_qubit()) local |= (uint32_t)p.code(g.q1) << 2;
                if (local == 0) continue;
                acc[layout.column({layer_id, gi}, local)]++;
                if (mask_out) {
                    (*mask_out)[g.q0 >> 6] |= 1ull << (g.q0 & 63);
                    if (g.is_two_qubit()) (*mask_out)[g.q1 >> 6] |= 1ull << (g.q1 & 63);
                }
            }
            conjugate_layer_inplace(*layer, p);
        }
        // Measurement SPAM columns for the final single-qubit bases.
        for (uint32_t q : p.support()) {
            acc[layout.spam_column(q, basis_of_code(p.code(q)))]++;
            if (mask_out) (*mask_out)[q >> 6] |= 1ull << (q & 63);
        }
        std::vector<std::pair<uint32_t, uint16_t>> ents(acc.begin(), acc.end());
        std::sort(ents.begin(), ents.end());
        return {std::move(ents), std::move(p)};
    };

    for (size_t i = 0; i < m; i++) {
        auto [ents, final_p] = make_row(b.paulis[i], &imask[i]);
        b.matrix.append_row(ents);
        if (final_p.phase != 0 && final_p.phase != 2)
            throw std::logic_error("non-Hermitian propagated Pauli");
        b.sign.push_back(final_p.phase == 0 ? 1 : -1);
        b.mapped.push_back(std::move(final_p));
    }

    b.experiments = pack_experiments(b.paulis, b.mapped, c.n);
    b.multiplicity.assign(m, 0);
    for (const auto& e : b.experiments)
        for (uint32_t r : e.rows) b.multiplicity[r]++;

    // Covariance pairs: co-measured rows with intersecting interaction masks.
    std::unordered_map<uint64_t, uint32_t> pair_count;
    std::vector<std::vector<uint32_t>> at_qubit(c.n);
    std::unordered_set<uint64_t> seen;
    for (const auto& e : b.experiments) {
        for (auto& v : at_qubit) v.clear();
        for (uint32_t r : e.rows)
            for (uint32_t q = 0; q < c.n; q++)
                if ((imask[r][q >> 6] >> (q & 63)) & 1) at_qubit[q].push_back(r);
        seen.clear();
        for (uint32_t q = 0; q < c.n; q++) {
            const auto& list = at_qubit[q];
            for (size_t i = 0; i + 1 < list.size(); i++)
                for (size_t j = i + 1; j < list.size(); j++) {
                    uint32_t a = std::min(list[i], list[j]), bb = std::max(list[i], list[j]);
                    if (seen.insert(pair_key(a, bb)).second) pair_count[pair_key(a, bb)]++;
                }
        }
    }
    std::vector<uint64_t> keys;
    keys.reserve(pair_count.size());
    for (const auto& [k, cnt] : pair_count) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (uint64_t k : keys) {
        uint32_t ra = (uint32_t)(k >> 32), rb = (uint32_t)k;
        b.covar_pairs.push_back({ra, rb});
        b.covar_count.push_back(pair_count[k]);
        PauliString sum = pauli_mul(b.paulis[ra], b.paulis[rb]);
        auto [ents, final_p] = make_row(sum, nullptr);
        (void)final_p;
        b.pair_rows.append_row(ents);
    }
    return b;
}

std::vector<LayerTuple> basic_tuple_set(const Circuit& c) {
    std::vector<LayerTuple> tuples;
    tuples.push_back(LayerTuple{});
    for (int id : c.unique_ids()) tuples.push_back(LayerTuple{{id}});
    return tuples;
}

ExperimentalDesign build_design(const Circuit& c, const std::vector<LayerTuple>& tuples) {
    ExperimentalDesign d;
    d.circuit = c;
    d.layout = ColumnLayout::build(c);
    for (const auto& t : tuples) d.blocks.push_back(build_tuple_block(c, d.layout, t));
    d.set_default_weights();
    return d;
}

ShotAllocation shot_allocation(const ExperimentalDesign& d, double S) {
    if (S <= 0) throw std::invalid_argument("measurement budget must be positive");
    ShotAllocation a;
    a.S = S;
    // Basic-tuple-set time factor of the same circuit (default weights).
    double inv_sum = 0;
    auto basic = basic_tuple_set(d.circuit);
    for (const auto& t : basic) inv_sum += 1.0 / d.circuit.tuple_duration(t);
    a.tau_basic = (double)basic.size() / inv_sum;
    a.S_prime = S * d.time_factor() / a.tau_basic;
    a.shots.resize(d.blocks.size());
    for (size_t i = 0; i < d.blocks.size(); i++) {
        double st = S * d.weights[i] / (double)d.blocks[i].experiments.size();
        a.shots[i] = (int64_t)std::floor(st);
        a.lost_shots += (int64_t)std::floor(S * d.weights[i]) -
                        a.shots[i] * (int64_t)d.blocks[i].experiments.size();
    }
    return a;
}

std::vector<double> column_eigenvalues(const ExperimentalDesign& d, const NoiseModel& m) {
    std::vector<double> lam(d.layout.total);
    for (uint32_t col = 0; col < d.layout.total; col++) {
        const GateChannel& ch = m.channel(d.layout.col_channel[col]);
        lam[col] = ch.eigenvalues[d.layout.col_pauli[col]];
    }
    return lam;
}

std::vector<double> circuit_eigenvalues(const SparseMatrix& a,
                                        const std::vector<double>& lambda_cols) {
    std::vector<double> out(a.rows, 1.0);
    for (uint32_t r = 0; r < a.rows; r++)
        for (uint32_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; k++) {
            double v = lambda_cols[a.col[k]];
            for (uint16_t p = 0; p < a.val[k]; p++) out[r] *= v;
        }
    return out;
}

TupleCovariance tuple_covariance(const TupleBlock& b, const std::vector<double>& lambda_cols) {
    TupleCovariance c;
    std::vector<double> lam = circuit_eigenvalues(b.matrix, lambda_cols);
    std::vector<double> lam_pairs = circuit_eigenvalues(b.pair_rows, lambda_cols);
    c.diag.resize(b.rows());
    for (uint32_t r = 0; r < b.rows(); r++)
        c.diag[r] = (1.0 - lam[r] * lam[r]) / (double)b.multiplicity[r];
    c.pairs = b.covar_pairs;
    c.offdiag.resize(b.covar_pairs.size());
    for (size_t k = 0; k < b.covar_pairs.size(); k++) {
        auto [ra, rb] = b.covar_pairs[k];
        c.offdiag[k] = (double)b.covar_count[k] * (lam_pairs[k] - lam[ra] * lam[rb]) /
                       ((double)b.multiplicity[ra] * (double)b.multiplicity[rb]);
    }
    return c;
}

}  // namespace aces
