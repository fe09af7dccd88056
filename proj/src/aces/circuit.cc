#include "aces/circuit.h"

#include <algorithm>
#include <bit>
#include <sstream>

namespace aces {

namespace {
constexpr double kLayerTime = 29e-9;      // single- and two-qubit layer
constexpr double kMeasResetTime = 660e-9; // measurement + reset
}

const char* layer_class_name(LayerClass c) {
    switch (c) {
        case LayerClass::single_qubit: return "single_qubit";
        case LayerClass::two_qubit: return "two_qubit";
        case LayerClass::dynamical_decoupling: return "dynamical_decoupling";
        case LayerClass::spam: return "spam";
    }
    return "?";
}

LayerClass layer_class_from_name(const std::string& s) {
    if (s == "single_qubit") return LayerClass::single_qubit;
    if (s == "two_qubit") return LayerClass::two_qubit;
    if (s == "dynamical_decoupling") return LayerClass::dynamical_decoupling;
    if (s == "spam") return LayerClass::spam;
    throw std::invalid_argument("unknown layer class: " + s);
}

void Layer::finalise(uint32_t n) {
    for (auto& g : gates)
        if (g.kind == GateKind::CZ && g.q0 > g.q1) std::swap(g.q0, g.q1);
    std::sort(gates.begin(), gates.end(), [](const CliffordGate& a, const CliffordGate& b) {
        return a.q0 < b.q0;
    });
    gate_at.assign(n, -1);
    for (size_t i = 0; i < gates.size(); i++) {
        const CliffordGate& g = gates[i];
        for (int k = 0; k < g.arity(); k++) {
            uint32_t q = k == 0 ? g.q0 : g.q1;
            if (q >= n) throw std::invalid_argument("layer gate qubit out of range");
            if (gate_at[q] != -1) throw std::invalid_argument("overlapping gates in layer");
            gate_at[q] = (int32_t)i;
        }
    }
    for (uint32_t q = 0; q < n; q++)
        if (gate_at[q] == -1) throw std::invalid_argument("layer does not cover all qubits");
}

void conjugate_layer_inplace(const Layer& layer, PauliString& p) {
    // Gates are disjoint, so only gates touching the incoming support act;
    // collect them (deduplicating two-qubit gates) before mutating p.
    int32_t touched[64];
    size_t ntouched = 0;
    std::vector<int32_t> big;
    for (size_t w = 0; w < p.words(); w++) {
        uint64_t m = p.x[w] | p.z[w];
        while (m) {
            uint32_t q = (uint32_t)(w * 64 + std::countr_zero(m));
            m &= m - 1;
            int32_t gi = layer.gate_at[q];
            bool seen = false;
            for (size_t i = 0; i < ntouched && !seen; i++) seen = touched[i] == gi;
            for (size_t i = 0; i < big.size() && !seen; i++) seen = big[i] == gi;
            if (!seen) {
                if (ntouched < 64) touched[ntouched++] = gi;
                else big.push_back(gi);
            }
        }
    }
    for (size_t i = 0; i < ntouched; i++) conjugate_inplace(layer.gates[touched[i]], p);
    for (int32_t gi : big) conjugate_inplace(layer.gates[gi], p);
}

std::string LayerTuple::str() const {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < entries.size(); i++) {
        if (i) os << ", ";
        os << entries[i];
    }
    os << ')';
    return os.str();
}

LayerTuple LayerTuple::from_str(const std::string& s) {
    LayerTuple t;
    std::string body = s;
    if (!body.empty() && body.front() == '(') body = body.substr(1, body.size() - 2);
    std::istringstream is(body);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty()) t.entries.push_back(std::stoi(tok));
    return t;
}

std::vector<int> Circuit::unique_ids() const {
    std::vector<int> ids;
    for (int id : unique_index)
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

bool Circuit::has_unique_id(int id) const {
    return id >= 1 && id <= (int)layers.size() && unique_index[id - 1] == id;
}

const Layer& Circuit::unique_layer(int id) const {
    if (!has_unique_id(id))
        throw std::invalid_argument("unknown unique layer id " + std::to_string(id));
    return layers[id - 1];
}

std::vector<const Layer*> Circuit::rearrange(const LayerTuple& t) const {
    std::vector<const Layer*> out;
    out.reserve(t.entries.size());
    for (int id : t.entries) out.push_back(&unique_layer(id));
    return out;
}

double Circuit::tuple_duration(const LayerTuple& t) const {
    double s = meas_reset_time;
    for (int id : t.entries) s += unique_layer(id).layer_time;
    return s;
}

PauliString Circuit::propagate(const LayerTuple& t, const PauliString& a) const {
    PauliString p = a;
    for (int id : t.entries) conjugate_layer_inplace(unique_layer(id), p);
    return p;
}

void Circuit::compute_unique_index() {
    unique_index.assign(layers.size(), 0);
    for (size_t i = 0; i < layers.size(); i++) {
        unique_index[i] = (int)i + 1;
        for (size_t j = 0; j < i; j++) {
            if (layers[j].same_gates(layers[i])) {
                unique_index[i] = unique_index[j];
                break;
            }
        }
    }
}

namespace detail {

Circuit build_rotated_with_schedule(int d, const RotatedSchedule& s) {
    if (d < 3 || d % 2 == 0)
        throw std::invalid_argument("rotated surface code distance must be odd and >= 3");
    const uint32_t n_data = (uint32_t)(d * d);
    Circuit c;
    c.family = "rotated";
    c.distance = d;
    c.meas_reset_time = kMeasResetTime;
    c.dynamically_decoupled = true;

    // Plaquettes indexed by their NW data corner (pr, pc) in [-1, d-1]^2;
    // interior plaquettes all exist, boundary half-plaquettes keep one colour
    // on north/south and the other on east/west.
    struct Plaquette { int pr, pc, colour; uint32_t qubit; };
    std::vector<Plaquette> plaq;
    auto colour_of = [](int pr, int pc) { return ((pr + pc) % 2 + 2) % 2; };
    for (int pr = -1; pr < d; pr++) {
        for (int pc = -1; pc < d; pc++) {
            bool north = pr == -1, south = pr == d - 1, west = pc == -1, east = pc == d - 1;
            int corners = 0;
            for (int dr = 0; dr <= 1; dr++)
                for (int dc = 0; dc <= 1; dc++)
                    if (pr + dr >= 0 && pr + dr < d && pc + dc >= 0 && pc + dc < d) corners++;
            if (corners < 2) continue;
            int colour = colour_of(pr, pc);
            if (north || south) {
                if (colour != s.boundary_colour) continue;
            } else if (west || east) {
                if (colour == s.boundary_colour) continue;
            }
            plaq.push_back({pr, pc, colour, 0});
        }
    }
    c.n = n_data + (uint32_t)plaq.size();
    for (size_t i = 0; i < plaq.size(); i++) plaq[i].qubit = n_data + (uint32_t)i;
    c.is_measure_qubit.assign(c.n, 0);
    for (auto& p : plaq) c.is_measure_qubit[p.qubit] = 1;

    auto data_qubit = [&](int r, int col) { return (uint32_t)(r * d + col); };

    // Single-qubit layers: H on one data parity class + all (layer 1) or no
    // (layer 3) measure qubits, dynamical-decoupling X elsewhere.
    auto single_layer = [&](int h_parity, bool h_on_measure) {
        Layer l;
        l.layer_time = kLayerTime;
        l.layer_class = LayerClass::single_qubit;
        for (uint32_t q = 0; q < c.n; q++) {
            GateKind k;
            if (c.is_measure_qubit[q])
                k = h_on_measure ? GateKind::H : GateKind::X;
            else {
                int r = (int)(q / d), col = (int)(q % d);
                bool h;
                switch (h_parity) {
                    case 0: h = (r + col) % 2 == 0; break;
                    case 1: h = (r + col) % 2 == 1; break;
                    case 2: h = r % 2 == 0; break;
                    case 3: h = col % 2 == 0; break;
                    case 4: h = true; break;
                    case 5: h = false; break;
                    case 6: h = r % 2 == 1; break;
                    default: h = col % 2 == 1; break;
                }
                k = h ? GateKind::H : GateKind::X;
            }
            l.gates.push_back({k, q, 0});
        }
        l.finalise(c.n);
        return l;
    };
    auto cz_layer = [&](int slot) {
        Layer l;
        l.layer_time = kLayerTime;
        l.layer_class = LayerClass::two_qubit;
        std::vector<uint8_t> used(c.n, 0);
        for (auto& p : plaq) {
            // Directions: 0=NW corner (pr,pc), 1=NE, 2=SW, 3=SE.
            static const int dr[4] = {0, 0, 1, 1};
            static const int dc[4] = {0, 1, 0, 1};
            for (int dir = 0; dir < 4; dir++) {
                if (s.slot[p.colour][dir] != slot) continue;
                int r = p.pr + dr[dir], col = p.pc + dc[dir];
                if (r < 0 || r >= d || col < 0 || col >= d) continue;
                uint32_t q = data_qubit(r, col);
                l.gates.push_back({GateKind::CZ, p.qubit, q});
                used[p.qubit] = used[q] = 1;
            }
        }
        for (uint32_t q = 0; q < c.n; q++)
            if (!used[q]) l.gates.push_back({GateKind::I, q, 0});
        l.finalise(c.n);
        return l;
    };
    Layer dd;
    dd.layer_time = kLayerTime;
    dd.layer_class = LayerClass::dynamical_decoupling;
    for (uint32_t q = 0; q < c.n; q++) dd.gates.push_back({GateKind::X, q, 0});
    dd.finalise(c.n);

    Layer l1 = single_layer(s.h1_parity, true);
    Layer l3 = single_layer(s.h3_parity, false);
    c.layers = {l1, cz_layer(0), l3, cz_layer(1), dd, cz_layer(2), l3, cz_layer(3), l1};
    c.compute_unique_index();
    return c;
}

Circuit build_unrotated_with_schedule(int d, const UnrotatedSchedule& s) {
    if (d < 2) throw std::invalid_argument("unrotated surface code distance must be >= 2");
    const int g = 2 * d - 1;
    Circuit c;
    c.family = "unrotated";
    c.distance = d;
    c.n = (uint32_t)(g * g);
    c.meas_reset_time = kMeasResetTime;
    c.dynamically_decoupled = false;
    c.is_measure_qubit.assign(c.n, 0);
    auto qubit = [&](int r, int col) { return (uint32_t)(r * g + col); };
    for (int r = 0; r < g; r++)
        for (int col = 0; col < g; col++)
            if ((r + col) % 2 == 1) c.is_measure_qubit[qubit(r, col)] = 1;
    auto is_x_type = [&](int r) { return r % 2 == s.x_ancilla_row_parity; };

    Layer h;
    h.layer_time = kLayerTime;
    h.layer_class = LayerClass::single_qubit;
    for (int r = 0; r < g; r++)
        for (int col = 0; col < g; col++) {
            uint32_t q = qubit(r, col);
            GateKind k = (c.is_measure_qubit[q] && is_x_type(r)) ? GateKind::H : GateKind::I;
            h.gates.push_back({k, q, 0});
        }
    h.finalise(c.n);

    auto cx_layer = [&](int slot) {
        Layer l;
        l.layer_time = kLayerTime;
        l.layer_class = LayerClass::two_qubit;
        std::vector<uint8_t> used(c.n, 0);
        static const int dr[4] = {-1, 0, 1, 0};  // N, E, S, W
        static const int dc[4] = {0, 1, 0, -1};
        for (int r = 0; r < g; r++) {
            for (int col = 0; col < g; col++) {
                uint32_t m = qubit(r, col);
                if (!c.is_measure_qubit[m]) continue;
                int type = is_x_type(r) ? 0 : 1;
                for (int dir = 0; dir < 4; dir++) {
                    if (s.slot[type][dir] != slot) continue;
                    int rr = r + dr[dir], cc = col + dc[dir];
                    if (rr < 0 || rr >= g || cc < 0 || cc >= g) continue;
                    uint32_t q = qubit(rr, cc);
                    // X-type ancillas control, Z-type ancillas are targets.
                    if (type == 0)
                        l.gates.push_back({GateKind::CX, m, q});
                    else
                        l.gates.push_back({GateKind::CX, q, m});
                    used[m] = used[q] = 1;
                }
            }
        }
        for (uint32_t q = 0; q < c.n; q++)
            if (!used[q]) l.gates.push_back({GateKind::I, q, 0});
        l.finalise(c.n);
        return l;
    };

    c.layers = {h, cx_layer(0), cx_layer(1), cx_layer(2), cx_layer(3), h};
    c.compute_unique_index();
    return c;
}

std::string check_measured_stabilisers(const Circuit& c) {
    std::vector<PauliString> data_parts;
    for (uint32_t m = 0; m < c.n; m++) {
        if (!c.is_measure_qubit[m]) continue;
        PauliString p(c.n);
        p.set_z(m, true);
        // Heisenberg pull-back of the final Z measurement to the circuit
        // start: conjugate by the (involutive) layers in reverse order.
        for (auto it = c.layers.rbegin(); it != c.layers.rend(); ++it)
            conjugate_layer_inplace(*it, p);
        PauliString data(c.n);
        for (uint32_t q = 0; q < c.n; q++) {
            if (c.is_measure_qubit[q]) {
                // Only Z/I allowed on ancillas at the start (|0> preparation
                // stabilisers); an X component means a random outcome.
                if (p.x_bit(q))
                    return "non-deterministic measurement for ancilla " + std::to_string(m);
            } else {
                data.set_code(q, p.code(q));
            }
        }
        data_parts.push_back(data);
    }
    for (size_t i = 0; i < data_parts.size(); i++)
        for (size_t j = i + 1; j < data_parts.size(); j++)
            if (symplectic_form(data_parts[i], data_parts[j]) != 0)
                return "stabilisers " + std::to_string(i) + " and " + std::to_string(j) +
                       " anticommute";
    // GF(2) rank of the symplectic vectors.
    std::vector<PauliString> basis = data_parts;
    size_t rank = 0;
    size_t nwords = basis.empty() ? 0 : basis[0].words();
    for (size_t col = 0; col < 2 * (size_t)c.n && rank < basis.size(); col++) {
        size_t w = (col / 2) >> 6;
        uint64_t mask = 1ull << ((col / 2) & 63);
        bool use_x = col % 2 == 0;
        size_t pivot = SIZE_MAX;
        for (size_t i = rank; i < basis.size(); i++) {
            uint64_t bit = use_x ? basis[i].x[w] & mask : basis[i].z[w] & mask;
            if (bit) { pivot = i; break; }
        }
        if (pivot == SIZE_MAX) continue;
        std::swap(basis[rank], basis[pivot]);
        for (size_t i = 0; i < basis.size(); i++) {
            if (i == rank) continue;
            uint64_t bit = use_x ? basis[i].x[w] & mask : basis[i].z[w] & mask;
            if (bit)
                for (size_t ww = 0; ww < nwords; ww++) {
                    basis[i].x[ww] ^= basis[rank].x[ww];
                    basis[i].z[ww] ^= basis[rank].z[ww];
                }
        }
        rank++;
    }
    if (rank != data_parts.size())
        return "stabiliser rank " + std::to_string(rank) + " != ancilla count " +
               std::to_string(data_parts.size());
    return "";
}

}  // namespace detail

// The schedule constants below were fixed by exhaustively searching the
// scheduling freedom (CZ/CX slot orders per plaquette type, Hadamard frame
// classes, boundary colour) for assignments whose measured stabilisers are
// deterministic, weight <= 4, commuting, and full rank at d in {3,5}; see the
// stabiliser-validity tests.  The figure the layout reproduces leaves these
// details ambiguous, so validity is the binding contract.
Circuit build_rotated_surface_circuit(int d) {
    // CZ sweep NW, NE, SW, SE over layers 2,4,6,8 for both plaquette
    // colours; layer 1 applies H to odd-parity data and the ancillas, layer 3
    // applies H to every data qubit; colour 0 sits on the north/south
    // boundary.  Measured stabilisers are the CSS Z/X plaquettes.
    detail::RotatedSchedule s{{{0, 1, 2, 3}, {0, 1, 2, 3}}, 1, 4, 0};
    return detail::build_rotated_with_schedule(d, s);
}

Circuit build_unrotated_surface_circuit(int d) {
    // CX sweep N, E, W, S over layers 2..5 for both ancilla types;
    // X-type ancillas on odd grid rows.
    detail::UnrotatedSchedule s{{{0, 1, 3, 2}, {0, 1, 3, 2}}, 1};
    return detail::build_unrotated_with_schedule(d, s);
}

}  // namespace aces
