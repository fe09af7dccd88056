#include "aces/pauli.h"

#include <bit>

namespace aces {

int PauliString::sign() const {
    if (phase == 0) return 1;
    if (phase == 2) return -1;
    throw std::logic_error("PauliString::sign on non-Hermitian phase");
}

bool PauliString::bits_less(const PauliString& o) const {
    if (n != o.n) return n < o.n;
    for (size_t w = 0; w < words(); w++) {
        if (x[w] != o.x[w]) return x[w] < o.x[w];
        if (z[w] != o.z[w]) return z[w] < o.z[w];
    }
    return false;
}

std::vector<uint32_t> PauliString::support() const {
    std::vector<uint32_t> s;
    for (size_t w = 0; w < words(); w++) {
        uint64_t m = x[w] | z[w];
        while (m) {
            s.push_back((uint32_t)(w * 64 + std::countr_zero(m)));
            m &= m - 1;
        }
    }
    return s;
}

uint32_t PauliString::weight() const {
    uint32_t c = 0;
    for (size_t w = 0; w < words(); w++) c += (uint32_t)std::popcount(x[w] | z[w]);
    return c;
}

std::string PauliString::str() const {
    std::string s;
    s.reserve(n + 1);
    s.push_back(sign() > 0 ? '+' : '-');
    static const char kLetters[4] = {'I', 'X', 'Z', 'Y'};
    for (uint32_t j = 0; j < n; j++) s.push_back(kLetters[code(j)]);
    return s;
}

PauliString PauliString::from_str(const std::string& s) {
    size_t off = 0;
    uint8_t phase = 0;
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        phase = s[0] == '-' ? 2 : 0;
        off = 1;
    }
    PauliString p((uint32_t)(s.size() - off));
    p.phase = phase;
    for (uint32_t j = 0; j < p.n; j++) {
        switch (s[off + j]) {
            case 'I': case '_': break;
            case 'X': p.set_code(j, 1); break;
            case 'Z': p.set_code(j, 2); break;
            case 'Y': p.set_code(j, 3); break;
            default: throw std::invalid_argument("bad Pauli character in " + s);
        }
    }
    return p;
}

int symplectic_form(const PauliString& a, const PauliString& b) {
    if (a.n != b.n) throw std::invalid_argument("symplectic_form: dimension mismatch");
    uint64_t acc = 0;
    for (size_t w = 0; w < a.words(); w++)
        acc ^= (uint64_t)std::popcount((a.x[w] & b.z[w]) ^ (a.z[w] & b.x[w]));
    return (int)(acc & 1);
}

PauliString pauli_mul(const PauliString& a, const PauliString& b) {
    if (a.n != b.n) throw std::invalid_argument("pauli_mul: dimension mismatch");
    PauliString c(a.n);
    // Phase bookkeeping: with P(x,z) = i^{xz} X^x Z^z per qubit,
    //   P(xa,za) P(xb,zb) = i^{xa za + xb zb - x z + 2 za xb} P(x,z)
    // where x = xa^xb, z = za^zb.  Sum the exponent over qubits mod 4.
    uint64_t k = (uint64_t)a.phase + b.phase;
    for (size_t w = 0; w < a.words(); w++) {
        c.x[w] = a.x[w] ^ b.x[w];
        c.z[w] = a.z[w] ^ b.z[w];
        k += (uint64_t)std::popcount(a.x[w] & a.z[w]);
        k += (uint64_t)std::popcount(b.x[w] & b.z[w]);
        k += 4 - (uint64_t)std::popcount(c.x[w] & c.z[w]) % 4;
        k += 2 * (uint64_t)std::popcount(a.z[w] & b.x[w]);
    }
    c.phase = (uint8_t)(k % 4);
    return c;
}

const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::I: return "I";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::H: return "H";
        case GateKind::S: return "S";
        case GateKind::CX: return "CX";
        case GateKind::CZ: return "CZ";
        case GateKind::MeasX: return "MX";
        case GateKind::MeasY: return "MY";
        case GateKind::MeasZ: return "MZ";
        case GateKind::PrepX: return "PX";
        case GateKind::PrepY: return "PY";
        case GateKind::PrepZ: return "PZ";
    }
    return "?";
}

GateKind gate_kind_from_name(const std::string& s) {
    static const std::pair<const char*, GateKind> kMap[] = {
        {"I", GateKind::I},   {"X", GateKind::X},   {"Y", GateKind::Y},
        {"Z", GateKind::Z},   {"H", GateKind::H},   {"S", GateKind::S},
        {"CX", GateKind::CX}, {"CZ", GateKind::CZ}, {"MX", GateKind::MeasX},
        {"MY", GateKind::MeasY}, {"MZ", GateKind::MeasZ}, {"PX", GateKind::PrepX},
        {"PY", GateKind::PrepY}, {"PZ", GateKind::PrepZ},
    };
    for (auto& [name, kind] : kMap)
        if (s == name) return kind;
    throw std::invalid_argument("unknown gate kind: " + s);
}

namespace {

struct Entry1 { uint8_t x, z, ph; };
struct Entry2 { uint8_t x0, z0, x1, z1, ph; };

// Conjugation tables indexed by the input Pauli code (x + 2z per qubit),
// generated from dense matrix conjugation and frozen here; the tests verify
// them against an independent dense oracle.
constexpr Entry1 kTabX[4] = {{0,0,0},{1,0,0},{0,1,2},{1,1,2}};
constexpr Entry1 kTabY[4] = {{0,0,0},{1,0,2},{0,1,2},{1,1,0}};
constexpr Entry1 kTabZ[4] = {{0,0,0},{1,0,2},{0,1,0},{1,1,2}};
constexpr Entry1 kTabH[4] = {{0,0,0},{0,1,0},{1,0,0},{1,1,2}};
constexpr Entry1 kTabS[4] = {{0,0,0},{1,1,0},{0,1,0},{1,0,2}};
constexpr Entry2 kTabCX[16] = {
    {0,0,0,0,0},{1,0,1,0,0},{0,1,0,0,0},{1,1,1,0,0},
    {0,0,1,0,0},{1,0,0,0,0},{0,1,1,0,0},{1,1,0,0,0},
    {0,1,0,1,0},{1,1,1,1,2},{0,0,0,1,0},{1,0,1,1,0},
    {0,1,1,1,0},{1,1,0,1,0},{0,0,1,1,0},{1,0,0,1,2}};
constexpr Entry2 kTabCZ[16] = {
    {0,0,0,0,0},{1,0,0,1,0},{0,1,0,0,0},{1,1,0,1,0},
    {0,1,1,0,0},{1,1,1,1,0},{0,0,1,0,0},{1,0,1,1,2},
    {0,0,0,1,0},{1,0,0,0,0},{0,1,0,1,0},{1,1,0,0,0},
    {0,1,1,1,0},{1,1,1,0,2},{0,0,1,1,0},{1,0,1,0,0}};

}  // namespace

void conjugate_inplace(const CliffordGate& g, PauliString& a) {
    if (g.q0 >= a.n || (g.is_two_qubit() && g.q1 >= a.n))
        throw std::out_of_range("conjugate: gate qubit outside Pauli");
    const Entry1* tab1 = nullptr;
    switch (g.kind) {
        case GateKind::I:
        case GateKind::MeasX: case GateKind::MeasY: case GateKind::MeasZ:
        case GateKind::PrepX: case GateKind::PrepY: case GateKind::PrepZ:
            return;
        case GateKind::X: tab1 = kTabX; break;
        case GateKind::Y: tab1 = kTabY; break;
        case GateKind::Z: tab1 = kTabZ; break;
        case GateKind::H: tab1 = kTabH; break;
        case GateKind::S: tab1 = kTabS; break;
        case GateKind::CX:
        case GateKind::CZ: {
            const Entry2* tab = g.kind == GateKind::CX ? kTabCX : kTabCZ;
            const Entry2& e = tab[a.code(g.q0) + 4 * a.code(g.q1)];
            a.set_x(g.q0, e.x0);
            a.set_z(g.q0, e.z0);
            a.set_x(g.q1, e.x1);
            a.set_z(g.q1, e.z1);
            a.phase = (uint8_t)((a.phase + e.ph) & 3);
            return;
        }
    }
    const Entry1& e = tab1[a.code(g.q0)];
    a.set_x(g.q0, e.x);
    a.set_z(g.q0, e.z);
    a.phase = (uint8_t)((a.phase + e.ph) & 3);
}

PauliString conjugate(const CliffordGate& g, const PauliString& a) {
    PauliString r = a;
    conjugate_inplace(g, r);
    return r;
}

}  // namespace aces
