#ifndef ACES_PAULI_H
#define ACES_PAULI_H

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aces {

// n-qubit Pauli operator in symplectic form:
//   P = i^phase * prod_j i^{x_j z_j} X_j^{x_j} Z_j^{z_j}
// The per-qubit factor i^{x z} makes every phase-0 Pauli Hermitian, so the
// canonical Hermitian form has phase 0 (+P) or 2 (-P).
struct PauliString {
    uint32_t n = 0;
    std::vector<uint64_t> x;  // packed X bits, qubit j at word j/64 bit j%64
    std::vector<uint64_t> z;  // packed Z bits
    uint8_t phase = 0;        // power of i, mod 4

    PauliString() = default;
    explicit PauliString(uint32_t n_)
        : n(n_), x((n_ + 63) / 64, 0), z((n_ + 63) / 64, 0) {}

    size_t words() const { return x.size(); }

    bool x_bit(uint32_t j) const { return (x[j >> 6] >> (j & 63)) & 1; }
    bool z_bit(uint32_t j) const { return (z[j >> 6] >> (j & 63)) & 1; }
    void set_x(uint32_t j, bool v) {
        uint64_t m = 1ull << (j & 63);
        x[j >> 6] = v ? (x[j >> 6] | m) : (x[j >> 6] & ~m);
    }
    void set_z(uint32_t j, bool v) {
        uint64_t m = 1ull << (j & 63);
        z[j >> 6] = v ? (z[j >> 6] | m) : (z[j >> 6] & ~m);
    }

    // Per-qubit Pauli code: 0=I, 1=X, 2=Z, 3=Y  (code = x + 2z).
    int code(uint32_t j) const { return (int)x_bit(j) + 2 * (int)z_bit(j); }
    void set_code(uint32_t j, int c) {
        set_x(j, c & 1);
        set_z(j, (c >> 1) & 1);
    }

    bool is_identity() const {
        for (size_t w = 0; w < words(); w++)
            if (x[w] | z[w]) return false;
        return true;
    }

    int sign() const;  // +1 or -1; requires canonical (Hermitian) phase

    bool operator==(const PauliString& o) const {
        return n == o.n && x == o.x && z == o.z && phase == o.phase;
    }
    // Ordering on the bare bit strings (phase ignored), usable as a map key
    // for Pauli preparation sets.
    bool bits_less(const PauliString& o) const;
    bool bits_equal(const PauliString& o) const {
        return n == o.n && x == o.x && z == o.z;
    }

    std::vector<uint32_t> support() const;
    uint32_t weight() const;

    // Text form: sign prefix then one of I,X,Y,Z per qubit, e.g. "+ZXI".
    std::string str() const;
    static PauliString from_str(const std::string& s);
};

// Symplectic bilinear form w(a,b) = a_x.b_z + a_z.b_x mod 2.
// 0 iff the operators commute.
int symplectic_form(const PauliString& a, const PauliString& b);

// Product a*b with exact phase accumulation mod 4.
PauliString pauli_mul(const PauliString& a, const PauliString& b);

// Clifford gates acting on 1 or 2 qubits, plus measurement/preparation
// markers (which conjugate as the identity).
enum class GateKind : uint8_t {
    I, X, Y, Z, H, S, CX, CZ,
    MeasX, MeasY, MeasZ, PrepX, PrepY, PrepZ,
};

struct CliffordGate {
    GateKind kind = GateKind::I;
    uint32_t q0 = 0;
    uint32_t q1 = 0;  // used for CX (control q0, target q1) and CZ only

    int arity() const { return (kind == GateKind::CX || kind == GateKind::CZ) ? 2 : 1; }
    bool is_two_qubit() const { return arity() == 2; }
    bool operator==(const CliffordGate& o) const {
        return kind == o.kind && q0 == o.q0 && q1 == o.q1;
    }
};

const char* gate_kind_name(GateKind k);
GateKind gate_kind_from_name(const std::string& s);

// In-place conjugation a -> G a G^dag, exact sign tracking.
void conjugate_inplace(const CliffordGate& g, PauliString& a);
PauliString conjugate(const CliffordGate& g, const PauliString& a);

}  // namespace aces

#endif
