#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <vector>

#include "aces/pauli.h"
#include "aces/rng.h"

using namespace aces;
using cx = std::complex<double>;
using Mat = std::vector<std::vector<cx>>;

// ---- Dense-matrix oracle (independent of the tableau code) ----

static Mat mat_mul(const Mat& a, const Mat& b) {
    size_t n = a.size();
    Mat c(n, std::vector<cx>(n, 0));
    for (size_t i = 0; i < n; i++)
        for (size_t k = 0; k < n; k++)
            for (size_t j = 0; j < n; j++) c[i][j] += a[i][k] * b[k][j];
    return c;
}

static Mat mat_dagger(const Mat& a) {
    size_t n = a.size();
    Mat c(n, std::vector<cx>(n));
    for (size_t i = 0; i < n; i++)
        for (size_t j = 0; j < n; j++) c[i][j] = std::conj(a[j][i]);
    return c;
}

static Mat kron(const Mat& a, const Mat& b) {
    size_t na = a.size(), nb = b.size();
    Mat c(na * nb, std::vector<cx>(na * nb));
    for (size_t i = 0; i < na; i++)
        for (size_t j = 0; j < na; j++)
            for (size_t k = 0; k < nb; k++)
                for (size_t l = 0; l < nb; l++) c[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
    return c;
}

// Single-qubit Pauli with code 0=I,1=X,2=Z,3=Y (Hermitian convention).
static Mat pauli1(int code) {
    const cx i(0, 1);
    switch (code) {
        case 0: return {{1, 0}, {0, 1}};
        case 1: return {{0, 1}, {1, 0}};
        case 2: return {{1, 0}, {0, -1}};
        default: return {{0, -i}, {i, 0}};
    }
}

// Dense matrix of a PauliString (qubit 0 = leftmost tensor factor).
static Mat dense(const PauliString& p) {
    const cx i(0, 1);
    Mat m = {{1}};
    for (uint32_t j = 0; j < p.n; j++) m = kron(m, pauli1(p.code(j)));
    cx ph = std::pow(i, (double)p.phase);
    for (auto& row : m)
        for (auto& v : row) v *= ph;
    return m;
}

static bool mat_eq(const Mat& a, const Mat& b) {
    for (size_t i = 0; i < a.size(); i++)
        for (size_t j = 0; j < a.size(); j++)
            if (std::abs(a[i][j] - b[i][j]) > 1e-9) return false;
    return true;
}

// Dense unitary for a gate on an n-qubit register.
static Mat dense_gate(const CliffordGate& g, uint32_t n) {
    const cx i(0, 1);
    const double s = 1.0 / std::sqrt(2.0);
    Mat h = {{s, s}, {s, -s}};
    Mat sg = {{1, 0}, {0, i}};
    Mat id = {{1, 0}, {0, 1}};
    auto embed1 = [&](const Mat& u, uint32_t q) {
        Mat m = {{1}};
        for (uint32_t j = 0; j < n; j++) m = kron(m, j == q ? u : id);
        return m;
    };
    switch (g.kind) {
        case GateKind::I: return embed1(id, g.q0);
        case GateKind::X: return embed1(pauli1(1), g.q0);
        case GateKind::Y: return embed1(pauli1(3), g.q0);
        case GateKind::Z: return embed1(pauli1(2), g.q0);
        case GateKind::H: return embed1(h, g.q0);
        case GateKind::S: return embed1(sg, g.q0);
        case GateKind::CX:
        case GateKind::CZ: {
            // Projector decomposition: |0><0|_c (x) I + |1><1|_c (x) U_t.
            Mat p0 = {{1, 0}, {0, 0}}, p1 = {{0, 0}, {0, 1}};
            Mat u = g.kind == GateKind::CX ? pauli1(1) : pauli1(2);
            Mat a = {{1}}, b = {{1}};
            for (uint32_t j = 0; j < n; j++) {
                a = kron(a, j == g.q0 ? p0 : id);
                b = kron(b, j == g.q0 ? p1 : (j == g.q1 ? u : id));
            }
            Mat m(a.size(), std::vector<cx>(a.size()));
            for (size_t r = 0; r < a.size(); r++)
                for (size_t c = 0; c < a.size(); c++) m[r][c] = a[r][c] + b[r][c];
            return m;
        }
        default: return embed1(id, g.q0);
    }
}

static PauliString random_pauli(uint32_t n, CounterRng& rng, bool random_sign = true) {
    PauliString p(n);
    for (uint32_t j = 0; j < n; j++) p.set_code(j, (int)rng.uniform_int(4));
    if (random_sign && rng.uniform_int(2)) p.phase = 2;
    return p;
}

TEST_CASE("symplectic form basics") {
    PauliString x1 = PauliString::from_str("+X");
    PauliString z1 = PauliString::from_str("+Z");
    CHECK(symplectic_form(x1, z1) == 1);
    CHECK(symplectic_form(PauliString::from_str("+XZ"), PauliString::from_str("+ZX")) == 0);
    CounterRng rng(11);
    for (int t = 0; t < 100; t++) {
        PauliString a = random_pauli(5, rng);
        CHECK(symplectic_form(a, a) == 0);
    }
    CHECK_THROWS_AS(symplectic_form(x1, PauliString::from_str("+XX")), std::invalid_argument);
}

TEST_CASE("symplectic form matches dense commutator") {
    CounterRng rng(12);
    for (int t = 0; t < 50; t++) {
        PauliString a = random_pauli(2, rng, false);
        PauliString b = random_pauli(2, rng, false);
        Mat ab = mat_mul(dense(a), dense(b));
        Mat ba = mat_mul(dense(b), dense(a));
        bool commute = mat_eq(ab, ba);
        CHECK(commute == (symplectic_form(a, b) == 0));
    }
}

TEST_CASE("pauli_mul exhaustive against dense multiplication, 2 qubits") {
    for (int ca = 0; ca < 16; ca++) {
        for (int cb = 0; cb < 16; cb++) {
            PauliString a(2), b(2);
            a.set_code(0, ca & 3);
            a.set_code(1, ca >> 2);
            b.set_code(0, cb & 3);
            b.set_code(1, cb >> 2);
            PauliString c = pauli_mul(a, b);
            CHECK(mat_eq(mat_mul(dense(a), dense(b)), dense(c)));
        }
    }
}

TEST_CASE("pauli_mul simple identities") {
    PauliString x = PauliString::from_str("+X");
    PauliString z = PauliString::from_str("+Z");
    CHECK(pauli_mul(x, x) == PauliString::from_str("+I"));
    // X Z = -i Y: Y has phase 0 in Hermitian form, so X*Z carries phase 3.
    PauliString xz = pauli_mul(x, z);
    CHECK(xz.code(0) == 3);
    CHECK(xz.phase == 3);
    CounterRng rng(13);
    for (int t = 0; t < 1000; t++) {
        PauliString a = random_pauli(3, rng);
        PauliString b = random_pauli(3, rng);
        CHECK(pauli_mul(pauli_mul(a, b), b) == a);
    }
}

TEST_CASE("support and weight") {
    CHECK(PauliString::from_str("+IXI").support() == std::vector<uint32_t>{1});
    CHECK(PauliString::from_str("+III").support().empty());
    CHECK(PauliString::from_str("+YZ").support() == std::vector<uint32_t>{0, 1});
    PauliString big(130);
    big.set_code(0, 1);
    big.set_code(129, 3);
    CHECK(big.support() == std::vector<uint32_t>{0, 129});
    CHECK(big.weight() == 2);
}

TEST_CASE("string round trip") {
    for (const char* s : {"+ZXI", "-YYXZ", "+I", "-X"}) {
        PauliString p = PauliString::from_str(s);
        CHECK(p.str() == s);
    }
    CHECK_THROWS_AS(PauliString::from_str("+Q"), std::invalid_argument);
}

TEST_CASE("conjugation table spot checks") {
    PauliString x = PauliString::from_str("+X");
    PauliString r = conjugate({GateKind::H, 0, 0}, x);
    CHECK(r == PauliString::from_str("+Z"));
    r = conjugate({GateKind::S, 0, 0}, x);
    CHECK(r == PauliString::from_str("+Y"));
    r = conjugate({GateKind::CZ, 0, 1}, PauliString::from_str("+XI"));
    CHECK(r == PauliString::from_str("+XZ"));
}

TEST_CASE("conjugation exhaustive against dense oracle") {
    std::vector<CliffordGate> gates = {
        {GateKind::I, 0, 0}, {GateKind::X, 0, 0}, {GateKind::Y, 0, 0}, {GateKind::Z, 0, 0},
        {GateKind::H, 0, 0}, {GateKind::S, 0, 0}, {GateKind::I, 1, 0}, {GateKind::X, 1, 0},
        {GateKind::H, 1, 0}, {GateKind::S, 1, 0}, {GateKind::CX, 0, 1}, {GateKind::CX, 1, 0},
        {GateKind::CZ, 0, 1}, {GateKind::CZ, 1, 0},
    };
    for (const auto& g : gates) {
        Mat u = dense_gate(g, 2);
        Mat ud = mat_dagger(u);
        for (int code = 0; code < 16; code++) {
            for (int ph : {0, 2}) {
                PauliString a(2);
                a.set_code(0, code & 3);
                a.set_code(1, code >> 2);
                a.phase = (uint8_t)ph;
                PauliString b = conjugate(g, a);
                CHECK(b.phase % 2 == 0);  // stays Hermitian
                CHECK(mat_eq(mat_mul(mat_mul(u, dense(a)), ud), dense(b)));
            }
        }
    }
}

TEST_CASE("conjugation preserves commutation") {
    std::vector<CliffordGate> gates = {
        {GateKind::H, 2, 0}, {GateKind::S, 1, 0}, {GateKind::X, 0, 0},
        {GateKind::CX, 0, 2}, {GateKind::CZ, 1, 3},
    };
    CounterRng rng(14);
    for (int t = 0; t < 200; t++) {
        PauliString a = random_pauli(4, rng);
        PauliString b = random_pauli(4, rng);
        for (const auto& g : gates)
            CHECK(symplectic_form(a, b) ==
                  symplectic_form(conjugate(g, a), conjugate(g, b)));
    }
}

TEST_CASE("conjugation group action: involutions and S order 4") {
    CounterRng rng(15);
    std::vector<CliffordGate> involutions = {
        {GateKind::I, 0, 0}, {GateKind::X, 0, 0}, {GateKind::Y, 1, 0}, {GateKind::Z, 2, 0},
        {GateKind::H, 0, 0}, {GateKind::CX, 0, 1}, {GateKind::CZ, 1, 2},
    };
    for (int t = 0; t < 200; t++) {
        PauliString a = random_pauli(3, rng);
        for (const auto& g : involutions) {
            PauliString b = conjugate(g, conjugate(g, a));
            CHECK(b == a);
        }
        CliffordGate s{GateKind::S, 0, 0};
        PauliString b = conjugate(s, conjugate(s, conjugate(s, conjugate(s, a))));
        CHECK(b == a);
    }
}

TEST_CASE("measurement and preparation markers conjugate as identity") {
    CounterRng rng(16);
    for (auto kind : {GateKind::MeasX, GateKind::MeasY, GateKind::MeasZ,
                      GateKind::PrepX, GateKind::PrepY, GateKind::PrepZ}) {
        PauliString a = random_pauli(2, rng);
        CHECK(conjugate({kind, 0, 0}, a) == a);
    }
}

TEST_CASE("out-of-range qubit is rejected") {
    PauliString a(2);
    CHECK_THROWS_AS(conjugate({GateKind::H, 2, 0}, a), std::out_of_range);
    CHECK_THROWS_AS(conjugate({GateKind::CZ, 0, 2}, a), std::out_of_range);
}
