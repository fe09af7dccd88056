#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aces/circuit.h"
#include "aces/rng.h"

using namespace aces;

// Total gate-eigenvalue count N for a circuit: 3 per single-qubit gate, 15
// per two-qubit gate over unique layers, plus 3n measurement SPAM parameters.
static long eigenvalue_count(const Circuit& c) {
    long total = 3L * c.n;
    for (int id : c.unique_ids())
        for (const auto& g : c.unique_layer(id).gates) total += g.arity() == 2 ? 15 : 3;
    return total;
}

TEST_CASE("rotated surface circuit structure") {
    for (int d : {3, 5, 7, 9, 11}) {
        CAPTURE(d);
        Circuit c = build_rotated_surface_circuit(d);
        CHECK(c.n == (uint32_t)(2 * d * d - 1));
        CHECK(c.layers.size() == 9);
        CHECK(c.unique_ids() == std::vector<int>{1, 2, 3, 4, 5, 6, 8});
        CHECK(eigenvalue_count(c) == 84L * d * d - 36L * d - 24);
        CHECK(c.dynamically_decoupled);
        // Layer identification pattern of the 9-layer schedule.
        CHECK(c.unique_index == std::vector<int>{1, 2, 3, 4, 5, 6, 3, 8, 1});
    }
    CHECK(build_rotated_surface_circuit(25).n == 1249);
    CHECK_THROWS_AS(build_rotated_surface_circuit(4), std::invalid_argument);
    CHECK_THROWS_AS(build_rotated_surface_circuit(1), std::invalid_argument);
}

TEST_CASE("unrotated surface circuit structure") {
    for (int d : {2, 3, 5, 7, 9}) {
        CAPTURE(d);
        Circuit c = build_unrotated_surface_circuit(d);
        CHECK(c.n == (uint32_t)((2 * d - 1) * (2 * d - 1)));
        CHECK(c.layers.size() == 6);
        CHECK(c.unique_ids().size() == 5);
        CHECK(eigenvalue_count(c) == 144L * d * d - 180L * d + 54);
        CHECK(!c.dynamically_decoupled);
    }
    CHECK(build_unrotated_surface_circuit(17).n == 1089);
    CHECK_THROWS_AS(build_unrotated_surface_circuit(1), std::invalid_argument);
}

TEST_CASE("every layer covers all qubits with disjoint gates") {
    for (const Circuit& c :
         {build_rotated_surface_circuit(3), build_unrotated_surface_circuit(3)}) {
        for (const auto& layer : c.layers) {
            std::vector<int> cover(c.n, 0);
            for (const auto& g : layer.gates) {
                cover[g.q0]++;
                if (g.is_two_qubit()) cover[g.q1]++;
            }
            for (uint32_t q = 0; q < c.n; q++) CHECK(cover[q] == 1);
        }
    }
}

TEST_CASE("unique ids identify identical layers only") {
    Circuit c = build_rotated_surface_circuit(5);
    for (size_t i = 0; i < c.layers.size(); i++)
        for (size_t j = 0; j < c.layers.size(); j++)
            CHECK((c.unique_index[i] == c.unique_index[j]) ==
                  c.layers[i].same_gates(c.layers[j]));
}

TEST_CASE("measured stabilisers are deterministic, commuting, full rank") {
    for (int d : {3, 5}) {
        CAPTURE(d);
        CHECK(detail::check_measured_stabilisers(build_rotated_surface_circuit(d)).empty());
        CHECK(detail::check_measured_stabilisers(build_unrotated_surface_circuit(d)).empty());
    }
}

TEST_CASE("layer tuple parsing and rearrangement") {
    Circuit c = build_rotated_surface_circuit(3);
    LayerTuple t = LayerTuple::from_str("(2,5,2,5)");
    CHECK(t.entries == std::vector<int>{2, 5, 2, 5});
    CHECK(t.str() == "(2, 5, 2, 5)");
    auto layers = c.rearrange(t);
    REQUIRE(layers.size() == 4);
    CHECK(layers[0] == &c.unique_layer(2));
    CHECK(layers[1] == &c.unique_layer(5));
    CHECK(layers[2] == &c.unique_layer(2));
    CHECK(c.rearrange(LayerTuple{}).empty());
    CHECK(c.rearrange(LayerTuple{{1}}).size() == 1);
    CHECK_THROWS_AS(c.rearrange(LayerTuple{{7}}), std::invalid_argument);
}

TEST_CASE("tuple durations") {
    Circuit c = build_rotated_surface_circuit(3);
    CHECK(c.tuple_duration(LayerTuple{}) == doctest::Approx(660e-9));
    CHECK(c.tuple_duration(LayerTuple{{1}}) == doctest::Approx(689e-9));
    CHECK(c.tuple_duration(LayerTuple{{2, 5, 2, 5}}) == doctest::Approx(4 * 29e-9 + 660e-9));
}

TEST_CASE("propagate matches per-layer conjugation") {
    Circuit c = build_rotated_surface_circuit(3);
    CounterRng rng(21);
    LayerTuple t{{2, 1, 3, 2}};
    for (int trial = 0; trial < 50; trial++) {
        PauliString a(c.n);
        for (uint32_t q = 0; q < c.n; q++) a.set_code(q, (int)rng.uniform_int(4));
        PauliString expect = a;
        for (const Layer* l : c.rearrange(t)) conjugate_layer_inplace(*l, expect);
        CHECK(c.propagate(t, a) == expect);
    }
    // Empty tuple leaves the Pauli untouched.
    PauliString a(c.n);
    a.set_code(4, 3);
    CHECK(c.propagate(LayerTuple{}, a) == a);
}

TEST_CASE("rotated circuit distinguishes data and measure qubits") {
    Circuit c = build_rotated_surface_circuit(3);
    int measure = 0;
    for (uint32_t q = 0; q < c.n; q++) measure += c.is_measure_qubit[q];
    CHECK(measure == 8);
    // Data qubits occupy indices 0..d^2-1 in the layout convention.
    for (int q = 0; q < 9; q++) CHECK(!c.is_measure_qubit[q]);
}

TEST_CASE("dynamical decoupling layer is all-X on the rotated circuit") {
    Circuit c = build_rotated_surface_circuit(3);
    const Layer& dd = c.unique_layer(5);
    CHECK(dd.layer_class == LayerClass::dynamical_decoupling);
    for (const auto& g : dd.gates) CHECK(g.kind == GateKind::X);
}
