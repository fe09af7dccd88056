#ifndef ACES_DESIGN_H
#define ACES_DESIGN_H

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "aces/circuit.h"
#include "aces/noise.h"
#include "aces/pauli.h"

namespace aces {

// Sparse non-negative-integer matrix in compressed-row form.  Entries are the
// small powers with which gate eigenvalues enter circuit eigenvalues.
struct SparseMatrix {
    uint32_t rows = 0, cols = 0;
    std::vector<uint32_t> row_ptr{0};
    std::vector<uint32_t> col;
    std::vector<uint16_t> val;

    void append_row(const std::vector<std::pair<uint32_t, uint16_t>>& entries);
    size_t nnz() const { return col.size(); }
};

// Maps gate-eigenvalue indices (layer id, gate index, local Pauli) and
// measurement SPAM indices (qubit, basis) to design-matrix columns.  Gate
// columns come first, ordered by (unique layer id, gate index, local Pauli
// index 1..4^b-1); the 3n measurement columns follow, ordered by (qubit,
// basis X/Y/Z).
struct ColumnLayout {
    uint32_t n = 0;             // qubit count
    uint32_t gate_columns = 0;  // number of gate (non-SPAM) columns
    uint32_t total = 0;         // gate_columns + 3n
    // Per-column channel and local Pauli index (measurement basis + 1 for
    // SPAM columns).
    std::vector<ChannelId> col_channel;
    std::vector<uint16_t> col_pauli;

    static ColumnLayout build(const Circuit& c);
    uint32_t column(ChannelId id, uint32_t local_pauli) const;
    uint32_t spam_column(uint32_t qubit, int basis) const {
        return gate_columns + 3 * qubit + (uint32_t)basis;
    }

  private:
    std::unordered_map<uint64_t, uint32_t> offsets_;  // ChannelId.key -> first column
};

// One packed experiment: a set of mutually T-consistent Pauli preparations
// measured simultaneously with single-qubit bases.
struct Experiment {
    PauliString prep;            // combined preparation A (bits only)
    PauliString meas;            // combined measurement A'
    std::vector<uint32_t> rows;  // tuple-local row indices estimated here
};

// Everything associated with one tuple T of an experimental design.
struct TupleBlock {
    LayerTuple tuple;
    double tau = 0;  // circuit duration in seconds, incl. one meas/reset

    // Pauli preparation set Q_T in packing order (descending measurement
    // support, ties by Pauli text form), one design row per entry.
    std::vector<PauliString> paulis;
    std::vector<PauliString> mapped;   // T(a), canonical Hermitian sign
    std::vector<int8_t> sign;          // (+-)_{T,a} = mapped sign
    std::vector<Experiment> experiments;
    std::vector<uint32_t> multiplicity;  // E_{T,a} per row

    SparseMatrix matrix;  // local rows x layout.total

    // Row pairs that can carry a covariance: co-measured in >= 1 experiment
    // and with interacting propagation supports.  pair_rows holds the design
    // row of a+a' for each pair so Lambda_{a+a'} is a plain matrix product.
    std::vector<std::pair<uint32_t, uint32_t>> covar_pairs;
    std::vector<uint32_t> covar_count;  // E_{T,a,a'} per pair
    SparseMatrix pair_rows;

    uint32_t rows() const { return (uint32_t)paulis.size(); }
};

struct ExperimentalDesign {
    Circuit circuit;
    ColumnLayout layout;
    std::vector<TupleBlock> blocks;
    std::vector<double> weights;  // shot weights Gamma, sum 1

    uint32_t rows() const;
    uint32_t cols() const { return layout.total; }
    size_t total_experiments() const;
    double time_factor() const;  // tau_{T,Gamma} = sum Gamma_T tau_T
    // Default weights Gamma_T proportional to 1/tau_T.
    void set_default_weights();
    const TupleBlock* find_block(const LayerTuple& t) const;
};

// Per-experiment integer shot allocation for a measurement budget S.
struct ShotAllocation {
    double S = 0;
    double S_prime = 0;              // S * tau_{T,Gamma} / tau_basic
    double tau_basic = 0;            // time factor of the basic tuple set
    std::vector<int64_t> shots;      // per tuple: shots for EACH experiment (floored)
    int64_t lost_shots = 0;          // rounding remainder summed over tuples
};

// The Pauli preparation set Q_T: all non-identity Paulis supported on some
// gate of the rearranged circuit (3n single-qubit Paulis for the empty
// tuple), deduplicated, in packing order.
std::vector<PauliString> pauli_preparation_set(const Circuit& c, const LayerTuple& t);

// T-consistency of two preparations given their propagated images.
bool t_consistent(const PauliString& a, const PauliString& ta,
                  const PauliString& b, const PauliString& tb);

// Deterministic experiment packing (greedy set cover over consistency sets).
std::vector<Experiment> pack_experiments(const std::vector<PauliString>& paulis,
                                         const std::vector<PauliString>& mapped,
                                         uint32_t n);

// Build a full tuple block: preparation set, experiments, design rows,
// multiplicities, and covariance structure.
TupleBlock build_tuple_block(const Circuit& c, const ColumnLayout& layout,
                             const LayerTuple& t);

// Assemble a design from a tuple list with default (1/tau) shot weights.
ExperimentalDesign build_design(const Circuit& c, const std::vector<LayerTuple>& tuples);

// The basic tuple set: the empty tuple plus one single-layer tuple per
// unique layer id, in ascending id order.
std::vector<LayerTuple> basic_tuple_set(const Circuit& c);

ShotAllocation shot_allocation(const ExperimentalDesign& d, double S);

// Circuit eigenvalues Lambda = prod lambda_nu^{A_mu nu} for all design rows,
// from a noise model (via the column eigenvalue vector).
std::vector<double> column_eigenvalues(const ExperimentalDesign& d, const NoiseModel& m);
std::vector<double> circuit_eigenvalues(const SparseMatrix& a,
                                        const std::vector<double>& lambda_cols);

// Circuit log-eigenvalue covariance structure for one tuple, relative to one
// shot per experiment (divide by S_T for a concrete budget):
//   diag:     (1 - Lambda^2) / E_{T,a}
//   off-diag: E_{T,a,a'} (Lambda_{a+a'} - Lambda_a Lambda_a') / (E_a E_a')
struct TupleCovariance {
    std::vector<double> diag;                            // per row
    std::vector<std::pair<uint32_t, uint32_t>> pairs;    // off-diagonal entries
    std::vector<double> offdiag;
};
TupleCovariance tuple_covariance(const TupleBlock& b, const std::vector<double>& lambda_cols);

}  // namespace aces

#endif
