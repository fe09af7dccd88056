#include "aces/estimate.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace aces {

const char* fit_method_name(FitMethod m) {
    switch (m) {
        case FitMethod::OLS: return "ols";
        case FitMethod::WLS: return "wls";
        case FitMethod::FGLS: return "fgls";
    }
    return "?";
}

FitMethod fit_method_from_name(const std::string& s) {
    if (s == "ols") return FitMethod::OLS;
    if (s == "wls") return FitMethod::WLS;
    if (s == "fgls") return FitMethod::FGLS;
    throw std::invalid_argument("unknown fit method '" + s + "'");
}

CircuitEigenvalueEstimates estimate_circuit_eigenvalues(const ExperimentalDesign& d,
                                                        const OutcomeDataset& data) {
    if (data.tuples.size() != d.blocks.size())
        throw std::invalid_argument("dataset does not match the design tuple count");
    CircuitEigenvalueEstimates est;
    uint32_t offset = 0;
    est.block_start.push_back(0);
    for (const TupleBlock& b : d.blocks) {
        offset += b.rows();
        est.block_start.push_back(offset);
    }
    est.lambda_hat.assign(offset, 0.0);
    est.variance.assign(offset, 0.0);
    est.total_shots.assign(offset, 0.0);

    std::vector<double> num(offset, 0.0);
    for (size_t t = 0; t < d.blocks.size(); t++) {
        const TupleBlock& b = d.blocks[t];
        const TupleOutcome& out = data.tuples[t];
        if (out.experiments.size() != b.experiments.size())
            throw std::invalid_argument("dataset does not match the design experiments");
        uint32_t base = est.block_start[t];
        for (size_t e = 0; e < b.experiments.size(); e++) {
            const Experiment& exp = b.experiments[e];
            const ExperimentOutcome& eo = out.experiments[e];
            for (size_t i = 0; i < exp.rows.size(); i++) {
                num[base + exp.rows[i]] += (double)eo.plus[i];
                est.total_shots[base + exp.rows[i]] += (double)eo.shots;
            }
        }
    }
    for (uint32_t r = 0; r < offset; r++) {
        if (est.total_shots[r] <= 0) continue;  // flagged, excluded downstream
        est.lambda_hat[r] = 2.0 * num[r] / est.total_shots[r] - 1.0;
        est.variance[r] =
            (1.0 - est.lambda_hat[r] * est.lambda_hat[r]) / est.total_shots[r];
    }
    return est;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Regression view of the design restricted to rows with data: per kept row
// the clipped -log estimate, the binomial-floored WLS weight, and the block.
struct Regression {
    SpMat a;                  // kept rows x N
    Eigen::VectorXd b;        // -log clipped lambda_hat
    Eigen::VectorXd w;        // WLS weights
    Eigen::VectorXd shots;    // pooled shots per kept row
    std::vector<uint32_t> block_of;      // kept row -> tuple index
    std::vector<uint32_t> local_row;     // kept row -> row within the block
    std::vector<std::vector<int>> kept;  // per block: local row -> kept index or -1
    uint32_t clipped = 0;
};

Regression build_regression(const ExperimentalDesign& d,
                            const CircuitEigenvalueEstimates& est) {
    Regression reg;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> b, w, shots;
    reg.kept.resize(d.blocks.size());
    for (size_t t = 0; t < d.blocks.size(); t++) {
        const TupleBlock& blk = d.blocks[t];
        uint32_t base = est.block_start[t];
        reg.kept[t].assign(blk.rows(), -1);
        for (uint32_t r = 0; r < blk.rows(); r++) {
            double den = est.total_shots[base + r];
            if (den <= 0) continue;
            double floor = 1.0 / (2.0 * den);
            double lam = est.lambda_hat[base + r];
            double lam_c = std::clamp(lam, floor, 1.0);
            if (lam_c != lam) reg.clipped++;
            uint32_t row = (uint32_t)b.size();
            reg.kept[t][r] = (int)row;
            reg.block_of.push_back((uint32_t)t);
            reg.local_row.push_back(r);
            b.push_back(-std::log(lam_c));
            // Binomial variance floored at one effective miss so that exact
            // rows keep a finite weight.
            double var = std::max(1.0 - lam_c * lam_c, 1.0 / den);
            w.push_back(den * lam_c * lam_c / var);
            shots.push_back(den);
            for (uint32_t k = blk.matrix.row_ptr[r]; k < blk.matrix.row_ptr[r + 1]; k++)
                trip.emplace_back((int)row, (int)blk.matrix.col[k],
                                  (double)blk.matrix.val[k]);
        }
    }
    reg.a.resize((int)b.size(), (int)d.cols());
    reg.a.setFromTriplets(trip.begin(), trip.end());
    reg.b = Eigen::Map<Eigen::VectorXd>(b.data(), (int)b.size());
    reg.w = Eigen::Map<Eigen::VectorXd>(w.data(), (int)w.size());
    reg.shots = Eigen::Map<Eigen::VectorXd>(shots.data(), (int)shots.size());
    return reg;
}

Eigen::VectorXd solve_weighted(const Regression& reg, const Eigen::VectorXd& w) {
    SpMat wa = w.asDiagonal() * reg.a;
    SpMat h = SpMat(reg.a.transpose()) * wa;
    Eigen::SimplicialLDLT<SpMat> solver(h);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("least squares failed: design matrix is rank deficient");
    Eigen::VectorXd g = wa.transpose() * reg.b;
    Eigen::VectorXd x = solver.solve(g);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("least squares solve failed");
    return x;
}

// One GLS pass with the covariance rebuilt from the current column estimates.
Eigen::VectorXd solve_gls(const ExperimentalDesign& d, const Regression& reg,
                          const Eigen::VectorXd& x) {
    uint32_t n = d.cols();
    std::vector<double> lam_cols(n);
    for (uint32_t c = 0; c < n; c++)
        lam_cols[c] = std::clamp(std::exp(-x[(int)c]), 1e-12, 1.0);

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero((int)n, (int)n);
    Eigen::VectorXd g = Eigen::VectorXd::Zero((int)n);
    for (size_t t = 0; t < d.blocks.size(); t++) {
        const TupleBlock& blk = d.blocks[t];
        const std::vector<int>& kept = reg.kept[t];
        std::vector<uint32_t> rows;  // kept indices of this block
        for (int k : kept)
            if (k >= 0) rows.push_back((uint32_t)k);
        if (rows.empty()) continue;

        TupleCovariance cov = tuple_covariance(blk, lam_cols);
        uint32_t nb = (uint32_t)rows.size();
        Eigen::MatrixXd omega = Eigen::MatrixXd::Zero((int)nb, (int)nb);
        std::vector<int> pos(blk.rows(), -1);
        for (uint32_t i = 0; i < nb; i++) pos[reg.local_row[rows[i]]] = (int)i;
        for (uint32_t r = 0; r < blk.rows(); r++) {
            if (pos[r] < 0) continue;
            double den = reg.shots[(int)rows[(uint32_t)pos[r]]];
            double s_t = den / blk.multiplicity[r];
            omega(pos[r], pos[r]) = std::max(cov.diag[r] / s_t, 1.0 / (den * den));
        }
        for (size_t k = 0; k < cov.pairs.size(); k++) {
            auto [ra, rb] = cov.pairs[k];
            if (pos[ra] < 0 || pos[rb] < 0) continue;
            double s_t = reg.shots[(int)rows[(uint32_t)pos[ra]]] / blk.multiplicity[ra];
            omega(pos[ra], pos[rb]) = cov.offdiag[k] / s_t;
            omega(pos[rb], pos[ra]) = omega(pos[ra], pos[rb]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(omega);
        if (llt.info() != Eigen::Success) {
            // Estimated covariance not PSD: retreat to its diagonal.
            Eigen::MatrixXd diag = omega.diagonal().asDiagonal();
            llt.compute(diag);
        }
        Eigen::MatrixXd ab = Eigen::MatrixXd::Zero((int)nb, (int)n);
        Eigen::VectorXd bb((int)nb);
        for (uint32_t i = 0; i < nb; i++) {
            uint32_t r = reg.local_row[rows[i]];
            for (uint32_t k = blk.matrix.row_ptr[r]; k < blk.matrix.row_ptr[r + 1]; k++)
                ab((int)i, (int)blk.matrix.col[k]) = (double)blk.matrix.val[k];
            bb[(int)i] = reg.b[(int)rows[i]];
        }
        Eigen::MatrixXd y = llt.solve(ab);
        h.noalias() += ab.transpose() * y;
        g.noalias() += ab.transpose() * llt.solve(bb);
    }
    Eigen::LDLT<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("generalised least squares normal matrix is singular");
    return solver.solve(g);
}

}  // namespace

FitResult fit_gate_eigenvalues(const ExperimentalDesign& d,
                               const CircuitEigenvalueEstimates& est,
                               const FitOptions& opt) {
    if (est.rows() != d.rows())
        throw std::invalid_argument("estimates do not match the design rows");
    Regression reg = build_regression(d, est);
    FitResult res;
    res.method = opt.method;
    res.rows_excluded = d.rows() - (uint32_t)reg.b.size();
    res.rows_clipped = reg.clipped;

    bool fgls = opt.method == FitMethod::FGLS;
    if (fgls) {
        uint32_t largest = 0;
        for (const TupleBlock& b : d.blocks) largest = std::max(largest, b.rows());
        if (largest > opt.gls_block_limit || d.cols() > 5000) {
            fgls = false;
            res.fell_back_to_wls = true;
        }
    }
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(reg.b.size());
    Eigen::VectorXd x =
        solve_weighted(reg, opt.method == FitMethod::OLS ? ones : reg.w);
    if (fgls) {
        res.converged = false;
        for (int it = 0; it < opt.max_iterations; it++) {
            Eigen::VectorXd x_new = solve_gls(d, reg, x);
            double delta = (x_new - x).lpNorm<Eigen::Infinity>();
            x = x_new;
            res.iterations = it + 1;
            if (delta < opt.tol) {
                res.converged = true;
                break;
            }
        }
    }

    res.x_hat.resize(d.cols());
    res.lambda_hat.resize(d.cols());
    for (uint32_t c = 0; c < d.cols(); c++) {
        double v = x[(int)c];
        if (v < 0) {
            v = 0;
            res.negative_zeroed++;
            res.clipped_to_one++;
        }
        res.x_hat[c] = v;
        res.lambda_hat[c] = std::min(std::exp(-v), 1.0);
    }
    return res;
}

NoiseModel recover_probabilities(const ExperimentalDesign& d,
                                 const std::vector<double>& lambda_hat) {
    if (lambda_hat.size() != d.cols())
        throw std::invalid_argument("lambda vector does not match the design columns");
    const Circuit& c = d.circuit;
    NoiseModel m;
    m.generator = "estimated";
    m.n = c.n;
    for (int id : c.unique_ids()) {
        const Layer& layer = c.unique_layer(id);
        for (size_t g = 0; g < layer.gates.size(); g++) {
            const CliffordGate& gate = layer.gates[g];
            GateChannel ch;
            ch.id = ChannelId{id, (int32_t)g};
            ch.qubits = {gate.q0};
            if (gate.is_two_qubit()) ch.qubits.push_back(gate.q1);
            size_t dim = gate.is_two_qubit() ? 16 : 4;
            std::vector<double> eig(dim, 1.0);
            for (uint32_t a = 1; a < dim; a++)
                eig[a] = lambda_hat[d.layout.column(ch.id, a)];
            ch.probs = project_simplex(wht_inverse(eig));
            ch.refresh_eigenvalues();
            m.channels.push_back(std::move(ch));
        }
    }
    for (uint32_t q = 0; q < c.n; q++) {
        for (int basis = 0; basis < 3; basis++) {
            GateChannel ch;
            ch.id = measurement_channel_id(q, basis);
            double lam = std::clamp(lambda_hat[d.layout.spam_column(q, basis)], -1.0, 1.0);
            double p = 0.5 * (1.0 - lam);
            ch.probs = {1.0 - p, p};
            ch.refresh_eigenvalues();
            m.channels.push_back(std::move(ch));
        }
    }
    m.rebuild_index();
    return m;
}

std::vector<double> true_column_eigenvalues(const ExperimentalDesign& d,
                                            const NoiseModel& m) {
    std::vector<double> lam(d.cols());
    for (uint32_t c = 0; c < d.cols(); c++) {
        const GateChannel& ch = m.channel(d.layout.col_channel[c]);
        lam[c] = ch.is_measurement() ? ch.eigenvalues[1]
                                     : ch.eigenvalues[d.layout.col_pauli[c]];
    }
    return lam;
}

std::string channel_type_name(const ExperimentalDesign& d, ChannelId id) {
    if (id.layer == kMeasurementLayer) return "measurement";
    const CliffordGate& g = d.circuit.unique_layer(id.layer).gates[id.gate];
    switch (g.kind) {
        case GateKind::I:
        case GateKind::X:
        case GateKind::Y:
        case GateKind::Z: return "pauli";
        case GateKind::H: return "hadamard";
        case GateKind::S: return "s";
        case GateKind::CZ: return "cz";
        case GateKind::CX: return "cx";
        default: return "other";
    }
}

EstimationReport report_metrics(const ExperimentalDesign& d, const FitResult& fit,
                                const NoiseModel* truth, double s_prime) {
    EstimationReport rep;
    rep.fit = fit;
    rep.s_prime = s_prime;
    rep.recovered = recover_probabilities(d, fit.lambda_hat);
    if (!truth) return rep;

    rep.has_truth = true;
    std::vector<double> lam_true = true_column_eigenvalues(d, *truth);
    double sq = 0;
    for (uint32_t c = 0; c < d.cols(); c++) {
        double delta = fit.lambda_hat[c] - lam_true[c];
        sq += delta * delta;
    }
    rep.nrmse = std::sqrt(s_prime * sq / (double)d.cols());

    std::map<std::string, std::vector<double>> by_type;
    for (const GateChannel& ch : rep.recovered.channels) {
        // One measurement entry per qubit (the Z basis) rather than three,
        // matching how measurements are counted as gates.
        if (ch.is_measurement() && ch.id.gate % 3 != 2) continue;
        GateTvdEntry entry;
        entry.id = ch.id;
        entry.type = channel_type_name(d, ch.id);
        entry.tvd = tvd(ch.probs, truth->channel(ch.id).probs);
        by_type[entry.type].push_back(entry.tvd);
        rep.gate_tvds.push_back(std::move(entry));
    }
    for (auto& [type, vals] : by_type) {
        std::sort(vals.begin(), vals.end());
        size_t k = vals.size();
        rep.type_median_tvd[type] =
            k % 2 ? vals[k / 2] : 0.5 * (vals[k / 2 - 1] + vals[k / 2]);
    }
    return rep;
}

}  // namespace aces
