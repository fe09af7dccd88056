#include "aces/optimise.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace aces {

void OptimiserConfig::validate() const {
    if (!(eta > 0) || !(eta_r > 0)) throw std::invalid_argument("learning rates must be positive");
    if (!(mu >= 0 && mu <= 1)) throw std::invalid_argument("momentum must lie in [0, 1]");
    if (n_ex < 1 || l_ex < 1 || f_trial < 1 || max_grad_steps < 1 || warm_grad_steps < 0 ||
        max_rep_cycles < 1)
        throw std::invalid_argument("integer optimiser parameters must be >= 1");
    if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
}

int OptimiserConfig::resolved_l_set(const Circuit& c) const {
    return l_set > 0 ? l_set : 5 * (int)c.unique_ids().size();
}

namespace {

std::vector<double> softmax_weights(const std::vector<double>& gamma) {
    double lo = *std::min_element(gamma.begin(), gamma.end());
    double sum = 0;
    std::vector<double> w(gamma.size());
    for (size_t i = 0; i < gamma.size(); i++) {
        w[i] = std::exp(-(gamma[i] - lo));
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

}  // namespace

std::vector<double> gradient_log_weights(const MeritContext& ctx,
                                         const std::vector<double>& weights,
                                         EstimatorKind kind) {
    size_t nt = ctx.tuples();
    if (nt == 1) return {0.0};
    CovarianceResult cov = gate_covariance(ctx, weights, kind);
    double tr = cov.trace, tr2 = cov.trace_sq;
    double time_factor = 0;
    for (size_t i = 0; i < nt; i++) time_factor += weights[i] * ctx.tau[i];

    // tr(Sigma) and tr(Sigma^2) sensitivities per covariance block.
    Eigen::MatrixXd sa = cov.sigma * cov.a_star;  // N x M

    // WLS weight matrices depend on diag(Omega'), adding correction terms
    // 2 diag(A*^T A* B) and 4 diag(A*^T Sigma A* B) with B = Omega' W (AA+ - I).
    Eigen::VectorXd d1, d2;
    if (kind == EstimatorKind::WLS) {
        Eigen::MatrixXd r(ctx.N, ctx.M);
        for (size_t u = 0; u < nt; u++) {
            uint32_t r0 = ctx.block_start[u], m = ctx.block_start[u + 1] - r0;
            // Omega'_U W_U = Omega*_U with columns divided by its diagonal
            // (the Gamma scale factors cancel).
            Eigen::MatrixXd ow =
                ctx.omega_star[u] * ctx.omega_star[u].diagonal().cwiseInverse().asDiagonal();
            r.middleCols(r0, m).noalias() = cov.a_star.middleCols(r0, m) * ow;
        }
        Eigen::MatrixXd ra = r * ctx.A;  // N x N
        Eigen::MatrixXd q =
            ra * ctx.lambda.cwiseInverse().asDiagonal() * cov.a_star - r;  // A* B
        d1 = (cov.a_star.array() * q.array()).colwise().sum();
        d2 = (sa.array() * q.array()).colwise().sum();
    }

    double pre1 = std::sqrt(1.0 / ctx.N) * (tr * tr / 2 + 3 * tr2 / 8) / std::pow(tr, 2.5);
    double pre2 = std::sqrt(1.0 / ctx.N) / (4 * std::pow(tr, 1.5));

    std::vector<double> g_block(nt);
    for (size_t u = 0; u < nt; u++) {
        uint32_t r0 = ctx.block_start[u], m = ctx.block_start[u + 1] - r0;
        auto au = cov.a_star.middleCols(r0, m);
        auto su = sa.middleCols(r0, m);
        const Eigen::MatrixXd& om = ctx.omega_star[u];
        double g1 = ((au * om).array() * au.array()).sum();
        double g2 = 2 * ((su * om).array() * au.array()).sum();
        if (kind == EstimatorKind::WLS) {
            for (uint32_t j = 0; j < m; j++) {
                g1 += 2 * d1[r0 + j] * om(j, j);
                g2 += 4 * d2[r0 + j] * om(j, j);
            }
        }
        g_block[u] = pre1 * g1 - pre2 * g2;
    }

    // dF/dGamma_T, then the softmax chain rule to the log-weights.
    std::vector<double> df_dgamma_cap(nt);
    double sum_over = 0;
    for (size_t u = 0; u < nt; u++) sum_over += g_block[u] / weights[u];
    for (size_t t = 0; t < nt; t++)
        df_dgamma_cap[t] =
            ctx.tau[t] * sum_over - g_block[t] * time_factor / (weights[t] * weights[t]);
    double dot = 0;
    for (size_t u = 0; u < nt; u++) dot += df_dgamma_cap[u] * weights[u];
    std::vector<double> grad(nt);
    for (size_t t = 0; t < nt; t++) grad[t] = weights[t] * (dot - df_dgamma_cap[t]);
    return grad;
}

std::vector<double> gradient_log_weights(const ExperimentalDesign& d, const NoiseModel& m,
                                         EstimatorKind kind) {
    MeritContext ctx = make_merit_context(d, m);
    return gradient_log_weights(ctx, d.weights, kind);
}

ShotOptimisationResult optimise_shot_weights(const MeritContext& ctx,
                                             const std::vector<double>& init,
                                             const OptimiserConfig& cfg, int step_cap) {
    cfg.validate();
    int cap = step_cap >= 0 ? step_cap : cfg.max_grad_steps;
    size_t nt = ctx.tuples();
    std::vector<double> gamma(nt);
    for (size_t i = 0; i < nt; i++) {
        if (!(init[i] > 0)) throw std::invalid_argument("initial weights must be positive");
        gamma[i] = -std::log(init[i]);
    }
    auto f_of = [&](const std::vector<double>& g) {
        return merit(ctx, softmax_weights(g), cfg.estimator).merit;
    };
    ShotOptimisationResult res;
    if (nt == 1) {
        // A single tuple always receives the full budget; the merit itself
        // may be undefined (single-tuple designs are rarely full rank).
        res.weights = {1.0};
        try {
            res.merit = f_of(gamma);
        } catch (const std::runtime_error&) {
            res.merit = std::numeric_limits<double>::quiet_NaN();
        }
        return res;
    }
    double f_cur = f_of(gamma);
    if (cap == 0) {
        res.weights = softmax_weights(gamma);
        res.merit = f_cur;
        return res;
    }

    std::vector<double> v(nt, 0.0);
    double eta = cfg.eta;
    std::deque<int> reversions;
    std::vector<double> trace{f_cur};
    int step = 0;
    for (; step < cap; step++) {
        std::vector<double> look(nt), cand(nt);
        for (size_t i = 0; i < nt; i++) look[i] = gamma[i] + cfg.mu * v[i];
        std::vector<double> g = gradient_log_weights(ctx, softmax_weights(look), cfg.estimator);
        for (size_t i = 0; i < nt; i++) {
            v[i] = cfg.mu * v[i] - eta * g[i];
            cand[i] = gamma[i] + v[i];
        }
        double f_new = f_of(cand);
        if (f_new < f_cur) {
            gamma = cand;
            f_cur = f_new;
        } else {
            // Revert and zero the velocity; shrink the learning rate after
            // two reversions within five steps.
            std::fill(v.begin(), v.end(), 0.0);
            while (!reversions.empty() && reversions.front() < step - 4) reversions.pop_front();
            reversions.push_back(step);
            if (reversions.size() >= 2) {
                eta /= cfg.eta_r;
                reversions.clear();
            }
        }
        trace.push_back(f_cur);
        if (trace.size() > 10 &&
            trace[trace.size() - 11] - f_cur < cfg.tol * f_cur)
            break;
    }
    res.weights = softmax_weights(gamma);
    res.merit = f_cur;
    res.steps = step;
    return res;
}

ShotOptimisationResult optimise_shot_weights(ExperimentalDesign& d, const NoiseModel& m,
                                             const OptimiserConfig& cfg) {
    MeritContext ctx = make_merit_context(d, m);
    ShotOptimisationResult res = optimise_shot_weights(ctx, d.weights, cfg);
    d.weights = res.weights;
    return res;
}

std::vector<LayerTuple> repeated_tuple_patterns(const Circuit& c) {
    int dd_id = -1;
    for (int id : c.unique_ids())
        if (c.unique_layer(id).layer_class == LayerClass::dynamical_decoupling) dd_id = id;
    std::vector<LayerTuple> out;
    for (int id : c.unique_ids()) {
        const Layer& l = c.unique_layer(id);
        if (l.layer_class == LayerClass::two_qubit && c.dynamically_decoupled && dd_id > 0)
            out.push_back(LayerTuple{{id, dd_id, id, dd_id}});
        else
            out.push_back(LayerTuple{{id}});
    }
    return out;
}

LayerTuple repeat_pattern(const LayerTuple& pattern, int repetitions) {
    if (repetitions < 1) throw std::invalid_argument("repetition count must be >= 1");
    LayerTuple t;
    t.entries.reserve(pattern.entries.size() * repetitions);
    for (int r = 0; r < repetitions; r++)
        t.entries.insert(t.entries.end(), pattern.entries.begin(), pattern.entries.end());
    return t;
}

namespace {

// Per-tuple design blocks and merit-context pieces, cached by tuple text.
struct DesignCache {
    const Circuit& c;
    ColumnLayout layout;
    std::vector<double> lambda_cols;
    double tau_basic;

    struct Entry {
        TupleBlock block;
        TupleContextBlock ctx;
    };
    std::unordered_map<std::string, Entry> map;

    DesignCache(const Circuit& circuit, const NoiseModel& m)
        : c(circuit), layout(ColumnLayout::build(circuit)), tau_basic(basic_time_factor(circuit)) {
        lambda_cols.resize(layout.total);
        for (uint32_t col = 0; col < layout.total; col++) {
            const GateChannel& ch = m.channel(layout.col_channel[col]);
            if (ch.is_measurement())
                lambda_cols[col] = ch.eigenvalues[1];
            else
                lambda_cols[col] = ch.eigenvalues[layout.col_pauli[col]];
        }
    }

    const Entry& get(const LayerTuple& t) {
        std::string key = t.str();
        auto it = map.find(key);
        if (it != map.end()) return it->second;
        Entry e;
        e.block = build_tuple_block(c, layout, t);
        e.ctx = make_context_block(e.block, lambda_cols);
        return map.emplace(std::move(key), std::move(e)).first->second;
    }

    MeritContext context(const std::vector<LayerTuple>& tuples) {
        std::vector<const TupleContextBlock*> blocks;
        blocks.reserve(tuples.size());
        for (const auto& t : tuples) blocks.push_back(&get(t).ctx);
        return assemble_merit_context(blocks, lambda_cols, tau_basic, layout.total);
    }

    ExperimentalDesign design(const std::vector<LayerTuple>& tuples,
                              const std::vector<double>& weights) {
        ExperimentalDesign d;
        d.circuit = c;
        d.layout = layout;
        for (const auto& t : tuples) d.blocks.push_back(get(t).block);
        d.weights = weights;
        return d;
    }

    std::vector<double> default_gamma(const std::vector<LayerTuple>& tuples) {
        std::vector<double> g;
        for (const auto& t : tuples) g.push_back(std::log(c.tuple_duration(t)));
        return g;
    }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Merit with warm-started shot optimisation; infinity when the set cannot be
// evaluated (rank-deficient designs during pruning).
double warm_merit(DesignCache& cache, const std::vector<LayerTuple>& tuples,
                  std::vector<double>& gamma, const OptimiserConfig& cfg, int steps) {
    try {
        MeritContext ctx = cache.context(tuples);
        ShotOptimisationResult r =
            optimise_shot_weights(ctx, softmax_weights(gamma), cfg, steps);
        for (size_t i = 0; i < gamma.size(); i++) gamma[i] = -std::log(r.weights[i]);
        return r.merit;
    } catch (const std::runtime_error&) {
        return kInf;
    }
}

int to_odd(long long v) {
    if (v < 1) return 1;
    return (int)(v % 2 == 1 ? v : v + 1);
}

}  // namespace

std::vector<int> optimise_repetitions(const Circuit& c, const NoiseModel& m,
                                      const std::vector<LayerTuple>& patterns,
                                      const OptimiserConfig& cfg,
                                      OptimisationHistory* history) {
    cfg.validate();
    DesignCache cache(c, m);
    std::vector<LayerTuple> base = basic_tuple_set(c);

    // Mean measurement eigenvalue for the toy-model initialisation.
    double lam_m = 0;
    {
        int count = 0;
        for (uint32_t col = cache.layout.gate_columns; col < cache.layout.total; col++) {
            lam_m += cache.lambda_cols[col];
            count++;
        }
        lam_m /= count;
    }

    std::vector<int> reps(patterns.size());
    for (size_t i = 0; i < patterns.size(); i++) {
        // Smallest gate eigenvalue among the pattern's layers.
        double lam_min = 1.0;
        std::vector<int> ids = patterns[i].entries;
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        for (uint32_t col = 0; col < cache.layout.gate_columns; col++)
            if (std::find(ids.begin(), ids.end(), cache.layout.col_channel[col].layer) !=
                ids.end())
                lam_min = std::min(lam_min, cache.lambda_cols[col]);
        double pattern_time = 0;
        for (int id : patterns[i].entries) pattern_time += c.unique_layer(id).layer_time;
        ToyOptimum toy = toy_optimal(std::max(lam_min, 1e-6),
                                     std::min(std::max(lam_m, 1e-6), 1.0),
                                     c.meas_reset_time / pattern_time, true);
        reps[i] = to_odd(toy.phi_opt);
    }

    auto tuples_for = [&](const std::vector<int>& r) {
        std::vector<LayerTuple> ts = base;
        for (size_t i = 0; i < patterns.size(); i++)
            ts.push_back(repeat_pattern(patterns[i], r[i]));
        return ts;
    };
    std::unordered_map<std::string, double> memo;
    auto eval = [&](const std::vector<int>& r) {
        std::string key;
        for (int v : r) key += std::to_string(v) + ",";
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        auto ts = tuples_for(r);
        std::vector<double> gamma = cache.default_gamma(ts);
        double f = warm_merit(cache, ts, gamma, cfg, cfg.warm_grad_steps);
        memo.emplace(std::move(key), f);
        return f;
    };

    double f_cur = eval(reps);
    if (history) history->push_back({"repetition-init", f_cur, ""});
    for (int cycle = 0; cycle < cfg.max_rep_cycles; cycle++) {
        bool improved = false;
        for (size_t i = 0; i < patterns.size(); i++) {
            for (int dir : {+1, -1}) {
                int step = 2;
                while (true) {
                    std::vector<int> trial = reps;
                    trial[i] = to_odd(trial[i] + dir * step);
                    if (trial[i] == reps[i]) break;
                    double f = eval(trial);
                    if (f < f_cur) {
                        reps = trial;
                        f_cur = f;
                        improved = true;
                        step *= 2;  // accelerate while stepping the same way
                        if (history)
                            history->push_back({"repetition-step", f_cur,
                                                patterns[i].str() + " x " +
                                                    std::to_string(reps[i])});
                    } else {
                        break;
                    }
                }
            }
        }
        if (!improved) break;
    }
    return reps;
}

uint32_t zipf_sample(CounterRng& rng, double s, uint32_t u_max) {
    if (u_max < 1) throw std::invalid_argument("zipf support must be non-empty");
    if (std::isinf(s)) return 1;
    double total = 0;
    std::vector<double> cum(u_max);
    for (uint32_t u = 1; u <= u_max; u++) {
        total += std::pow((double)u, -s);
        cum[u - 1] = total;
    }
    double r = rng.uniform() * total;
    return (uint32_t)(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin()) + 1;
}

LayerTuple sample_random_tuple(const Circuit& c, CounterRng& rng) {
    std::vector<int> ids = c.unique_ids();
    auto is_multi = [&](int id) {
        return c.unique_layer(id).layer_class == LayerClass::two_qubit;
    };
    uint32_t u_max = 2 * (uint32_t)c.layers.size();
    uint32_t length = zipf_sample(rng, 1.0, u_max);
    bool mirror = rng.uniform() < 0.5;
    bool multi_copies = rng.uniform() < 0.5;

    auto draw_copies = [&]() -> uint32_t {
        return multi_copies ? zipf_sample(rng, 2.0, std::max(1u, length)) : 1;
    };
    auto fill = [&](std::vector<int>& body, uint32_t target) {
        while (body.size() < target) {
            if (!c.dynamically_decoupled) {
                int id = ids[rng.uniform_int((uint64_t)ids.size())];
                uint32_t k = draw_copies();
                for (uint32_t j = 0; j < k && body.size() < target; j++) body.push_back(id);
            } else {
                // Append index pairs, never placing two multi-qubit layers
                // next to each other; pair repetitions are halved (rounded up).
                int i1 = ids[rng.uniform_int((uint64_t)ids.size())];
                int i2;
                do {
                    i2 = ids[rng.uniform_int((uint64_t)ids.size())];
                } while (is_multi(i1) && is_multi(i2));
                uint32_t k = (draw_copies() + 1) / 2;
                for (uint32_t j = 0; j < k && body.size() < target; j++) {
                    body.push_back(i1);
                    if (body.size() < target) body.push_back(i2);
                }
            }
        }
    };

    for (int attempt = 0; attempt < 10000; attempt++) {
        std::vector<int> entries;
        if (mirror && length >= 3) {
            uint32_t half = (length - 1) / 2;
            std::vector<int> body, tail;
            fill(body, half);
            fill(tail, length - 2 * half);
            entries = body;
            entries.insert(entries.end(), body.rbegin(), body.rend());
            entries.insert(entries.end(), tail.begin(), tail.end());
        } else {
            fill(entries, length);
        }
        if (c.dynamically_decoupled) {
            bool ok = true;
            for (size_t i = 0; i + 1 < entries.size(); i++)
                if (is_multi(entries[i]) && is_multi(entries[i + 1])) ok = false;
            if (!ok) continue;  // re-sample on a constraint violation
        }
        return LayerTuple{std::move(entries)};
    }
    throw std::runtime_error("failed to sample an admissible tuple");
}

ExperimentalDesign optimise_tuple_set(const Circuit& c, const NoiseModel& m,
                                      std::vector<LayerTuple> tuples,
                                      const OptimiserConfig& cfg,
                                      OptimisationHistory* history) {
    cfg.validate();
    DesignCache cache(c, m);
    CounterRng rng(CounterRng::derive(cfg.seed, 0x74756f7074ull));
    int l_target = cfg.resolved_l_set(c);

    std::vector<double> gamma = cache.default_gamma(tuples);
    double f_cur = warm_merit(cache, tuples, gamma, cfg, cfg.warm_grad_steps);
    if (!std::isfinite(f_cur))
        throw std::runtime_error("starting tuple set is not full rank");
    if (history) history->push_back({"start", f_cur, std::to_string(tuples.size()) + " tuples"});

    auto have = [&](const LayerTuple& t) {
        return std::find(tuples.begin(), tuples.end(), t) != tuples.end();
    };

    for (int ex = 0; ex < cfg.n_ex; ex++) {
        // Growth: sample tuples and keep those that reduce the merit.
        long long trials = (long long)cfg.f_trial * (l_target + cfg.l_ex - (long long)tuples.size());
        while ((long long)tuples.size() < l_target + cfg.l_ex && trials > 0) {
            LayerTuple t = sample_random_tuple(c, rng);
            if (have(t)) continue;  // duplicates do not consume a trial
            std::vector<LayerTuple> trial_set = tuples;
            trial_set.push_back(t);
            std::vector<double> trial_gamma = gamma;
            // The existing entries are -log(weight) after warm optimisation;
            // start the candidate at a small weight fraction on that scale
            // (its raw duration would dominate the softmax) and let the warm
            // steps find its level.
            trial_gamma.push_back(-std::log(0.05));
            double f_new = warm_merit(cache, trial_set, trial_gamma, cfg,
                                      cfg.warm_grad_steps);
            if (f_new < f_cur) {
                tuples = std::move(trial_set);
                gamma = std::move(trial_gamma);
                f_cur = f_new;
                if (history) history->push_back({"add", f_cur, t.str()});
            }
            trials--;
        }
        // Shrink: greedily remove while it helps or the set is oversized.
        while (true) {
            double best_f = kInf;
            size_t best_i = tuples.size();
            for (size_t i = 0; i < tuples.size(); i++) {
                std::vector<LayerTuple> trial_set = tuples;
                std::vector<double> trial_gamma = gamma;
                trial_set.erase(trial_set.begin() + i);
                trial_gamma.erase(trial_gamma.begin() + i);
                double f = warm_merit(cache, trial_set, trial_gamma, cfg, 0);
                if (f < best_f) {
                    best_f = f;
                    best_i = i;
                }
            }
            if (best_i == tuples.size()) break;  // nothing removable
            if (best_f < f_cur || (long long)tuples.size() > l_target) {
                if (history) history->push_back({"remove", best_f, tuples[best_i].str()});
                tuples.erase(tuples.begin() + best_i);
                gamma.erase(gamma.begin() + best_i);
                f_cur = warm_merit(cache, tuples, gamma, cfg, cfg.warm_grad_steps);
            } else {
                break;
            }
        }
        if (history)
            history->push_back({"excursion-end", f_cur,
                                std::to_string(tuples.size()) + " tuples"});
    }

    // Final full shot-weight optimisation.
    MeritContext ctx = cache.context(tuples);
    ShotOptimisationResult final =
        optimise_shot_weights(ctx, softmax_weights(gamma), cfg, cfg.max_grad_steps);
    if (history) history->push_back({"final", final.merit, ""});
    return cache.design(tuples, final.weights);
}

ExperimentalDesign optimise_design(const Circuit& c, const NoiseModel& m,
                                   const OptimiserConfig& cfg,
                                   OptimisationHistory* history) {
    cfg.validate();
    std::vector<LayerTuple> patterns = repeated_tuple_patterns(c);
    std::vector<int> reps = optimise_repetitions(c, m, patterns, cfg, history);
    std::vector<LayerTuple> tuples = basic_tuple_set(c);
    for (size_t i = 0; i < patterns.size(); i++)
        tuples.push_back(repeat_pattern(patterns[i], reps[i]));
    return optimise_tuple_set(c, m, std::move(tuples), cfg, history);
}

}  // namespace aces
