#include "spo/spo_train.hpp"

#include "spo/relocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spo {

void SpoConfig::validate() const {
    if (w1 < 0 || w2 < 0 || (w1 == 0 && w2 == 0)) {
        throw std::invalid_argument("SpoConfig: w1, w2 must be >= 0 and not both 0");
    }
    if (learning_rate < 0) throw std::invalid_argument("SpoConfig: learning_rate must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("SpoConfig: batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("SpoConfig: epochs must be >= 0");
}

double matching_loss(const Eigen::VectorXd& target, const Eigen::VectorXd& matched) {
    if (target.size() != matched.size()) {
        throw std::invalid_argument("matching_loss: length mismatch");
    }
    return (target - matched).squaredNorm();
}

double spo_loss(double l1, double l2, const SpoConfig& cfg) {
    return cfg.w1 * l1 + cfg.w2 * l2;
}

namespace {

RelocationInstance make_instance(const Scenario& scenario, const Eigen::VectorXd& supply,
                                 const Eigen::VectorXd& target) {
    RelocationInstance inst;
    inst.n_grids = static_cast<int>(supply.size());
    inst.supply = supply;
    inst.target = target;
    inst.travel_time = scenario.travel_time;
    inst.cost = scenario.cost;
    inst.budget = scenario.budget;
    inst.interval = scenario.interval;
    return inst;
}

// P and G depend only on topology and rho; q and h1 vary per sample.
struct SharedQp {
    StandardQP qp;
    Eigen::SparseMatrix<double> a;
    Eigen::MatrixXd dq_dtheta;  // A', dense

    explicit SharedQp(const Scenario& scenario, const Sample& first) {
        RelocationInstance inst = make_instance(scenario, first.supply, first.target);
        qp = to_standard_qp(inst, Eigen::VectorXd::Zero(inst.n_grids));
        a = build_sparse_A(inst.n_grids);
        dq_dtheta = Eigen::MatrixXd(a.transpose());
    }

    void bind(const Eigen::VectorXd& supply, const Eigen::VectorXd& required_dv) {
        qp.q = -(a.transpose() * required_dv);
        qp.h[0] = supply;
        qp.objective_offset = 0.5 * required_dv.squaredNorm();
    }
};

struct AdagradOptimizer {
    Eigen::VectorXd accum;
    double lr;
    double eps = 1e-10;

    AdagradOptimizer(int n, double learning_rate) : accum(Eigen::VectorXd::Zero(n)), lr(learning_rate) {}

    void step(PredictorWeights& w, const PredictorWeights& grad) {
        Eigen::VectorXd g = grad.flat();
        accum.array() += g.array().square();
        Eigen::VectorXd wv = w.flat();
        wv.array() -= lr * g.array() / (accum.array().sqrt() + eps);
        w.set_flat(wv);
    }
};

struct PerSampleGrad {
    double l1 = 0.0;
    double l2 = 0.0;
    long iterations = 0;
    bool solved = false;
    bool converged = true;
    PredictorWeights grad;
};

// Loss and weight gradient of one sample. When w2 = 0 the inner solve is
// skipped entirely and only the prediction path contributes.
PerSampleGrad sample_gradient(const Sample& sample, const Scenario& scenario,
                              const PredictorWeights& w, const SpoConfig& cfg,
                              const AdmmConfig& admm_cfg, SharedQp& shared,
                              const PenaltySystem* system) {
    PerSampleGrad out;
    HistoryWindow hist{sample.history};
    const Eigen::VectorXd pred = predict(hist, scenario.adj, w);
    out.l1 = prediction_loss(pred, sample.free_next);

    Eigen::VectorXd upstream = cfg.w1 * 2.0 * (pred - sample.free_next);

    if (cfg.w2 > 0.0) {
        const Eigen::VectorXd required = required_dv_distribution(sample.target, pred);
        shared.bind(sample.supply, required);
        // The training path only needs the loss gradient, not the full
        // Jacobian, so the unrolled recursion is run in reverse over the
        // recorded slack masks (one adjoint vector instead of N columns).
        AdmmTrace trace;
        AdmmResult res = solve_traced(shared.qp, *system, admm_cfg, trace);
        out.iterations = res.iterations;
        out.solved = true;
        out.converged = res.converged;
        if (!res.converged && !cfg.accept_last_iterate) {
            out.grad = w.zeros_like();
            return out;
        }
        const Eigen::VectorXd dv = aggregate_arrivals(FlowPlan{res.y});
        const Eigen::VectorXd matched = matching_distribution(dv, sample.free_next);
        out.l2 = matching_loss(sample.target, matched);
        const Eigen::VectorXd dl2_d_da = 2.0 * (matched - sample.target);
        const Eigen::VectorXd dl2_dy = shared.a.transpose() * dl2_d_da;
        upstream +=
            cfg.w2 * reverse_loss_gradient(shared.qp, *system, trace, dl2_dy, shared.dq_dtheta);
    }

    out.grad = predictor_vjp(hist, scenario.adj, w, upstream);
    return out;
}

std::pair<PredictorWeights, TrainRecord> train_impl(const DatasetSplits& dataset,
                                                    const Scenario& scenario,
                                                    const SpoConfig& cfg,
                                                    const AdmmConfig& admm_cfg) {
    cfg.validate();
    admm_cfg.validate();
    if (dataset.train.empty()) throw std::invalid_argument("train: empty training split");

    const int window = static_cast<int>(dataset.train.front().history.rows());
    PredictorWeights w = PredictorWeights::init(window, cfg.hidden, cfg.seed);
    AdagradOptimizer opt(w.n_weights(), cfg.learning_rate);

    SharedQp shared(scenario, dataset.train.front());
    PenaltySystem system = assemble_penalty_system(shared.qp, admm_cfg.rho);

    TrainRecord rec;
    PredictorWeights best = w;
    double best_val = std::numeric_limits<double>::infinity();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double sum_l1 = 0.0, sum_l2 = 0.0;
        long sum_iters = 0;
        int n_solves = 0;

        std::size_t i = 0;
        while (i < dataset.train.size()) {
            const std::size_t end =
                std::min(i + static_cast<std::size_t>(cfg.batch_size), dataset.train.size());
            PredictorWeights grad = w.zeros_like();
            int used = 0;
            for (std::size_t s = i; s < end; ++s) {
                PerSampleGrad g = sample_gradient(dataset.train[s], scenario, w, cfg,
                                                  admm_cfg, shared, &system);
                sum_l1 += g.l1;
                sum_l2 += g.l2;
                if (g.solved) {
                    sum_iters += g.iterations;
                    ++n_solves;
                }
                if (g.solved && !g.converged && !cfg.accept_last_iterate) continue;
                grad.axpy(1.0, g.grad);
                ++used;
            }
            if (used > 0) {
                grad.scale(1.0 / static_cast<double>(used));
                if (cfg.weight_decay > 0.0) grad.axpy(cfg.weight_decay, w);
                opt.step(w, grad);
            }
            i = end;
        }

        const double n_train = static_cast<double>(dataset.train.size());
        rec.l1.push_back(sum_l1 / n_train);
        rec.l2.push_back(sum_l2 / n_train);
        rec.l_spo.push_back(spo_loss(rec.l1.back(), rec.l2.back(), cfg));
        rec.mean_solve_iterations.push_back(
            n_solves > 0 ? static_cast<double>(sum_iters) / n_solves : 0.0);

        if (!dataset.val.empty()) {
            Metrics val;
            if (cfg.w2 > 0.0) {
                val = evaluate_policy(&w, dataset.val, scenario, Regime::SPO, admm_cfg).metrics;
            } else {
                // Prediction-only training selects on forecast accuracy; no
                // solves are needed.
                double sr = 0.0, ss = 0.0;
                for (const Sample& sample : dataset.val) {
                    const Eigen::VectorXd p =
                        predict(HistoryWindow{sample.history}, scenario.adj, w);
                    sr += rmse(p, sample.free_next);
                    ss += smape(p, sample.free_next);
                }
                val.rmse = sr / static_cast<double>(dataset.val.size());
                val.smape = ss / static_cast<double>(dataset.val.size());
            }
            rec.val_rmse.push_back(val.rmse);
            rec.val_smape.push_back(val.smape);
            if (val.rmse < best_val) {
                best_val = val.rmse;
                best = w;
            }
        } else {
            rec.val_rmse.push_back(0.0);
            rec.val_smape.push_back(0.0);
            best = w;
        }
    }
    if (cfg.epochs == 0 || dataset.val.empty()) best = w;
    return {best, rec};
}

}  // namespace

SampleLoss sample_loss_gradient(const Sample& sample, const Scenario& scenario,
                                const PredictorWeights& weights, const SpoConfig& cfg,
                                const AdmmConfig& admm_cfg) {
    cfg.validate();
    admm_cfg.validate();
    SharedQp shared(scenario, sample);
    PenaltySystem system = assemble_penalty_system(shared.qp, admm_cfg.rho);
    PerSampleGrad g = sample_gradient(sample, scenario, weights, cfg, admm_cfg, shared, &system);
    SampleLoss out;
    out.l1 = g.l1;
    out.l2 = g.l2;
    out.loss = spo_loss(g.l1, g.l2, cfg);
    out.converged = g.converged;
    out.grad = g.grad;
    return out;
}

std::pair<PredictorWeights, TrainRecord> train_spo(const DatasetSplits& dataset,
                                                   const Scenario& scenario,
                                                   const SpoConfig& cfg,
                                                   const AdmmConfig& admm_cfg) {
    return train_impl(dataset, scenario, cfg, admm_cfg);
}

std::pair<PredictorWeights, TrainRecord> train_pto(const DatasetSplits& dataset,
                                                   const Scenario& scenario,
                                                   const SpoConfig& cfg) {
    SpoConfig pto_cfg = cfg;
    pto_cfg.w2 = 0.0;
    if (pto_cfg.w1 == 0.0) pto_cfg.w1 = 1.0;
    return train_impl(dataset, scenario, pto_cfg, AdmmConfig{});
}

EvalResult evaluate_policy(const PredictorWeights* weights, const std::vector<Sample>& split,
                           const Scenario& scenario, Regime regime,
                           const AdmmConfig& admm_cfg) {
    if (split.empty()) throw std::invalid_argument("evaluate_policy: empty split");
    if ((regime == Regime::SPO || regime == Regime::PTO) && weights == nullptr) {
        throw std::invalid_argument("evaluate_policy: trained regimes require weights");
    }

    const int n = static_cast<int>(split.front().supply.size());
    EvalResult out;
    out.matched_table.resize(static_cast<Eigen::Index>(split.size()), n);
    out.target_table.resize(static_cast<Eigen::Index>(split.size()), n);

    SharedQp shared(scenario, split.front());
    PenaltySystem system = assemble_penalty_system(shared.qp, admm_cfg.rho);

    double sum_rmse = 0.0, sum_smape = 0.0;
    int used = 0;
    Eigen::Index row = 0;
    for (const Sample& sample : split) {
        Eigen::VectorXd matched;
        if (regime == Regime::DON) {
            // Dedicated vehicles stay put.
            matched = matching_distribution(sample.supply, sample.free_next);
        } else {
            Eigen::VectorXd forecast;
            if (regime == Regime::NOP) {
                forecast = persistence_predict(HistoryWindow{sample.history});
            } else {
                forecast = predict(HistoryWindow{sample.history}, scenario.adj, *weights);
            }
            const Eigen::VectorXd required = required_dv_distribution(sample.target, forecast);
            shared.bind(sample.supply, required);
            AdmmResult res = solve(shared.qp, system, admm_cfg);
            ++out.n_solves;
            if (!res.converged) {
                ++out.n_nonconverged;
                continue;  // non-convergent solves are skipped at evaluation
            }
            for (int b = 0; b < 4; ++b) {
                const Eigen::VectorXd viol =
                    (shared.qp.G[b] * res.y - shared.qp.h[b]).cwiseMax(0.0);
                out.max_constraint_violation =
                    std::max(out.max_constraint_violation, viol.lpNorm<Eigen::Infinity>());
            }
            const Eigen::VectorXd dv = aggregate_arrivals(FlowPlan{res.y});
            matched = matching_distribution(dv, sample.free_next);
        }
        sum_rmse += rmse(matched, sample.target);
        sum_smape += smape(matched, sample.target);
        out.matched_table.row(row) = matched.transpose();
        out.target_table.row(row) = sample.target.transpose();
        ++row;
        ++used;
    }
    if (used == 0) throw std::runtime_error("evaluate_policy: every solve failed to converge");
    out.matched_table.conservativeResize(row, n);
    out.target_table.conservativeResize(row, n);
    out.metrics.rmse = sum_rmse / used;
    out.metrics.smape = sum_smape / used;
    out.metrics.per_grid_abs_divergence = divergence_table(out.matched_table, out.target_table);
    return out;
}

}  // namespace spo
