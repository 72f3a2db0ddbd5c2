#pragma once

#include "spo/admm.hpp"
#include "spo/datagen.hpp"
#include "spo/metrics.hpp"
#include "spo/predictor.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace spo {

struct SpoConfig {
    double w1 = 1.0;  // prediction-loss weight
    double w2 = 1.0;  // matching-loss weight
    double learning_rate = 0.01;
    double weight_decay = 0.001;
    int batch_size = 64;
    int epochs = 20;
    int hidden = 8;  // hidden width of the reference predictor
    std::uint64_t seed = 0;
    /// Non-convergent inner solves during training: accept the last iterate
    /// (the truncated-unroll gradient stays well defined) or skip the sample.
    bool accept_last_iterate = true;

    void validate() const;
};

/// Everything that is fixed across samples of one experiment: the grid
/// neighborhood and the constraint data of the relocation QP.
struct Scenario {
    Adjacency adj;
    Eigen::MatrixXd travel_time;
    Eigen::MatrixXd cost;
    double budget = 0.0;
    double interval = 15.0;
};

struct TrainRecord {
    std::vector<double> l1;
    std::vector<double> l2;
    std::vector<double> l_spo;
    std::vector<double> val_rmse;
    std::vector<double> val_smape;
    std::vector<double> mean_solve_iterations;
};

enum class Regime { SPO, PTO, NOP, DON };

struct EvalResult {
    Metrics metrics;
    /// Worst positive constraint residual max(0, G_n y - h_n) over every
    /// evaluated plan and block.
    double max_constraint_violation = 0.0;
    int n_solves = 0;
    int n_nonconverged = 0;
    Eigen::MatrixXd matched_table;  // samples x N
    Eigen::MatrixXd target_table;   // samples x N
};

/// Matching loss ||target - matched||_2^2.
double matching_loss(const Eigen::VectorXd& target, const Eigen::VectorXd& matched);

/// Combined loss w1*l1 + w2*l2.
double spo_loss(double l1, double l2, const SpoConfig& cfg);

/// Combined loss and weight gradient of a single sample, computed exactly
/// as one training step would. Exposed so the full chain (predictor ->
/// QP -> solver -> matching loss) can be differentiated and checked in
/// isolation.
struct SampleLoss {
    double l1 = 0.0;
    double l2 = 0.0;
    double loss = 0.0;  // w1*l1 + w2*l2
    bool converged = true;
    PredictorWeights grad;
};

SampleLoss sample_loss_gradient(const Sample& sample, const Scenario& scenario,
                                const PredictorWeights& weights, const SpoConfig& cfg,
                                const AdmmConfig& admm_cfg);

/// End-to-end training: predict, build the QP, solve with unrolled
/// gradients, and backpropagate the combined loss into the predictor
/// weights with Adagrad. Returns the best-validation weights.
std::pair<PredictorWeights, TrainRecord> train_spo(const DatasetSplits& dataset,
                                                   const Scenario& scenario,
                                                   const SpoConfig& cfg,
                                                   const AdmmConfig& admm_cfg);

/// Two-stage baseline: trains on the prediction loss only (no inner solve);
/// evaluation applies the same QP solve to its forecasts.
std::pair<PredictorWeights, TrainRecord> train_pto(const DatasetSplits& dataset,
                                                   const Scenario& scenario,
                                                   const SpoConfig& cfg);

/// Evaluates one regime on a dataset split. weights may be null for the
/// NOP and DON regimes.
EvalResult evaluate_policy(const PredictorWeights* weights, const std::vector<Sample>& split,
                           const Scenario& scenario, Regime regime, const AdmmConfig& admm_cfg);

}  // namespace spo
