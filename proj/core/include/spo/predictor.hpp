#pragma once

#include "spo/datagen.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace spo {

/// Historical free-vehicle observations over the past m intervals; rows are
/// intervals oldest-first, columns are grids.
struct HistoryWindow {
    Eigen::MatrixXd demand;  // m x N

    int window() const { return static_cast<int>(demand.rows()); }
    int n_grids() const { return static_cast<int>(demand.cols()); }
};

/// Symmetric neighbor lists with self-loops, used for 1-hop smoothing.
struct Adjacency {
    std::vector<std::vector<int>> neighbors;  // each list includes the grid itself

    int size() const { return static_cast<int>(neighbors.size()); }

    static Adjacency from_grid(const HexGrid& grid);
    static Adjacency identity(int n_grids);
};

/// Weights of the reference predictor: two stacked blocks of
/// {1-hop neighborhood averaging -> affine map over the time axis -> ReLU},
/// shared across grids.
struct PredictorWeights {
    Eigen::MatrixXd w1;      // hidden x window
    Eigen::VectorXd b1;      // hidden
    Eigen::RowVectorXd w2;   // 1 x hidden
    double b2 = 0.0;

    int hidden() const { return static_cast<int>(w1.rows()); }
    int window() const { return static_cast<int>(w1.cols()); }
    int n_weights() const;

    /// Uniform init in [-r, r], r = fan_in^(-1/2), fixed seed.
    static PredictorWeights init(int window, int hidden, std::uint64_t seed);

    // In-place linear algebra over the flat weight vector, used by the trainer.
    void axpy(double alpha, const PredictorWeights& g);
    void scale(double alpha);
    PredictorWeights zeros_like() const;
    Eigen::VectorXd flat() const;
    void set_flat(const Eigen::VectorXd& v);
};

/// Next-interval free-vehicle forecast, nonnegative by the outer ReLU.
Eigen::VectorXd predict(const HistoryWindow& hist, const Adjacency& adj,
                        const PredictorWeights& w);

/// Prediction loss ||actual - pred||_2^2 (sum of squares, no averaging).
double prediction_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);

/// Gradient of upstream' * predict(...) with respect to every weight.
/// ReLU subgradient at a kink is 0.
PredictorWeights predictor_vjp(const HistoryWindow& hist, const Adjacency& adj,
                               const PredictorWeights& w, const Eigen::VectorXd& upstream);

/// Naive persistence forecast: the last row of the window.
Eigen::VectorXd persistence_predict(const HistoryWindow& hist);

}  // namespace spo
