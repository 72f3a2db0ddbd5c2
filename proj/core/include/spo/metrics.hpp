#pragma once

#include <Eigen/Dense>

namespace spo {

/// Divergence summary between matched and target distributions.
struct Metrics {
    double rmse = 0.0;   // vehicles
    double smape = 0.0;  // percent, bounded in [0, 200]
    Eigen::MatrixXd per_grid_abs_divergence;  // intervals x grids
};

double rmse(const Eigen::VectorXd& matched, const Eigen::VectorXd& target);

/// Symmetric mean absolute percentage error in percent. A term with both
/// entries zero contributes 0.
double smape(const Eigen::VectorXd& matched, const Eigen::VectorXd& target);

/// Elementwise |matched - target| for heatmap export.
Eigen::MatrixXd divergence_table(const Eigen::MatrixXd& matched, const Eigen::MatrixXd& target);

}  // namespace spo
