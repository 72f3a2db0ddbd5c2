#pragma once

#include "spo/qp_core.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spo {

/// One time-step relocation problem over N hexagonal grids.
struct RelocationInstance {
    int n_grids = 0;
    Eigen::VectorXd supply;       // current dedicated-vehicle distribution, length N
    Eigen::VectorXd target;       // target all-vehicle distribution, length N
    Eigen::MatrixXd travel_time;  // minutes, N x N, zero diagonal
    Eigen::MatrixXd cost;         // incentive per relocated vehicle, N x N
    double budget = 0.0;          // total incentive budget R
    double interval = 15.0;       // relocation interval delta, minutes

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

/// Flattened relocation flows in origin-major order:
/// y = (x_11, x_12, ..., x_1N | x_21 ... | ... x_NN).
struct FlowPlan {
    Eigen::VectorXd y;  // length N^2
};

/// Row-major (origin-major) flatten of an N x N flow matrix.
Eigen::VectorXd flatten_flows(const Eigen::MatrixXd& x);
Eigen::MatrixXd unflatten_flows(const Eigen::VectorXd& y);

/// Arrival-aggregation matrix: (Ay)_j = sum_i x_ij.
Eigen::SparseMatrix<double> build_sparse_A(int n_grids);

/// Departure-aggregation matrix: (By)_i = sum_j x_ij.
Eigen::SparseMatrix<double> build_sparse_B(int n_grids);

/// Required dedicated-vehicle distribution: target minus predicted free
/// vehicles. Negative entries are preserved; the nonnegativity constraint
/// on flows already prevents negative relocation.
Eigen::VectorXd required_dv_distribution(const Eigen::VectorXd& target,
                                         const Eigen::VectorXd& predicted_free);

/// Vectorizes the relocation problem into the standardized QP:
/// P = A'A, q = -A'*required_dv, G1 = B / h1 = supply,
/// G2 = diag(m - delta) / h2 = 0, G3 = cost' / h3 = R, G4 = -I / h4 = 0.
StandardQP to_standard_qp(const RelocationInstance& inst, const Eigen::VectorXd& required_dv);

/// Post-relocation dedicated-vehicle distribution A*y.
Eigen::VectorXd aggregate_arrivals(const FlowPlan& plan);

/// Combined matching distribution of dedicated plus free vehicles.
Eigen::VectorXd matching_distribution(const Eigen::VectorXd& dv, const Eigen::VectorXd& free);

}  // namespace spo
