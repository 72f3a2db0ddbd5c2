#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <memory>

namespace spo {

using BlockVectors = std::array<Eigen::VectorXd, 4>;

/// Quadratic program in the standardized four-inequality-block form
///
///   min  (1/2) y'Py + q'y   s.t.  G_n y <= h_n,  n = 1..4
///
/// for an N-grid relocation problem with decision dimension N^2.
/// Block roles: G1 = departures vs supply, G2 = travel-time feasibility
/// (diagonal), G3 = incentive budget (single row), G4 = -I (nonnegativity).
struct StandardQP {
    int n_grids = 0;
    int n_flow = 0;  // n_grids^2
    Eigen::SparseMatrix<double> P;
    Eigen::VectorXd q;
    std::array<Eigen::SparseMatrix<double>, 4> G;
    BlockVectors h;
    /// Constant offset such that Z0 = Z1 + objective_offset, with
    /// Z1 = (1/2) y'Py + q'y the vectorized objective.
    double objective_offset = 0.0;

    double objective(const Eigen::VectorXd& y) const;

    /// Per-block constraint residuals G_n y - h_n.
    BlockVectors constraint_residuals(const Eigen::VectorXd& y) const;
};

/// Cached SPD factorization of M = P + rho * sum_n G_n'G_n, shared by every
/// ADMM iteration. Immutable after construction; safe to share read-only
/// across concurrent solves. The rho*G4'G4 = rho*I term keeps M full rank.
///
/// Two backends: when every G block is either diagonal or wide (rows much
/// smaller than cols), M = B + WW' with B = P + diagonal terms sparse and W
/// low rank, and solves go through a sparse Cholesky of B plus a Woodbury
/// correction; otherwise M is built densely and factorized once.
class PenaltySystem {
  public:
    struct Structured {
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> base;  // B
        Eigen::SparseMatrix<double> w;                           // n_flow x k
        Eigen::LLT<Eigen::MatrixXd> cap;                         // I + W'B^-1 W
    };

    PenaltySystem(Eigen::LLT<Eigen::MatrixXd> llt, double rho)
        : rho_(rho), llt_(std::move(llt)) {}
    PenaltySystem(std::shared_ptr<const Structured> structured, double rho)
        : rho_(rho), structured_(std::move(structured)) {}

    double rho() const { return rho_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return solve_impl(rhs); }
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return solve_impl(rhs); }

  private:
    template <typename Rhs>
    Rhs solve_impl(const Rhs& rhs) const {
        if (!structured_) return llt_.solve(rhs);
        Rhs x = structured_->base.solve(rhs);
        const Eigen::MatrixXd t = structured_->cap.solve(structured_->w.transpose() * x);
        x -= structured_->base.solve(Rhs(structured_->w * t));
        return x;
    }

    double rho_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    std::shared_ptr<const Structured> structured_;
};

/// Factorizes M = P + rho * sum_n G_n'G_n. M is built densely (it is
/// structurally dense through the P = A'A blocks) and factorized once;
/// solves reuse the cached triangular factors.
///
/// Throws std::runtime_error naming the matrix if the factorization fails.
PenaltySystem assemble_penalty_system(const StandardQP& qp, double rho);

/// Max-norm optimality residuals of a candidate primal/dual point.
struct KktReport {
    double stationarity = 0.0;        // ||Py + q + sum G_n'mu_n||_inf
    double primal_infeasibility = 0.0; // max_n ||max(0, G_n y - h_n)||_inf
    double complementarity = 0.0;      // max_n ||mu_n .* (G_n y - h_n)||_inf

    double max_residual() const;
};

KktReport kkt_residuals(const StandardQP& qp, const Eigen::VectorXd& y,
                        const BlockVectors& s, const BlockVectors& mu);

}  // namespace spo
