#pragma once

#include "spo/qp_core.hpp"
#include "spo/relocation.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace spo {

struct AdmmConfig {
    double rho = 2.0;    // augmented-Lagrangian penalty
    double xi = 0.05;    // stop when |Z_{k+1} - Z_k| < xi
    int k_max = 2000;    // iteration cap; exceeding it flags NonConvergence
    /// Optional accuracy coupling: when > 0, stopping additionally requires
    /// the max KKT residual to be <= kkt_tol. Objective stagnation alone can
    /// leave the iterate far from optimality; solves whose output feeds
    /// evaluation or gradient checks should set this. 0 disables the check
    /// and stops on objective change only.
    double kkt_tol = 0.0;

    void validate() const;
};

/// Primal/slack/dual iterates of the alternating update.
struct AdmmState {
    Eigen::VectorXd y;
    BlockVectors s;
    BlockVectors mu;
    int k = 0;
    double z = 0.0;  // objective Z1 at the current iterate
};

/// Parameter Jacobians d(iterate)/d(theta) carried across unrolled layers,
/// theta being the N-dimensional predicted free-vehicle distribution.
struct JacobianState {
    Eigen::MatrixXd j_y;                 // N^2 x N
    std::array<Eigen::MatrixXd, 4> j_s;  // block rows x N
    std::array<Eigen::MatrixXd, 4> j_mu;
};

struct AdmmResult {
    Eigen::VectorXd y;
    BlockVectors s;
    BlockVectors mu;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;  // Z1 at the returned iterate
    KktReport kkt;
};

struct AdmmGradResult : AdmmResult {
    Eigen::MatrixXd jacobian;  // dy*/dtheta, N^2 x N
};

/// y = 0, s_n = max(0, h_n), mu_n = 0.
AdmmState init_state(const StandardQP& qp);

/// All-zero Jacobians with the block shapes of qp and theta dimension n_theta.
JacobianState init_jacobians(const StandardQP& qp, int n_theta);

/// Minimizer of the augmented Lagrangian in y at the current slacks/duals:
/// solves M y = -(q + sum_n rho G_n'(s_n - h_n) + sum_n G_n' mu_n).
Eigen::VectorXd primal_update(const AdmmState& state, const PenaltySystem& system,
                              const StandardQP& qp);

/// s_n <- max(0, -mu_n/rho - (G_n y_next - h_n)).
BlockVectors slack_update(const AdmmState& state, const Eigen::VectorXd& y_next,
                          const StandardQP& qp, double rho);

/// mu_n <- mu_n + rho (G_n y_next + s_next_n - h_n).
BlockVectors dual_update(const AdmmState& state, const Eigen::VectorXd& y_next,
                         const BlockVectors& s_next, const StandardQP& qp, double rho);

/// One Jacobian sweep run in lockstep with the forward updates of the same
/// iteration: j_y uses the carried-in j_s/j_mu, the slack Jacobian uses the
/// fresh j_y and the post-update slack sign mask, the dual Jacobian uses both.
JacobianState jacobian_step(const JacobianState& jstate, const BlockVectors& s_next,
                            const StandardQP& qp, const PenaltySystem& system,
                            const Eigen::MatrixXd& dq_dtheta);

/// ADMM to convergence on the objective-change criterion. A non-convergent
/// run returns the last iterate flagged converged = false, never throws.
AdmmResult solve(const StandardQP& qp, const PenaltySystem& system, const AdmmConfig& cfg);
AdmmResult solve(const StandardQP& qp, const AdmmConfig& cfg);

/// Forward pass and Jacobian recursion in lockstep over the same K layers.
AdmmGradResult solve_with_gradients(const StandardQP& qp, const PenaltySystem& system,
                                    const AdmmConfig& cfg, const Eigen::MatrixXd& dq_dtheta);
AdmmGradResult solve_with_gradients(const StandardQP& qp, const AdmmConfig& cfg,
                                    const Eigen::MatrixXd& dq_dtheta);

/// Chain rule through the layer: returns J_y' * dL_dy.
Eigen::VectorXd chain_loss_gradient(const Eigen::VectorXd& dl_dy, const Eigen::MatrixXd& j_y);

/// Per-iteration 0/1 slack masks recorded during a forward solve, enough to
/// replay the unrolled recursion in reverse.
using AdmmTrace = std::vector<BlockVectors>;

/// Forward solve that records the slack sign mask of every iteration.
AdmmResult solve_traced(const StandardQP& qp, const PenaltySystem& system,
                        const AdmmConfig& cfg, AdmmTrace& trace_out);

/// Reverse-mode counterpart of the unrolled Jacobian recursion: returns
/// J_y' * dl_dy without forming J_y, propagating a single adjoint vector
/// backward through the recorded iterations. Matches
/// chain_loss_gradient(dl_dy, solve_with_gradients(...).jacobian) to
/// round-off; used on the training path where only the loss gradient is
/// needed.
Eigen::VectorXd reverse_loss_gradient(const StandardQP& qp, const PenaltySystem& system,
                                      const AdmmTrace& trace, const Eigen::VectorXd& dl_dy,
                                      const Eigen::MatrixXd& dq_dtheta);

}  // namespace spo
