#include "spo/admm.hpp"

#include <cmath>
#include <stdexcept>

namespace spo {

void AdmmConfig::validate() const {
    if (rho <= 0) throw std::invalid_argument("AdmmConfig: rho must be > 0");
    if (xi <= 0) throw std::invalid_argument("AdmmConfig: xi must be > 0");
    if (k_max < 1) throw std::invalid_argument("AdmmConfig: k_max must be >= 1");
}

AdmmState init_state(const StandardQP& qp) {
    AdmmState st;
    st.y = Eigen::VectorXd::Zero(qp.n_flow);
    for (int n = 0; n < 4; ++n) {
        st.s[n] = qp.h[n].cwiseMax(0.0);
        st.mu[n] = Eigen::VectorXd::Zero(qp.h[n].size());
    }
    st.k = 0;
    st.z = 0.0;
    return st;
}

JacobianState init_jacobians(const StandardQP& qp, int n_theta) {
    JacobianState js;
    js.j_y = Eigen::MatrixXd::Zero(qp.n_flow, n_theta);
    for (int n = 0; n < 4; ++n) {
        js.j_s[n] = Eigen::MatrixXd::Zero(qp.h[n].size(), n_theta);
        js.j_mu[n] = Eigen::MatrixXd::Zero(qp.h[n].size(), n_theta);
    }
    return js;
}

Eigen::VectorXd primal_update(const AdmmState& state, const PenaltySystem& system,
                              const StandardQP& qp) {
    const double rho = system.rho();
    Eigen::VectorXd rhs = -qp.q;
    for (int n = 0; n < 4; ++n) {
        rhs -= qp.G[n].transpose() * (rho * (state.s[n] - qp.h[n]) + state.mu[n]);
    }
    return system.solve(rhs);
}

BlockVectors slack_update(const AdmmState& state, const Eigen::VectorXd& y_next,
                          const StandardQP& qp, double rho) {
    BlockVectors s;
    for (int n = 0; n < 4; ++n) {
        s[n] = (-state.mu[n] / rho - (qp.G[n] * y_next - qp.h[n])).cwiseMax(0.0);
    }
    return s;
}

BlockVectors dual_update(const AdmmState& state, const Eigen::VectorXd& y_next,
                         const BlockVectors& s_next, const StandardQP& qp, double rho) {
    BlockVectors mu;
    for (int n = 0; n < 4; ++n) {
        mu[n] = state.mu[n] + rho * (qp.G[n] * y_next + s_next[n] - qp.h[n]);
    }
    return mu;
}

JacobianState jacobian_step(const JacobianState& jstate, const BlockVectors& s_next,
                            const StandardQP& qp, const PenaltySystem& system,
                            const Eigen::MatrixXd& dq_dtheta) {
    const double rho = system.rho();
    Eigen::MatrixXd rhs = -dq_dtheta;
    for (int n = 0; n < 4; ++n) {
        rhs -= qp.G[n].transpose() * (rho * jstate.j_s[n] + jstate.j_mu[n]);
    }
    JacobianState next;
    next.j_y = system.solve(rhs);
    for (int n = 0; n < 4; ++n) {
        // Row-wise 0/1 mask from the post-update slack sign; subgradient at
        // an exact zero is taken as 0.
        next.j_s[n] = -(jstate.j_mu[n] + rho * (qp.G[n] * next.j_y)) / rho;
        for (Eigen::Index r = 0; r < s_next[n].size(); ++r) {
            if (!(s_next[n](r) > 0.0)) {
                next.j_s[n].row(r).setZero();
            }
        }
        next.j_mu[n] = jstate.j_mu[n] + rho * (qp.G[n] * next.j_y + next.j_s[n]);
    }
    return next;
}

namespace {

// Shared driver for solve(), solve_with_gradients(), and solve_traced().
AdmmGradResult run_admm(const StandardQP& qp, const PenaltySystem& system, const AdmmConfig& cfg,
                        const Eigen::MatrixXd* dq_dtheta, AdmmTrace* trace) {
    cfg.validate();
    AdmmState st = init_state(qp);
    JacobianState js;
    if (dq_dtheta != nullptr) {
        js = init_jacobians(qp, static_cast<int>(dq_dtheta->cols()));
    }
    if (trace != nullptr) trace->clear();

    AdmmGradResult res;
    res.converged = false;
    double z_prev = st.z;
    while (st.k < cfg.k_max) {
        Eigen::VectorXd y_next = primal_update(st, system, qp);
        BlockVectors s_next = slack_update(st, y_next, qp, cfg.rho);
        BlockVectors mu_next = dual_update(st, y_next, s_next, qp, cfg.rho);
        if (dq_dtheta != nullptr) {
            js = jacobian_step(js, s_next, qp, system, *dq_dtheta);
        }
        if (trace != nullptr) {
            BlockVectors masks;
            for (int n = 0; n < 4; ++n) {
                masks[n] = (s_next[n].array() > 0.0).cast<double>().matrix();
            }
            trace->push_back(std::move(masks));
        }
        st.y = std::move(y_next);
        st.s = std::move(s_next);
        st.mu = std::move(mu_next);
        st.z = qp.objective(st.y);
        ++st.k;
        if (std::abs(st.z - z_prev) < cfg.xi) {
            // The KKT residual is only evaluated once the objective has
            // stagnated; it is the more expensive check.
            if (cfg.kkt_tol <= 0.0 ||
                kkt_residuals(qp, st.y, st.s, st.mu).max_residual() <= cfg.kkt_tol) {
                res.converged = true;
                break;
            }
        }
        z_prev = st.z;
    }

    res.y = st.y;
    res.s = st.s;
    res.mu = st.mu;
    res.iterations = st.k;
    res.objective = st.z;
    res.kkt = kkt_residuals(qp, st.y, st.s, st.mu);
    if (dq_dtheta != nullptr) {
        res.jacobian = js.j_y;
    }
    return res;
}

}  // namespace

AdmmResult solve(const StandardQP& qp, const PenaltySystem& system, const AdmmConfig& cfg) {
    return run_admm(qp, system, cfg, nullptr, nullptr);
}

AdmmResult solve(const StandardQP& qp, const AdmmConfig& cfg) {
    PenaltySystem system = assemble_penalty_system(qp, cfg.rho);
    return solve(qp, system, cfg);
}

AdmmGradResult solve_with_gradients(const StandardQP& qp, const PenaltySystem& system,
                                    const AdmmConfig& cfg, const Eigen::MatrixXd& dq_dtheta) {
    if (dq_dtheta.rows() != qp.n_flow) {
        throw std::invalid_argument("solve_with_gradients: dq_dtheta row mismatch");
    }
    return run_admm(qp, system, cfg, &dq_dtheta, nullptr);
}

AdmmGradResult solve_with_gradients(const StandardQP& qp, const AdmmConfig& cfg,
                                    const Eigen::MatrixXd& dq_dtheta) {
    PenaltySystem system = assemble_penalty_system(qp, cfg.rho);
    return solve_with_gradients(qp, system, cfg, dq_dtheta);
}

AdmmResult solve_traced(const StandardQP& qp, const PenaltySystem& system,
                        const AdmmConfig& cfg, AdmmTrace& trace_out) {
    return run_admm(qp, system, cfg, nullptr, &trace_out);
}

Eigen::VectorXd reverse_loss_gradient(const StandardQP& qp, const PenaltySystem& system,
                                      const AdmmTrace& trace, const Eigen::VectorXd& dl_dy,
                                      const Eigen::MatrixXd& dq_dtheta) {
    if (dl_dy.size() != qp.n_flow || dq_dtheta.rows() != qp.n_flow) {
        throw std::invalid_argument("reverse_loss_gradient: shape mismatch");
    }
    const double rho = system.rho();

    // Adjoints of (J_y, J_s, J_mu) w.r.t. the final J_y' * dl_dy.
    Eigen::VectorXd lam_y = dl_dy;
    BlockVectors lam_s, lam_mu;
    for (int n = 0; n < 4; ++n) {
        lam_s[n] = Eigen::VectorXd::Zero(qp.h[n].size());
        lam_mu[n] = Eigen::VectorXd::Zero(qp.h[n].size());
    }
    Eigen::VectorXd dq_accum = Eigen::VectorXd::Zero(qp.n_flow);

    for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
        const BlockVectors& mask = *it;
        // Forward (per block): u = J_mu_prev + rho G J_y;
        // J_s = -mask .* u / rho;  J_mu = u + rho J_s.
        BlockVectors lam_u;
        for (int n = 0; n < 4; ++n) {
            lam_s[n] += rho * lam_mu[n];
            lam_u[n] = lam_mu[n] - mask[n].cwiseProduct(lam_s[n]) / rho;
            lam_y += rho * (qp.G[n].transpose() * lam_u[n]);
        }
        // J_y = -M^{-1} (dq + sum G' t1), t1 = rho J_s_prev + J_mu_prev.
        const Eigen::VectorXd lam_rhs = system.solve(lam_y);
        dq_accum -= lam_rhs;
        lam_y.setZero();
        for (int n = 0; n < 4; ++n) {
            const Eigen::VectorXd lam_t1 = -(qp.G[n] * lam_rhs);
            lam_s[n] = rho * lam_t1;
            lam_mu[n] = lam_u[n] + lam_t1;
        }
    }
    return dq_dtheta.transpose() * dq_accum;
}

Eigen::VectorXd chain_loss_gradient(const Eigen::VectorXd& dl_dy, const Eigen::MatrixXd& j_y) {
    if (dl_dy.size() != j_y.rows()) {
        throw std::invalid_argument("chain_loss_gradient: shape mismatch");
    }
    return j_y.transpose() * dl_dy;
}

}  // namespace spo
