#include "spo/gradcheck.hpp"

#include "spo/datagen.hpp"
#include "spo/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace spo {

RelocationInstance random_instance(int n_grids, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> supply_d(0.0, 10.0);
    std::uniform_real_distribution<double> target_d(0.0, 12.0);
    std::uniform_real_distribution<double> time_d(5.0, 25.0);
    std::uniform_real_distribution<double> cost_d(0.5, 2.0);
    std::uniform_real_distribution<double> budget_d(10.0, 60.0);

    RelocationInstance inst;
    inst.n_grids = n_grids;
    inst.supply.resize(n_grids);
    inst.target.resize(n_grids);
    for (int i = 0; i < n_grids; ++i) {
        inst.supply(i) = supply_d(rng);
        inst.target(i) = target_d(rng);
    }
    inst.travel_time.resize(n_grids, n_grids);
    inst.cost.resize(n_grids, n_grids);
    for (int i = 0; i < n_grids; ++i) {
        for (int j = 0; j < n_grids; ++j) {
            inst.travel_time(i, j) = (i == j) ? 0.0 : time_d(rng);
            inst.cost(i, j) = (i == j) ? 0.0 : cost_d(rng);
        }
    }
    inst.budget = budget_d(rng);
    inst.interval = 15.0;
    return inst;
}

Eigen::VectorXd random_prediction(const RelocationInstance& inst, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    Eigen::VectorXd pred(inst.n_grids);
    for (int i = 0; i < inst.n_grids; ++i) pred(i) = d(rng);
    return pred;
}

GradCheckResult check_admm_jacobian(const RelocationInstance& inst,
                                    const Eigen::VectorXd& prediction, const AdmmConfig& cfg,
                                    double eps, double kink_tol) {
    const int n = inst.n_grids;
    const Eigen::VectorXd required = required_dv_distribution(inst.target, prediction);
    StandardQP qp = to_standard_qp(inst, required);
    PenaltySystem system = assemble_penalty_system(qp, cfg.rho);
    const Eigen::SparseMatrix<double> a = build_sparse_A(n);
    const Eigen::MatrixXd dq_dtheta = Eigen::MatrixXd(a.transpose());

    AdmmGradResult base = solve_with_gradients(qp, system, cfg, dq_dtheta);

    GradCheckResult out;
    // Degeneracy: a pre-clamp slack value near 0 sits on the ReLU kink.
    for (int b = 0; b < 4; ++b) {
        const Eigen::VectorXd pre =
            -base.mu[b] / cfg.rho - (qp.G[b] * base.y - qp.h[b]);
        if ((pre.cwiseAbs().array() < kink_tol).any()) {
            out.degenerate = true;
        }
    }

    // Active set at the base point, by sign of the pre-clamp slack.
    std::array<Eigen::Array<bool, Eigen::Dynamic, 1>, 4> base_active;
    for (int b = 0; b < 4; ++b) {
        const Eigen::VectorXd pre =
            -base.mu[b] / cfg.rho - (qp.G[b] * base.y - qp.h[b]);
        base_active[b] = pre.array() > 0.0;
    }

    // The difference quotient amplifies solver truncation error by 1/(2 eps),
    // so the reference solves must be much more accurate than the step size.
    AdmmConfig fd_cfg = cfg;
    fd_cfg.kkt_tol = std::min(1e-8, eps * 1e-4);
    fd_cfg.k_max = std::max(cfg.k_max, 500000);

    auto solve_at = [&](const Eigen::VectorXd& theta) {
        StandardQP pqp = qp;
        pqp.q = -(a.transpose() * required_dv_distribution(inst.target, theta));
        AdmmResult r = solve(pqp, system, fd_cfg);
        // A finite-difference stencil that straddles an active-set change
        // compares two different smooth pieces; flag it instead.
        for (int b = 0; b < 4; ++b) {
            const Eigen::VectorXd pre =
                -r.mu[b] / cfg.rho - (pqp.G[b] * r.y - pqp.h[b]);
            if (((pre.array() > 0.0) != base_active[b]).any()) out.degenerate = true;
        }
        return r.y;
    };

    double max_fd = 1.0;
    Eigen::MatrixXd fd(qp.n_flow, n);
    for (int c = 0; c < n; ++c) {
        Eigen::VectorXd tp = prediction;
        Eigen::VectorXd tm = prediction;
        tp(c) += eps;
        tm(c) -= eps;
        fd.col(c) = (solve_at(tp) - solve_at(tm)) / (2.0 * eps);
    }
    max_fd = std::max(1.0, fd.cwiseAbs().maxCoeff());
    out.max_rel_error = (base.jacobian - fd).cwiseAbs().maxCoeff() / max_fd;
    return out;
}

double check_predictor_vjp(int n_grids, int window, int hidden, std::uint64_t seed,
                           double eps) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 4.0);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);

    const int side = std::max(1, static_cast<int>(std::lround(std::sqrt(double(n_grids)))));
    HexGrid grid = make_hex_grid(side, (n_grids + side - 1) / side);
    // Trim to exactly n_grids via an identity-padded adjacency when the
    // parallelogram overshoots.
    Adjacency adj;
    if (grid.size() == n_grids) {
        adj = Adjacency::from_grid(grid);
    } else {
        adj = Adjacency::identity(n_grids);
    }

    HistoryWindow hist;
    hist.demand.resize(window, n_grids);
    for (int t = 0; t < window; ++t)
        for (int g = 0; g < n_grids; ++g) hist.demand(t, g) = d(rng);
    Eigen::VectorXd upstream(n_grids);
    for (int g = 0; g < n_grids; ++g) upstream(g) = ud(rng);

    PredictorWeights w = PredictorWeights::init(window, hidden, seed + 1);
    const PredictorWeights g = predictor_vjp(hist, adj, w, upstream);

    const Eigen::VectorXd g_flat = g.flat();
    Eigen::VectorXd w_flat = w.flat();
    Eigen::VectorXd fd(g_flat.size());
    for (Eigen::Index i = 0; i < w_flat.size(); ++i) {
        PredictorWeights wp = w, wm = w;
        Eigen::VectorXd vp = w_flat, vm = w_flat;
        vp(i) += eps;
        vm(i) -= eps;
        wp.set_flat(vp);
        wm.set_flat(vm);
        fd(i) = (upstream.dot(predict(hist, adj, wp)) - upstream.dot(predict(hist, adj, wm))) /
                (2.0 * eps);
    }
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    return (g_flat - fd).cwiseAbs().maxCoeff() / scale;
}

}  // namespace spo
