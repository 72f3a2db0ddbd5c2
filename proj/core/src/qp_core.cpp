#include "spo/qp_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spo {

double StandardQP::objective(const Eigen::VectorXd& y) const {
    return 0.5 * y.dot(P * y) + q.dot(y);
}

BlockVectors StandardQP::constraint_residuals(const Eigen::VectorXd& y) const {
    BlockVectors r;
    for (int n = 0; n < 4; ++n) {
        r[n] = G[n] * y - h[n];
    }
    return r;
}

namespace {

bool is_diagonal(const Eigen::SparseMatrix<double>& g) {
    if (g.rows() != g.cols()) return false;
    for (int k = 0; k < g.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(g, k); it; ++it) {
            if (it.row() != it.col() && it.value() != 0.0) return false;
        }
    }
    return true;
}

// Structured backend: applicable when every block is diagonal (absorbed into
// the sparse base B = P + rho*sum diag^2) or wide (stacked into the low-rank
// W term). Returns nullptr when the shape test or the B factorization fails;
// the caller then falls back to the dense path.
std::shared_ptr<const PenaltySystem::Structured> try_structured(const StandardQP& qp,
                                                                double rho) {
    const int n = qp.n_flow;
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    std::vector<const Eigen::SparseMatrix<double>*> wide;
    int k_total = 0;
    for (int k = 0; k < 4; ++k) {
        const auto& g = qp.G[k];
        if (is_diagonal(g)) {
            delta.array() += rho * Eigen::VectorXd(g.diagonal()).array().square();
        } else if (4 * g.rows() <= g.cols()) {
            wide.push_back(&g);
            k_total += static_cast<int>(g.rows());
        } else {
            return nullptr;
        }
    }

    auto s = std::make_shared<PenaltySystem::Structured>();
    Eigen::SparseMatrix<double> base = qp.P;
    {
        Eigen::SparseMatrix<double> d(n, n);
        d.reserve(n);
        for (int i = 0; i < n; ++i) d.insert(i, i) = delta(i);
        d.makeCompressed();
        base += d;
    }
    s->base.compute(base);
    if (s->base.info() != Eigen::Success) return nullptr;

    const double sqrt_rho = std::sqrt(rho);
    std::vector<Eigen::Triplet<double>> trips;
    int col0 = 0;
    for (const auto* g : wide) {
        for (int k = 0; k < g->outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(*g, k); it; ++it) {
                trips.emplace_back(static_cast<int>(it.col()),
                                   col0 + static_cast<int>(it.row()),
                                   sqrt_rho * it.value());
            }
        }
        col0 += static_cast<int>(g->rows());
    }
    s->w.resize(n, k_total);
    s->w.setFromTriplets(trips.begin(), trips.end());

    const Eigen::MatrixXd cap = Eigen::MatrixXd::Identity(k_total, k_total) +
                                s->w.transpose() * s->base.solve(Eigen::MatrixXd(s->w));
    s->cap.compute(cap);
    if (s->cap.info() != Eigen::Success) return nullptr;
    return s;
}

}  // namespace

PenaltySystem assemble_penalty_system(const StandardQP& qp, double rho) {
    if (rho <= 0.0) {
        throw std::invalid_argument("assemble_penalty_system: rho must be positive");
    }
    const int n = qp.n_flow;
    if (qp.P.rows() != n || qp.P.cols() != n || qp.q.size() != n) {
        throw std::invalid_argument("assemble_penalty_system: inconsistent qp dimensions");
    }
    for (int k = 0; k < 4; ++k) {
        if (qp.G[k].cols() != n) {
            throw std::invalid_argument("assemble_penalty_system: G block column mismatch");
        }
    }
    if (auto structured = try_structured(qp, rho)) {
        return PenaltySystem(std::move(structured), rho);
    }
    Eigen::MatrixXd m = Eigen::MatrixXd(qp.P);
    for (int k = 0; k < 4; ++k) {
        const auto& g = qp.G[k];
        m += rho * Eigen::MatrixXd(Eigen::SparseMatrix<double>(g.transpose() * g));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error(
            "assemble_penalty_system: Cholesky factorization of M = P + rho*sum G'G failed "
            "(matrix not SPD)");
    }
    return PenaltySystem(std::move(llt), rho);
}

double KktReport::max_residual() const {
    return std::max({stationarity, primal_infeasibility, complementarity});
}

KktReport kkt_residuals(const StandardQP& qp, const Eigen::VectorXd& y,
                        const BlockVectors& /*s*/, const BlockVectors& mu) {
    KktReport rep;
    Eigen::VectorXd stat = qp.P * y + qp.q;
    for (int n = 0; n < 4; ++n) {
        stat += qp.G[n].transpose() * mu[n];
        Eigen::VectorXd viol = (qp.G[n] * y - qp.h[n]).cwiseMax(0.0);
        if (viol.size() > 0) {
            rep.primal_infeasibility =
                std::max(rep.primal_infeasibility, viol.lpNorm<Eigen::Infinity>());
        }
        Eigen::VectorXd comp = mu[n].cwiseProduct(qp.G[n] * y - qp.h[n]).cwiseAbs();
        if (comp.size() > 0) {
            rep.complementarity = std::max(rep.complementarity, comp.lpNorm<Eigen::Infinity>());
        }
    }
    rep.stationarity = stat.lpNorm<Eigen::Infinity>();
    return rep;
}

}  // namespace spo
