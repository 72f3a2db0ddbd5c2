#include "spo/relocation.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spo {

void RelocationInstance::validate() const {
    if (n_grids < 1) throw std::invalid_argument("RelocationInstance: n_grids must be >= 1");
    const int n = n_grids;
    if (supply.size() != n || target.size() != n) {
        throw std::invalid_argument("RelocationInstance: supply/target length mismatch");
    }
    if (travel_time.rows() != n || travel_time.cols() != n || cost.rows() != n ||
        cost.cols() != n) {
        throw std::invalid_argument("RelocationInstance: matrix dimension mismatch");
    }
    if ((supply.array() < 0).any()) {
        throw std::invalid_argument("RelocationInstance: supply must be nonnegative");
    }
    if ((travel_time.array() < 0).any() || (cost.array() < 0).any()) {
        throw std::invalid_argument("RelocationInstance: travel_time/cost must be nonnegative");
    }
    if (budget < 0) throw std::invalid_argument("RelocationInstance: budget must be >= 0");
    if (interval <= 0) throw std::invalid_argument("RelocationInstance: interval must be > 0");
    for (int i = 0; i < n; ++i) {
        if (travel_time(i, i) != 0.0) {
            throw std::invalid_argument("RelocationInstance: travel_time diagonal must be 0");
        }
    }
}

Eigen::VectorXd flatten_flows(const Eigen::MatrixXd& x) {
    const int n = static_cast<int>(x.rows());
    Eigen::VectorXd y(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < static_cast<int>(x.cols()); ++j) {
            y(i * n + j) = x(i, j);
        }
    }
    return y;
}

Eigen::MatrixXd unflatten_flows(const Eigen::VectorXd& y) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(y.size()))));
    if (n * n != y.size()) {
        throw std::invalid_argument("unflatten_flows: length is not a perfect square");
    }
    Eigen::MatrixXd x(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            x(i, j) = y(i * n + j);
        }
    }
    return x;
}

Eigen::SparseMatrix<double> build_sparse_A(int n_grids) {
    if (n_grids < 1) throw std::invalid_argument("build_sparse_A: n_grids must be >= 1");
    const int n = n_grids;
    Eigen::SparseMatrix<double> a(n, n * n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            trip.emplace_back(j, i * n + j, 1.0);
        }
    }
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

Eigen::SparseMatrix<double> build_sparse_B(int n_grids) {
    if (n_grids < 1) throw std::invalid_argument("build_sparse_B: n_grids must be >= 1");
    const int n = n_grids;
    Eigen::SparseMatrix<double> b(n, n * n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            trip.emplace_back(i, i * n + j, 1.0);
        }
    }
    b.setFromTriplets(trip.begin(), trip.end());
    return b;
}

Eigen::VectorXd required_dv_distribution(const Eigen::VectorXd& target,
                                         const Eigen::VectorXd& predicted_free) {
    if (target.size() != predicted_free.size()) {
        throw std::invalid_argument("required_dv_distribution: length mismatch");
    }
    return target - predicted_free;
}

StandardQP to_standard_qp(const RelocationInstance& inst, const Eigen::VectorXd& required_dv) {
    inst.validate();
    const int n = inst.n_grids;
    const int n2 = n * n;
    if (required_dv.size() != n) {
        throw std::invalid_argument("to_standard_qp: required_dv length mismatch");
    }

    StandardQP qp;
    qp.n_grids = n;
    qp.n_flow = n2;

    Eigen::SparseMatrix<double> a = build_sparse_A(n);
    qp.P = Eigen::SparseMatrix<double>(a.transpose() * a);
    qp.q = -(a.transpose() * required_dv);

    qp.G[0] = build_sparse_B(n);
    qp.h[0] = inst.supply;

    // Time feasibility: diag(m - delta) y <= 0. Arcs with m > delta can
    // carry no positive flow.
    Eigen::SparseMatrix<double> g2(n2, n2);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n2);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            trip.emplace_back(i * n + j, i * n + j, inst.travel_time(i, j) - inst.interval);
        }
    }
    g2.setFromTriplets(trip.begin(), trip.end());
    qp.G[1] = std::move(g2);
    qp.h[1] = Eigen::VectorXd::Zero(n2);

    Eigen::SparseMatrix<double> g3(1, n2);
    trip.clear();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (inst.cost(i, j) != 0.0) {
                trip.emplace_back(0, i * n + j, inst.cost(i, j));
            }
        }
    }
    g3.setFromTriplets(trip.begin(), trip.end());
    qp.G[2] = std::move(g3);
    qp.h[2] = Eigen::VectorXd::Constant(1, inst.budget);

    Eigen::SparseMatrix<double> g4(n2, n2);
    g4.setIdentity();
    qp.G[3] = Eigen::SparseMatrix<double>(-g4);
    qp.h[3] = Eigen::VectorXd::Zero(n2);

    qp.objective_offset = 0.5 * required_dv.squaredNorm();
    return qp;
}

Eigen::VectorXd aggregate_arrivals(const FlowPlan& plan) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(plan.y.size()))));
    if (n * n != plan.y.size()) {
        throw std::invalid_argument("aggregate_arrivals: flow length is not a perfect square");
    }
    Eigen::VectorXd dv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            dv(j) += plan.y(i * n + j);
        }
    }
    return dv;
}

Eigen::VectorXd matching_distribution(const Eigen::VectorXd& dv, const Eigen::VectorXd& free) {
    if (dv.size() != free.size()) {
        throw std::invalid_argument("matching_distribution: length mismatch");
    }
    return dv + free;
}

}  // namespace spo
