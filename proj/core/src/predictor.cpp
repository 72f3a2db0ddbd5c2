#include "spo/predictor.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace spo {

namespace {

// smoothed(t, i) = 0.9 x(t, i) + 0.1 mean over neighbors(i) (incl. self) of
// x(t, j). The cell keeps most of the weight so the spatial averaging
// informs without erasing per-grid levels; on a self-only adjacency this
// is the identity.
Eigen::MatrixXd smooth(const Eigen::MatrixXd& x, const Adjacency& adj) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    for (int i = 0; i < adj.size(); ++i) {
        for (int j : adj.neighbors[i]) {
            out.col(i) += x.col(j);
        }
        out.col(i) /= 10.0 * static_cast<double>(adj.neighbors[i].size());
        out.col(i) += 0.9 * x.col(i);
    }
    return out;
}

// Adjoint of smooth().
Eigen::MatrixXd smooth_adjoint(const Eigen::MatrixXd& gs, const Adjacency& adj) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(gs.rows(), gs.cols());
    for (int i = 0; i < adj.size(); ++i) {
        const double nb_weight = 0.1 / static_cast<double>(adj.neighbors[i].size());
        for (int j : adj.neighbors[i]) {
            out.col(j) += gs.col(i) * nb_weight;
        }
        out.col(i) += 0.9 * gs.col(i);
    }
    return out;
}

void check_shapes(const HistoryWindow& hist, const Adjacency& adj, const PredictorWeights& w) {
    if (hist.n_grids() != adj.size()) {
        throw std::invalid_argument("predict: history/adjacency grid count mismatch");
    }
    if (hist.window() != w.window()) {
        throw std::invalid_argument("predict: history window does not match weights");
    }
    if (!w.w1.allFinite() || !w.b1.allFinite() || !w.w2.allFinite() || !std::isfinite(w.b2)) {
        throw std::invalid_argument("predict: non-finite weights");
    }
}

}  // namespace

Adjacency Adjacency::from_grid(const HexGrid& grid) {
    Adjacency adj;
    adj.neighbors.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        adj.neighbors[i] = grid.neighbors[i];
        adj.neighbors[i].push_back(i);
    }
    return adj;
}

Adjacency Adjacency::identity(int n_grids) {
    Adjacency adj;
    adj.neighbors.resize(n_grids);
    for (int i = 0; i < n_grids; ++i) {
        adj.neighbors[i] = {i};
    }
    return adj;
}

int PredictorWeights::n_weights() const {
    return static_cast<int>(w1.size() + b1.size() + w2.size()) + 1;
}

PredictorWeights PredictorWeights::init(int window, int hidden, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double r) {
        std::uniform_real_distribution<double> d(-r, r);
        return d(rng);
    };
    PredictorWeights w;
    const double r1 = 1.0 / std::sqrt(static_cast<double>(window));
    w.w1.resize(hidden, window);
    for (int i = 0; i < hidden; ++i) {
        for (int j = 0; j < window; ++j) w.w1(i, j) = uniform(r1);
    }
    w.b1 = Eigen::VectorXd::Zero(hidden);
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    w.w2.resize(hidden);
    for (int i = 0; i < hidden; ++i) w.w2(i) = uniform(r2);
    w.b2 = 0.0;
    return w;
}

void PredictorWeights::axpy(double alpha, const PredictorWeights& g) {
    w1 += alpha * g.w1;
    b1 += alpha * g.b1;
    w2 += alpha * g.w2;
    b2 += alpha * g.b2;
}

void PredictorWeights::scale(double alpha) {
    w1 *= alpha;
    b1 *= alpha;
    w2 *= alpha;
    b2 *= alpha;
}

PredictorWeights PredictorWeights::zeros_like() const {
    PredictorWeights z;
    z.w1 = Eigen::MatrixXd::Zero(w1.rows(), w1.cols());
    z.b1 = Eigen::VectorXd::Zero(b1.size());
    z.w2 = Eigen::RowVectorXd::Zero(w2.size());
    z.b2 = 0.0;
    return z;
}

Eigen::VectorXd PredictorWeights::flat() const {
    Eigen::VectorXd v(n_weights());
    int k = 0;
    for (int i = 0; i < w1.rows(); ++i)
        for (int j = 0; j < w1.cols(); ++j) v(k++) = w1(i, j);
    for (int i = 0; i < b1.size(); ++i) v(k++) = b1(i);
    for (int i = 0; i < w2.size(); ++i) v(k++) = w2(i);
    v(k++) = b2;
    return v;
}

void PredictorWeights::set_flat(const Eigen::VectorXd& v) {
    if (v.size() != n_weights()) throw std::invalid_argument("set_flat: size mismatch");
    int k = 0;
    for (int i = 0; i < w1.rows(); ++i)
        for (int j = 0; j < w1.cols(); ++j) w1(i, j) = v(k++);
    for (int i = 0; i < b1.size(); ++i) b1(i) = v(k++);
    for (int i = 0; i < w2.size(); ++i) w2(i) = v(k++);
    b2 = v(k++);
}

Eigen::VectorXd predict(const HistoryWindow& hist, const Adjacency& adj,
                        const PredictorWeights& w) {
    check_shapes(hist, adj, w);
    const Eigen::MatrixXd s0 = smooth(hist.demand, adj);                     // m x N
    const Eigen::MatrixXd pre1 = (w.w1 * s0).colwise() + w.b1;               // h x N
    const Eigen::MatrixXd h = pre1.cwiseMax(0.0);
    const Eigen::MatrixXd s1 = smooth(h, adj);                               // h x N
    const Eigen::RowVectorXd pre2 = (w.w2 * s1).array() + w.b2;              // 1 x N
    return pre2.cwiseMax(0.0).transpose();
}

double prediction_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual) {
    if (pred.size() != actual.size()) {
        throw std::invalid_argument("prediction_loss: length mismatch");
    }
    return (actual - pred).squaredNorm();
}

PredictorWeights predictor_vjp(const HistoryWindow& hist, const Adjacency& adj,
                               const PredictorWeights& w, const Eigen::VectorXd& upstream) {
    check_shapes(hist, adj, w);
    if (upstream.size() != hist.n_grids()) {
        throw std::invalid_argument("predictor_vjp: upstream length mismatch");
    }

    const Eigen::MatrixXd s0 = smooth(hist.demand, adj);
    const Eigen::MatrixXd pre1 = (w.w1 * s0).colwise() + w.b1;
    const Eigen::MatrixXd h = pre1.cwiseMax(0.0);
    const Eigen::MatrixXd s1 = smooth(h, adj);
    const Eigen::RowVectorXd pre2 = (w.w2 * s1).array() + w.b2;

    PredictorWeights g = w.zeros_like();

    Eigen::RowVectorXd g_pre2 = upstream.transpose();
    for (int i = 0; i < g_pre2.size(); ++i) {
        if (!(pre2(i) > 0.0)) g_pre2(i) = 0.0;
    }
    g.b2 = g_pre2.sum();
    g.w2 = g_pre2 * s1.transpose();

    Eigen::MatrixXd g_s1 = w.w2.transpose() * g_pre2;  // h x N
    Eigen::MatrixXd g_h = smooth_adjoint(g_s1, adj);
    Eigen::MatrixXd g_pre1 = (pre1.array() > 0.0).select(g_h, 0.0);
    g.b1 = g_pre1.rowwise().sum();
    g.w1 = g_pre1 * s0.transpose();
    return g;
}

Eigen::VectorXd persistence_predict(const HistoryWindow& hist) {
    if (hist.window() < 1) throw std::invalid_argument("persistence_predict: empty history");
    return hist.demand.row(hist.window() - 1).transpose();
}

}  // namespace spo
