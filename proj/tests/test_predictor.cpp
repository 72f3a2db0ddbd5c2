#include "spo/gradcheck.hpp"
#include "spo/predictor.hpp"

#include <doctest.h>

#include <random>

using namespace spo;

TEST_SUITE("predictor") {

TEST_CASE("zero history and zero weights give zero prediction") {
    PredictorWeights w = PredictorWeights::init(4, 3, 1);
    w.b1.setZero();
    w.b2 = 0.0;
    HistoryWindow hist{Eigen::MatrixXd::Zero(4, 2)};
    Adjacency adj = Adjacency::identity(2);
    CHECK(predict(hist, adj, w).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("constructed weights reproduce persistence on a single grid") {
    // hidden 1, w1 selects the last window row, w2 = 1: prediction equals
    // the last observation for nonnegative history.
    PredictorWeights w;
    w.w1 = Eigen::MatrixXd::Zero(1, 3);
    w.w1(0, 2) = 1.0;
    w.b1 = Eigen::VectorXd::Zero(1);
    w.w2 = Eigen::RowVectorXd::Ones(1);
    w.b2 = 0.0;
    Adjacency adj = Adjacency::identity(1);
    const double c = 7.5;
    HistoryWindow hist{Eigen::MatrixXd::Constant(3, 1, c)};
    CHECK(predict(hist, adj, w)(0) == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("predictions are nonnegative for random weights") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(0.0, 3.0);
    Adjacency adj = Adjacency::from_grid(make_hex_grid(2, 3));
    for (int trial = 0; trial < 20; ++trial) {
        PredictorWeights w = PredictorWeights::init(5, 4, trial);
        Eigen::MatrixXd h(5, 6);
        for (int i = 0; i < h.rows(); ++i)
            for (int j = 0; j < h.cols(); ++j) h(i, j) = std::abs(nd(rng));
        CHECK(predict(HistoryWindow{h}, adj, w).minCoeff() >= 0.0);
    }
}

TEST_CASE("prediction loss") {
    Eigen::VectorXd a(2), b(2);
    a << 0, 0;
    b << 3, 4;
    CHECK(prediction_loss(a, b) == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(prediction_loss(b, b) == 0.0);
    CHECK(prediction_loss(a, b) == prediction_loss(b, a));
    CHECK_THROWS_AS(prediction_loss(a, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("vjp: zero upstream gives zero gradients") {
    PredictorWeights w = PredictorWeights::init(3, 2, 4);
    HistoryWindow hist{Eigen::MatrixXd::Random(3, 4).cwiseAbs()};
    Adjacency adj = Adjacency::identity(4);
    PredictorWeights g = predictor_vjp(hist, adj, w, Eigen::VectorXd::Zero(4));
    CHECK(g.flat().lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("vjp: hand derivative of the 1-D model") {
    // window 1, hidden 1, single grid, all pre-activations positive:
    // pred = w2 * (w1 * x + b1) + b2, so d/dw1 = w2*x, d/db1 = w2,
    // d/dw2 = w1*x + b1, d/db2 = 1.
    PredictorWeights w;
    w.w1 = Eigen::MatrixXd::Constant(1, 1, 0.5);
    w.b1 = Eigen::VectorXd::Constant(1, 0.25);
    w.w2 = Eigen::RowVectorXd::Constant(1, 2.0);
    w.b2 = 0.125;
    const double x = 3.0;
    HistoryWindow hist{Eigen::MatrixXd::Constant(1, 1, x)};
    Adjacency adj = Adjacency::identity(1);
    Eigen::VectorXd up = Eigen::VectorXd::Ones(1);
    PredictorWeights g = predictor_vjp(hist, adj, w, up);
    CHECK(g.w1(0, 0) == doctest::Approx(2.0 * x).epsilon(1e-12));
    CHECK(g.b1(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.w2(0) == doctest::Approx(0.5 * x + 0.25).epsilon(1e-12));
    CHECK(g.b2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vjp matches finite differences") {
    CHECK(check_predictor_vjp(6, 5, 4, 7) <= 1e-3);
    CHECK(check_predictor_vjp(4, 12, 8, 3) <= 1e-3);
}

TEST_CASE("persistence forecast") {
    Eigen::MatrixXd h(3, 3);
    h << 9, 9, 9,
         5, 5, 5,
         1, 2, 3;
    const Eigen::VectorXd p = persistence_predict(HistoryWindow{h});
    CHECK(p(0) == 1.0);
    CHECK(p(1) == 2.0);
    CHECK(p(2) == 3.0);
    HistoryWindow constant{Eigen::MatrixXd::Constant(4, 2, 6.0)};
    CHECK((persistence_predict(constant).array() == 6.0).all());
    CHECK_THROWS_AS(persistence_predict(HistoryWindow{Eigen::MatrixXd(0, 3)}),
                    std::invalid_argument);
}

TEST_CASE("grid adjacency is symmetric with self-loops") {
    Adjacency adj = Adjacency::from_grid(make_hex_grid(3, 4));
    for (int i = 0; i < adj.size(); ++i) {
        bool self = false;
        for (int j : adj.neighbors[i]) {
            if (j == i) self = true;
            bool back = false;
            for (int k : adj.neighbors[j]) {
                if (k == i) back = true;
            }
            CHECK(back);
        }
        CHECK(self);
    }
}

TEST_CASE("weight flattening round trip") {
    PredictorWeights w = PredictorWeights::init(6, 5, 42);
    PredictorWeights w2 = w.zeros_like();
    w2.set_flat(w.flat());
    CHECK((w2.flat() - w.flat()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(w.n_weights() == 6 * 5 + 5 + 5 + 1);
}

}  // TEST_SUITE
