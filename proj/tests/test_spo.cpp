#include "spo/datagen.hpp"
#include "spo/spo_train.hpp"

#include <doctest.h>

using namespace spo;

namespace {

struct Toy {
    Scenario scenario;
    DatasetSplits splits;
};

// Small learnable dataset on an r x c hex grid.
Toy toy_dataset(int rows, int cols, int days, std::uint64_t seed) {
    Toy t;
    HexGrid grid = make_hex_grid(rows, cols);
    DemandSeries series = split_fleet(synth_demand(grid, days, seed), 0.6, seed + 1);
    TargetSpec tspec;
    tspec.seed = seed + 2;
    Eigen::MatrixXd targets = gen_target(tspec, base_week_mean(series), grid);
    t.scenario.adj = Adjacency::from_grid(grid);
    t.scenario.travel_time = travel_time_matrix(grid, 30.0);
    t.scenario.cost = incentive_cost_matrix(grid, 1.0);
    t.scenario.budget = 50.0;
    t.scenario.interval = 15.0;
    t.splits = split_dataset(series, targets, 6);
    return t;
}

}  // namespace

TEST_SUITE("spo") {

TEST_CASE("matching loss") {
    Eigen::VectorXd t(2), d(2);
    t << 1, 1;
    d << 0, 0;
    CHECK(matching_loss(t, t) == 0.0);
    CHECK(matching_loss(t, d) == doctest::Approx(2.0).epsilon(1e-12));
    // Homogeneity of degree two.
    CHECK(matching_loss(3.0 * t, 3.0 * d) == doctest::Approx(9.0 * matching_loss(t, d)));
    CHECK_THROWS_AS(matching_loss(t, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("combined loss") {
    SpoConfig cfg;
    cfg.w1 = 1.0;
    cfg.w2 = 0.0;
    CHECK(spo_loss(2.0, 3.0, cfg) == 2.0);
    cfg.w1 = 0.0;
    cfg.w2 = 1.0;
    CHECK(spo_loss(2.0, 3.0, cfg) == 3.0);
    cfg.w1 = 1.0;
    cfg.w2 = 1.0;
    CHECK(spo_loss(2.0, 3.0, cfg) == 5.0);
    cfg.w1 = 0.0;
    cfg.w2 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("zero learning rate is a no-op update") {
    Toy t = toy_dataset(2, 2, 3, 1);
    SpoConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 0.0;
    cfg.weight_decay = 0.0;
    cfg.w2 = 0.0;
    cfg.seed = 5;
    auto [w, rec] = train_spo(t.splits, t.scenario, cfg, AdmmConfig{});
    const PredictorWeights init = PredictorWeights::init(6, cfg.hidden, cfg.seed);
    CHECK((w.flat() - init.flat()).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("w2 = 0 training is identical to the two-stage baseline") {
    Toy t = toy_dataset(2, 2, 4, 3);
    SpoConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 2;
    SpoConfig no_task = cfg;
    no_task.w2 = 0.0;
    auto [w_a, rec_a] = train_spo(t.splits, t.scenario, no_task, AdmmConfig{});
    auto [w_b, rec_b] = train_pto(t.splits, t.scenario, cfg);
    CHECK((w_a.flat() - w_b.flat()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(rec_a.l1 == rec_b.l1);
}

TEST_CASE("two-stage training reduces the prediction loss") {
    Toy t = toy_dataset(2, 2, 6, 7);
    SpoConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 1;
    auto [w, rec] = train_pto(t.splits, t.scenario, cfg);
    REQUIRE(rec.l1.size() == 10);
    CHECK(rec.l1.back() < rec.l1.front());
}

TEST_CASE("joint training reduces the combined loss on a small set") {
    Toy t = toy_dataset(2, 2, 4, 11);
    SpoConfig cfg;
    cfg.epochs = 6;
    cfg.seed = 3;
    AdmmConfig acfg;
    auto [w, rec] = train_spo(t.splits, t.scenario, cfg, acfg);
    REQUIRE(rec.l_spo.size() == 6);
    CHECK(rec.l_spo.back() < rec.l_spo.front());
    CHECK(rec.mean_solve_iterations.front() > 0.0);
}

TEST_CASE("gradient-path completeness: w2 = 0 leaves only the prediction term") {
    Toy t = toy_dataset(2, 2, 3, 13);
    const Sample& s = t.splits.train.front();
    SpoConfig cfg;
    cfg.w2 = 0.0;
    PredictorWeights w = PredictorWeights::init(6, cfg.hidden, 9);
    SampleLoss out = sample_loss_gradient(s, t.scenario, w, cfg, AdmmConfig{});
    const Eigen::VectorXd pred = predict(HistoryWindow{s.history}, t.scenario.adj, w);
    const PredictorWeights direct =
        predictor_vjp(HistoryWindow{s.history}, t.scenario.adj, w,
                      Eigen::VectorXd(2.0 * (pred - s.free_next)));
    CHECK((out.grad.flat() - direct.flat()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(out.l2 == 0.0);
    CHECK(out.loss == doctest::Approx(out.l1));
}

TEST_CASE("end-to-end sample gradient matches finite differences") {
    // 2-grid toy set, full chain through the inner solve.
    Toy t = toy_dataset(1, 2, 3, 17);
    SpoConfig cfg;
    AdmmConfig acfg;
    acfg.xi = 1e-10;
    acfg.k_max = 100000;
    PredictorWeights w = PredictorWeights::init(6, 4, 25);

    for (int si = 0; si < 3; ++si) {
        const Sample& s = t.splits.train[si];
        SampleLoss base = sample_loss_gradient(s, t.scenario, w, cfg, acfg);
        const Eigen::VectorXd g = base.grad.flat();
        Eigen::VectorXd fd(g.size());
        const double eps = 1e-5;
        for (int i = 0; i < g.size(); ++i) {
            PredictorWeights wp = w, wm = w;
            Eigen::VectorXd v = w.flat();
            v(i) += eps;
            wp.set_flat(v);
            v(i) -= 2 * eps;
            wm.set_flat(v);
            const double lp = sample_loss_gradient(s, t.scenario, wp, cfg, acfg).loss;
            const double lm = sample_loss_gradient(s, t.scenario, wm, cfg, acfg).loss;
            fd(i) = (lp - lm) / (2 * eps);
        }
        const double err = (g - fd).lpNorm<Eigen::Infinity>() /
                           std::max(1.0, fd.lpNorm<Eigen::Infinity>());
        CHECK(err <= 1e-2);
    }
}

TEST_CASE("evaluation regimes") {
    Toy t = toy_dataset(2, 2, 4, 23);
    SpoConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 4;
    auto [w, rec] = train_pto(t.splits, t.scenario, cfg);
    AdmmConfig acfg;
    acfg.kkt_tol = 1e-4;
    acfg.k_max = 50000;

    // SPO and PTO evaluation are the same path given the same weights.
    EvalResult as_spo = evaluate_policy(&w, t.splits.test, t.scenario, Regime::SPO, acfg);
    EvalResult as_pto = evaluate_policy(&w, t.splits.test, t.scenario, Regime::PTO, acfg);
    CHECK(as_spo.metrics.rmse == as_pto.metrics.rmse);
    CHECK(as_spo.metrics.smape == as_pto.metrics.smape);

    // DON ignores weights entirely.
    EvalResult don_a = evaluate_policy(&w, t.splits.test, t.scenario, Regime::DON, acfg);
    EvalResult don_b = evaluate_policy(nullptr, t.splits.test, t.scenario, Regime::DON, acfg);
    CHECK(don_a.metrics.rmse == don_b.metrics.rmse);

    // DON with zero supply matches the free vehicles exactly.
    std::vector<Sample> zero_supply = t.splits.test;
    for (Sample& s : zero_supply) s.supply.setZero();
    EvalResult don_z = evaluate_policy(nullptr, zero_supply, t.scenario, Regime::DON, acfg);
    double expect = 0.0;
    for (const Sample& s : zero_supply) expect += rmse(s.free_next, s.target);
    CHECK(don_z.metrics.rmse ==
          doctest::Approx(expect / zero_supply.size()).epsilon(1e-12));

    // NOP runs without weights; every evaluated plan is feasible.
    EvalResult nop = evaluate_policy(nullptr, t.splits.test, t.scenario, Regime::NOP, acfg);
    CHECK(nop.max_constraint_violation <= 1e-3);
    CHECK(as_spo.max_constraint_violation <= 1e-3);

    CHECK_THROWS_AS(evaluate_policy(nullptr, t.splits.test, t.scenario, Regime::SPO, acfg),
                    std::invalid_argument);
}

}  // TEST_SUITE
