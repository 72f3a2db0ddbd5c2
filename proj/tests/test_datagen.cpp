#include "spo/datagen.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace spo;

TEST_SUITE("datagen") {

TEST_CASE("hex grid shapes") {
    HexGrid g1 = make_hex_grid(1, 1);
    CHECK(g1.size() == 1);
    CHECK(g1.neighbors[0].empty());

    HexGrid g3 = make_hex_grid(3, 3);
    CHECK(g3.neighbors[4].size() == 6);  // center cell
    for (int i = 0; i < g3.size(); ++i) {
        for (int j : g3.neighbors[i]) {
            bool back = false;
            for (int k : g3.neighbors[j]) {
                if (k == i) back = true;
            }
            CHECK(back);
        }
    }
    CHECK_THROWS_AS(make_hex_grid(0, 3), std::invalid_argument);
}

TEST_CASE("hex distance: neighbors at 1, triangle inequality") {
    HexGrid g = make_hex_grid(5, 5);
    for (int i = 0; i < g.size(); ++i) {
        CHECK(g.hex_distance(i, i) == 0);
        for (int j : g.neighbors[i]) CHECK(g.hex_distance(i, j) == 1);
    }
    for (int a = 0; a < g.size(); ++a)
        for (int b = 0; b < g.size(); ++b)
            for (int c = 0; c < g.size(); ++c)
                CHECK(g.hex_distance(a, c) <= g.hex_distance(a, b) + g.hex_distance(b, c));
}

TEST_CASE("demand synthesis is seeded-deterministic") {
    HexGrid g = make_hex_grid(3, 3);
    DemandSeries a = synth_demand(g, 3, 42);
    DemandSeries b = synth_demand(g, 3, 42);
    CHECK((a.all - b.all).lpNorm<Eigen::Infinity>() == 0.0);
    DemandSeries c = synth_demand(g, 3, 43);
    CHECK((a.all - c.all).lpNorm<Eigen::Infinity>() > 0.0);
    CHECK(a.n_intervals() == 3 * 96);
    CHECK((a.all.array() >= 0.0).all());
    CHECK((a.all - a.dedicated - a.free).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("hotspot intensity ratio stays within the documented band") {
    HexGrid g = make_hex_grid(6, 6);
    DemandProfile prof;
    prof.poisson_noise = false;  // deterministic intensities
    prof.hotspot_fraction = 0.3;
    DemandSeries s = synth_demand(g, 7, 11, prof);
    // With noise off, each grid's series is base * factor * shared shape, so
    // column means are proportional to the per-grid factor.
    const Eigen::VectorXd means = s.all.colwise().mean();
    const double lo = means.minCoeff();
    int hot = 0;
    for (int i = 0; i < g.size(); ++i) {
        const double ratio = means(i) / lo;
        if (ratio > 1.0 + 1e-9) {
            ++hot;
            CHECK(ratio >= 3.0);
            CHECK(ratio <= 6.0);
        }
    }
    CHECK(hot > 0);
}

TEST_CASE("weekday/weekend modulation with noise off") {
    HexGrid g = make_hex_grid(2, 2);
    DemandProfile prof;
    prof.poisson_noise = false;
    DemandSeries s = synth_demand(g, 7, 5, prof);
    // Day 5 (Saturday) equals day 0 scaled by the weekend factor.
    const Eigen::MatrixXd day0 = s.all.middleRows(0, 96);
    const Eigen::MatrixXd day5 = s.all.middleRows(5 * 96, 96);
    CHECK((day5 - prof.weekend_factor * day0).lpNorm<Eigen::Infinity>() <= 1e-9);
    // Two weekdays are identical.
    const Eigen::MatrixXd day1 = s.all.middleRows(96, 96);
    CHECK((day1 - day0).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("fleet split") {
    HexGrid g = make_hex_grid(4, 4);
    DemandSeries s = synth_demand(g, 7, 2);
    DemandSeries sp = split_fleet(s, 0.6, 3);
    CHECK((sp.all - sp.dedicated - sp.free).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(sp.dedicated.minCoeff() >= 0.0);
    CHECK(sp.free.minCoeff() >= 0.0);

    // gamma -> 1 limit: nearly everything is dedicated.
    DemandSeries hi = split_fleet(s, 0.999, 3);
    CHECK(hi.free.sum() <= 0.01 * hi.all.sum());

    // Zero demand stays zero in both classes.
    DemandSeries zero = s;
    zero.all.setZero();
    DemandSeries zs = split_fleet(zero, 0.5, 1);
    CHECK(zs.dedicated.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(zs.free.lpNorm<Eigen::Infinity>() == 0.0);

    // Statistical check: dedicated fraction within 1% of gamma.
    const double frac = sp.dedicated.sum() / sp.all.sum();
    CHECK(frac == doctest::Approx(0.6).epsilon(0.01));

    CHECK_THROWS_AS(split_fleet(s, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_fleet(s, 1.0, 1), std::invalid_argument);
}

TEST_CASE("target generation") {
    HexGrid g = make_hex_grid(3, 3);
    DemandProfile prof;
    prof.poisson_noise = false;
    DemandSeries s = synth_demand(g, 7, 8, prof);
    const Eigen::MatrixXd base = base_week_mean(s);

    TargetSpec collapsed;
    collapsed.uniform_lo = 1.0;
    collapsed.uniform_hi = 1.0;
    const Eigen::MatrixXd t0 = gen_target(collapsed, base, g);
    CHECK((t0 - base).lpNorm<Eigen::Infinity>() <= 1e-9);

    for (TargetKind kind :
         {TargetKind::Uniform, TargetKind::Gaussian, TargetKind::GaussianMixture}) {
        TargetSpec spec;
        spec.kind = kind;
        spec.seed = 4;
        const Eigen::MatrixXd t = gen_target(spec, base, g);
        CHECK(t.minCoeff() >= 0.0);
        CHECK(t.rows() == 96);
        CHECK(t.cols() == 9);
    }

    // Uniform totals stay within the sampled factor range per interval.
    TargetSpec uni;
    uni.seed = 9;
    const Eigen::MatrixXd tu = gen_target(uni, base, g);
    for (int t = 0; t < 96; ++t) {
        const double b = base.row(t).sum();
        if (b <= 0.0) continue;
        const double ratio = tu.row(t).sum() / b;
        CHECK(ratio >= 0.90 - 1e-9);
        CHECK(ratio <= 1.10 + 1e-9);
    }

    Eigen::MatrixXd neg = base;
    neg(0, 0) = -1.0;
    CHECK_THROWS_AS(gen_target(uni, neg, g), std::invalid_argument);
}

TEST_CASE("base week mean of a constant series is that constant") {
    HexGrid g = make_hex_grid(2, 2);
    DemandSeries s = synth_demand(g, 7, 1);
    s.all.setConstant(4.0);
    const Eigen::MatrixXd mean = base_week_mean(s);
    CHECK((mean.array() - 4.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("travel time and incentive cost matrices") {
    HexGrid g = make_hex_grid(3, 3);
    const double speed = 30.0;
    const Eigen::MatrixXd m = travel_time_matrix(g, speed);
    const Eigen::MatrixXd w = incentive_cost_matrix(g, 2.0);
    for (int i = 0; i < g.size(); ++i) {
        CHECK(m(i, i) == 0.0);
        CHECK(w(i, i) == 0.0);
    }
    // One hop: center-to-center distance edge * sqrt(3) at 500 m/min.
    const double one_hop = g.edge_length * std::numbers::sqrt3 / (speed * 1000.0 / 60.0);
    const int center = 4;
    for (int j : g.neighbors[center]) {
        CHECK(m(center, j) == doctest::Approx(one_hop).epsilon(1e-12));
        CHECK(w(center, j) == doctest::Approx(2.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(travel_time_matrix(g, 0.0), std::invalid_argument);
}

TEST_CASE("chronological dataset split") {
    HexGrid g = make_hex_grid(2, 2);
    DemandProfile prof;
    prof.poisson_noise = false;
    // 112 intervals and window 12 give exactly 100 samples.
    DemandSeries s = synth_demand(g, 2, 3, prof);
    s.all.conservativeResize(112, Eigen::NoChange);
    s.dedicated = s.all * 0.5;
    s.free = s.all - s.dedicated;
    Eigen::MatrixXd targets = Eigen::MatrixXd::Ones(96, 4);
    DatasetSplits sp = split_dataset(s, targets, 12);
    CHECK(sp.train.size() == 80);
    CHECK(sp.val.size() == 10);
    CHECK(sp.test.size() == 10);

    // First sample's history starts at the series head (window edge).
    CHECK((sp.train.front().history - s.free.topRows(12)).lpNorm<Eigen::Infinity>() == 0.0);
    // Windows are contiguous and chronological across the split boundary.
    CHECK((sp.val.front().history - s.free.middleRows(80, 12)).lpNorm<Eigen::Infinity>() ==
          0.0);

    CHECK_THROWS_AS(split_dataset(s, targets, 12, {0.5, 0.2, 0.2}), std::invalid_argument);

    DemandSeries tiny = s;
    tiny.all.conservativeResize(13, Eigen::NoChange);
    tiny.dedicated.conservativeResize(13, Eigen::NoChange);
    tiny.free.conservativeResize(13, Eigen::NoChange);
    CHECK_THROWS_AS(split_dataset(tiny, targets, 12), std::invalid_argument);
}

}  // TEST_SUITE
