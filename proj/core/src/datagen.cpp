#include "spo/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace spo {

namespace {

// Axial hex directions.
constexpr int kDirs[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};

int axial_distance(int q1, int r1, int q2, int r2) {
    const int dq = q1 - q2;
    const int dr = r1 - r2;
    return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

}  // namespace

int HexGrid::hex_distance(int a, int b) const {
    return axial_distance(axial[a].first, axial[a].second, axial[b].first, axial[b].second);
}

HexGrid make_hex_grid(int rows, int cols) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("make_hex_grid: rows and cols must be >= 1");
    }
    HexGrid g;
    g.rows = rows;
    g.cols = cols;
    g.axial.reserve(rows * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            g.axial.emplace_back(c, r);
        }
    }
    g.neighbors.assign(rows * cols, {});
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int idx = r * cols + c;
            for (const auto& d : kDirs) {
                const int nq = c + d[0];
                const int nr = r + d[1];
                if (nq >= 0 && nq < cols && nr >= 0 && nr < rows) {
                    g.neighbors[idx].push_back(nr * cols + nq);
                }
            }
        }
    }
    return g;
}

DemandSeries synth_demand(const HexGrid& grid, int days, std::uint64_t seed,
                          const DemandProfile& profile) {
    if (days < 1) throw std::invalid_argument("synth_demand: days must be >= 1");
    const int n = grid.size();
    const int per_day = 96;
    const int total = days * per_day;

    std::mt19937_64 rng(seed);

    // Hotspot grids carry a 3-6x base intensity.
    std::vector<double> intensity(n, profile.base_intensity);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> hot_factor(profile.hotspot_min_factor,
                                                      profile.hotspot_max_factor);
    for (int i = 0; i < n; ++i) {
        if (unif(rng) < profile.hotspot_fraction) {
            intensity[i] *= hot_factor(rng);
        }
    }

    // Daily profile: baseline plus morning, noon, and late-night peaks.
    auto daily = [](int interval_of_day) {
        const double hour = interval_of_day / 4.0;
        auto peak = [&](double center, double width, double height) {
            const double d = hour - center;
            return height * std::exp(-d * d / (2.0 * width * width));
        };
        return 0.5 + peak(8.0, 1.5, 1.0) + peak(13.0, 1.5, 0.8) + peak(23.0, 1.5, 1.2);
    };

    DemandSeries s;
    s.all.resize(total, n);
    for (int t = 0; t < total; ++t) {
        const int day = t / per_day;
        const int iod = t % per_day;
        const bool weekend = (day % 7) >= 5;
        const double day_factor = weekend ? profile.weekend_factor : 1.0;
        const double shape = daily(iod) * day_factor;
        for (int i = 0; i < n; ++i) {
            const double lambda = intensity[i] * shape;
            if (profile.poisson_noise) {
                std::poisson_distribution<int> pois(lambda);
                s.all(t, i) = static_cast<double>(pois(rng));
            } else {
                s.all(t, i) = lambda;
            }
        }
    }
    s.dedicated = Eigen::MatrixXd::Zero(total, n);
    s.free = s.all;
    return s;
}

DemandSeries split_fleet(const DemandSeries& series, double gamma, std::uint64_t seed) {
    if (gamma <= 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("split_fleet: gamma must be in (0, 1)");
    }
    std::mt19937_64 rng(seed);
    DemandSeries out = series;
    for (int t = 0; t < series.n_intervals(); ++t) {
        for (int i = 0; i < series.n_grids(); ++i) {
            const int all = static_cast<int>(series.all(t, i));
            int ded = 0;
            if (all > 0) {
                std::binomial_distribution<int> bin(all, gamma);
                ded = bin(rng);
            }
            out.dedicated(t, i) = static_cast<double>(ded);
            out.free(t, i) = static_cast<double>(all - ded);
        }
    }
    return out;
}

Eigen::MatrixXd base_week_mean(const DemandSeries& series) {
    const int per_day = series.intervals_per_day;
    const int days = std::min(7, series.n_intervals() / per_day);
    if (days < 1) throw std::invalid_argument("base_week_mean: series shorter than one day");
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(per_day, series.n_grids());
    for (int d = 0; d < days; ++d) {
        mean += series.all.middleRows(d * per_day, per_day);
    }
    return mean / static_cast<double>(days);
}

Eigen::MatrixXd gen_target(const TargetSpec& spec, const Eigen::MatrixXd& base_mean,
                           const HexGrid& grid) {
    if ((base_mean.array() < 0).any()) {
        throw std::invalid_argument("gen_target: base mean has negative entries");
    }
    const int per_day = static_cast<int>(base_mean.rows());
    const int n = static_cast<int>(base_mean.cols());
    if (n != grid.size()) throw std::invalid_argument("gen_target: grid size mismatch");

    std::mt19937_64 rng(spec.seed);
    Eigen::MatrixXd target(per_day, n);

    auto gaussian_bump = [&](int center, double variance) {
        Eigen::VectorXd w(n);
        for (int i = 0; i < n; ++i) {
            const double d = grid.hex_distance(center, i);
            w(i) = std::exp(-d * d / (2.0 * variance));
        }
        return w;
    };

    std::uniform_int_distribution<int> pick(0, n - 1);
    switch (spec.kind) {
        case TargetKind::Uniform: {
            std::uniform_real_distribution<double> factor(spec.uniform_lo, spec.uniform_hi);
            for (int t = 0; t < per_day; ++t) {
                target.row(t) = base_mean.row(t) * factor(rng);
            }
            break;
        }
        case TargetKind::Gaussian: {
            const int center = pick(rng);
            const Eigen::VectorXd w = gaussian_bump(center, spec.gaussian_variance);
            for (int t = 0; t < per_day; ++t) {
                const double total = base_mean.row(t).sum();
                target.row(t) = (w / w.sum()).transpose() * total;
            }
            break;
        }
        case TargetKind::GaussianMixture: {
            const int ca = pick(rng);
            const int cb = pick(rng);
            const Eigen::VectorXd wa = gaussian_bump(ca, spec.mixture_variance_a);
            const Eigen::VectorXd wb = gaussian_bump(cb, spec.mixture_variance_b);
            for (int t = 0; t < per_day; ++t) {
                const double total = base_mean.row(t).sum();
                target.row(t) =
                    (0.5 * wa / wa.sum() + 0.5 * wb / wb.sum()).transpose() * total;
            }
            break;
        }
    }
    // Negative values are filtered.
    return target.cwiseMax(0.0);
}

DatasetSplits split_dataset(const DemandSeries& series, const Eigen::MatrixXd& target_table,
                            int window, const std::array<double, 3>& ratios) {
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw std::invalid_argument("split_dataset: ratios must sum to 1");
    }
    if (window < 1) throw std::invalid_argument("split_dataset: window must be >= 1");
    const int total = series.n_intervals();
    const int n_samples = total - window;  // tau in [window-1, total-2]
    if (n_samples < 3) {
        throw std::invalid_argument("split_dataset: series shorter than window + 3 samples");
    }
    std::vector<Sample> samples;
    samples.reserve(n_samples);
    for (int tau = window - 1; tau + 1 < total; ++tau) {
        Sample s;
        s.history = series.free.middleRows(tau - window + 1, window);
        s.supply = series.dedicated.row(tau).transpose();
        s.free_next = series.free.row(tau + 1).transpose();
        s.interval_of_day = (tau + 1) % series.intervals_per_day;
        s.target = target_table.row(s.interval_of_day).transpose();
        samples.push_back(std::move(s));
    }
    const int n_train = static_cast<int>(std::floor(ratios[0] * n_samples));
    const int n_val = static_cast<int>(std::floor(ratios[1] * n_samples));
    DatasetSplits out;
    out.train.assign(samples.begin(), samples.begin() + n_train);
    out.val.assign(samples.begin() + n_train, samples.begin() + n_train + n_val);
    out.test.assign(samples.begin() + n_train + n_val, samples.end());
    return out;
}

Eigen::MatrixXd travel_time_matrix(const HexGrid& grid, double speed_kmh) {
    if (speed_kmh <= 0) throw std::invalid_argument("travel_time_matrix: speed must be > 0");
    const int n = grid.size();
    const double center_spacing_m = grid.edge_length * std::numbers::sqrt3;
    const double meters_per_min = speed_kmh * 1000.0 / 60.0;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = grid.hex_distance(i, j) * center_spacing_m / meters_per_min;
        }
    }
    return m;
}

Eigen::MatrixXd incentive_cost_matrix(const HexGrid& grid, double unit_cost) {
    const int n = grid.size();
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            w(i, j) = unit_cost * grid.hex_distance(i, j);
        }
    }
    return w;
}

}  // namespace spo
