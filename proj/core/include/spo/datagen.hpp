#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace spo {

/// Axial-coordinate hexagonal parallelogram grid with the standard
/// 6-neighborhood, truncated at borders.
struct HexGrid {
    int rows = 0;
    int cols = 0;
    double edge_length = 531.41;  // meters
    std::vector<std::pair<int, int>> axial;       // (q, r) per grid
    std::vector<std::vector<int>> neighbors;      // excluding self, <= 6 each

    int size() const { return rows * cols; }

    /// Hex distance in cell steps between grid centers.
    int hex_distance(int a, int b) const;
};

HexGrid make_hex_grid(int rows, int cols);

/// Per-interval, per-grid vehicle counts for each class. Rows are intervals
/// (96 per day at 15 min), columns are grids. all = dedicated + free.
struct DemandSeries {
    Eigen::MatrixXd all;
    Eigen::MatrixXd dedicated;
    Eigen::MatrixXd free;
    double interval_minutes = 15.0;
    int intervals_per_day = 96;

    int n_intervals() const { return static_cast<int>(all.rows()); }
    int n_grids() const { return static_cast<int>(all.cols()); }
};

/// Controls the synthetic demand shape: a multi-peak daily profile with
/// morning, noon, and late-night peaks, hotspot grids at 3-6x the average
/// base intensity, and weekly modulation.
struct DemandProfile {
    double base_intensity = 8.0;     // mean vehicles per grid per interval off-peak
    double hotspot_fraction = 0.2;   // fraction of grids that are hotspots
    double hotspot_min_factor = 3.0;
    double hotspot_max_factor = 6.0;
    double weekend_factor = 0.8;
    bool poisson_noise = true;       // Poisson counts around the intensity
};

DemandSeries synth_demand(const HexGrid& grid, int days, std::uint64_t seed,
                          const DemandProfile& profile = {});

/// Splits total counts into dedicated/free classes: dedicated is a seeded
/// binomial draw with success probability gamma per vehicle, free the rest.
DemandSeries split_fleet(const DemandSeries& series, double gamma, std::uint64_t seed);

enum class TargetKind { Uniform, Gaussian, GaussianMixture };

struct TargetSpec {
    TargetKind kind = TargetKind::Uniform;
    double uniform_lo = 0.90;
    double uniform_hi = 1.10;
    double gaussian_variance = 15.0;
    double mixture_variance_a = 10.0;
    double mixture_variance_b = 20.0;
    std::uint64_t seed = 0;
};

/// Mean all-vehicle distribution per interval-of-day over the first week
/// of the series; 96 x N.
Eigen::MatrixXd base_week_mean(const DemandSeries& series);

/// Target distributions per interval-of-day (96 x N). Uniform scales the
/// base mean by a per-interval factor; Gaussian kinds place spatial bumps
/// rescaled to the interval's total demand. Negatives are clamped to 0.
Eigen::MatrixXd gen_target(const TargetSpec& spec, const Eigen::MatrixXd& base_mean,
                           const HexGrid& grid);

/// One supervised sample: look-back window of free-vehicle counts, current
/// dedicated supply, next-interval truths.
struct Sample {
    Eigen::MatrixXd history;    // m x N free-vehicle counts, oldest first
    Eigen::VectorXd supply;     // dedicated vehicles at tau
    Eigen::VectorXd free_next;  // actual free vehicles at tau+1
    Eigen::VectorXd target;     // target all-vehicle distribution at tau+1
    int interval_of_day = 0;    // of tau+1
};

struct DatasetSplits {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
};

/// Chronological split (no shuffling across time) of windowed samples.
/// target_table is 96 x N per interval-of-day. ratios must sum to 1.
DatasetSplits split_dataset(const DemandSeries& series, const Eigen::MatrixXd& target_table,
                            int window, const std::array<double, 3>& ratios = {0.8, 0.1, 0.1});

/// Center-to-center travel time in minutes at the given speed, zero diagonal.
Eigen::MatrixXd travel_time_matrix(const HexGrid& grid, double speed_kmh);

/// Incentive cost proportional to hex distance, zero diagonal.
Eigen::MatrixXd incentive_cost_matrix(const HexGrid& grid, double unit_cost);

}  // namespace spo
