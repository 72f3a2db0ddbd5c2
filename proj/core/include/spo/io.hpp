#pragma once

#include "spo/datagen.hpp"
#include "spo/predictor.hpp"
#include "spo/relocation.hpp"
#include "spo/spo_train.hpp"

#include <filesystem>
#include <string>

namespace spo::io {

/// RelocationInstance JSON schema:
/// { "n_grids", "supply": [], "target": [], "travel_time": [[]],
///   "cost": [[]], "budget", "interval" }
void save_instance(const RelocationInstance& inst, const std::filesystem::path& path);
RelocationInstance load_instance(const std::filesystem::path& path);

/// Predictor checkpoint: { "layers": { name: { "shape": [], "data": [] } } }.
void save_weights(const PredictorWeights& w, const std::filesystem::path& path);
PredictorWeights load_weights(const std::filesystem::path& path);

/// Demand CSV with header "interval,grid,all,dedicated,free".
void save_demand_csv(const DemandSeries& series, const std::filesystem::path& path);
DemandSeries load_demand_csv(const std::filesystem::path& path);

/// Grid descriptor JSON: rows, cols, edge_length, axial coords, neighbors.
void save_grid(const HexGrid& grid, const std::filesystem::path& path);
HexGrid load_grid(const std::filesystem::path& path);

/// Training curve CSV: "epoch,l1,l2,l_spo,val_rmse,val_smape".
void save_train_record_csv(const TrainRecord& rec, const std::filesystem::path& path);

/// Divergence CSV: "interval,grid,matched,target,abs_divergence".
void save_divergence_csv(const Eigen::MatrixXd& matched, const Eigen::MatrixXd& target,
                         const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace spo::io
