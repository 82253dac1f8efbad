#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "humor/engine.hpp"

namespace humor {

// Axes of an ablation grid; every combination is one cell.
struct GridSpec {
  std::vector<int> subtasks{1};
  std::vector<std::string> encoders{kTableEncoder};
  std::vector<Transfer> transfers{Transfer::Freeze, Transfer::Finetune};
  std::vector<FeatureMode> features{FeatureMode::Context, FeatureMode::Original};
  std::vector<bool> extras{false, true};
  ExperimentConfig base;  // every other setting

  std::vector<ExperimentConfig> cells() const;
};

struct GridCell {
  ExperimentConfig config;
  std::optional<RunRecord> run;  // absent when the cell failed
  std::string error;
};

struct SplitSet {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// Supplies the splits for (subtask, use_extra).
using SplitProvider = std::function<SplitSet(int subtask, bool use_extra)>;
// Supplies encoder resources for a cell.
using ResourceProvider = std::function<Resources(const ExperimentConfig& config, const SplitSet& splits)>;

struct GridResult {
  std::vector<GridCell> cells;
  std::string table;
};

// Trains and tests every cell. Failures are recorded per cell and the grid
// continues.
GridResult run_grid(const GridSpec& spec, const SplitProvider& splits, const ResourceProvider& resources,
                    const TrainOptions& options = {});

// Rows in the ablation-table order, one per (encoder, transfer, feature,
// extra); Subtask 1 columns RMSE/Gain/Spearman and Subtask 2 columns
// Accuracy/Gain/Reward/RMSE as present. Gain is measured against the
// table-encoder Context/Freeze cell without extra data.
std::string render_grid_table(const std::vector<GridCell>& cells);

// "with Context+Freeze", "+Original", "+FT+Extra", ...
std::string row_label(const ExperimentConfig& config);

}  // namespace humor
