#include "humor/grid.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "humor/error.hpp"

namespace humor {

std::vector<ExperimentConfig> GridSpec::cells() const {
  std::vector<ExperimentConfig> out;
  for (int subtask : subtasks) {
    for (const auto& encoder : encoders) {
      for (auto transfer : transfers) {
        for (bool extra : extras) {
          for (auto feature : features) {
            ExperimentConfig c = base;
            c.subtask = subtask;
            c.encoder = encoder;
            c.transfer = transfer;
            c.feature = feature;
            c.use_extra = extra;
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

GridResult run_grid(const GridSpec& spec, const SplitProvider& splits, const ResourceProvider& resources,
                    const TrainOptions& options) {
  GridResult result;
  std::map<std::pair<int, bool>, SplitSet> split_cache;
  for (const auto& config : spec.cells()) {
    GridCell cell;
    cell.config = config;
    try {
      const auto key = std::make_pair(config.subtask, config.use_extra);
      auto it = split_cache.find(key);
      if (it == split_cache.end()) it = split_cache.emplace(key, splits(config.subtask, config.use_extra)).first;
      const SplitSet& s = it->second;
      const Resources r = resources(config, s);
      RunRecord run = train(config, s.train, s.dev, r, options);
      run.test = evaluate(run.best, s.test, r);
      cell.run = std::move(run);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    result.cells.push_back(std::move(cell));
  }
  result.table = render_grid_table(result.cells);
  return result;
}

std::string row_label(const ExperimentConfig& c) {
  std::vector<std::string> parts;
  if (c.transfer == Transfer::Finetune) parts.push_back("FT");
  if (c.feature == FeatureMode::Original) parts.push_back("Original");
  if (c.feature == FeatureMode::Edit) parts.push_back("Edit");
  if (c.use_extra) parts.push_back("Extra");
  if (parts.empty()) return "with Context+Freeze";
  std::string out;
  for (const auto& p : parts) out += "+" + p;
  return out;
}

namespace {

using RowKey = std::tuple<std::string, int, int, int>;  // encoder, transfer, extra, feature

RowKey row_key(const ExperimentConfig& c) {
  return {c.encoder, static_cast<int>(c.transfer), c.use_extra ? 1 : 0, static_cast<int>(c.feature)};
}

bool is_reference(const ExperimentConfig& c) {
  return c.table_encoder() && c.transfer == Transfer::Freeze && c.feature == FeatureMode::Context && !c.use_extra;
}

std::string gain(const MaybeReal& value, const MaybeReal& reference, bool lower_is_better) {
  if (!value || !reference) return "n/a";
  const double g = lower_is_better ? *reference - *value : *value - *reference;
  return format_real(g);
}

}  // namespace

std::string render_grid_table(const std::vector<GridCell>& cells) {
  bool has1 = false, has2 = false;
  std::vector<std::string> encoders;
  std::map<RowKey, std::map<int, const GridCell*>> rows;
  std::vector<RowKey> order;
  MaybeReal ref_rmse, ref_acc;
  for (const auto& cell : cells) {
    const auto& c = cell.config;
    has1 |= c.subtask == 1;
    has2 |= c.subtask == 2;
    if (std::find(encoders.begin(), encoders.end(), c.encoder) == encoders.end()) encoders.push_back(c.encoder);
    const auto key = row_key(c);
    if (!rows.contains(key)) order.push_back(key);
    rows[key][c.subtask] = &cell;
    if (is_reference(c) && cell.run && cell.run->test) {
      if (c.subtask == 1) ref_rmse = cell.run->test->task1->rmse;
      if (c.subtask == 2) ref_acc = cell.run->test->task2->accuracy;
    }
  }

  std::vector<std::string> header{"Model"};
  if (has1) header.insert(header.end(), {"RMSE", "Gain", "Spearman"});
  if (has2) header.insert(header.end(), {"Accuracy", "Gain", "Reward", "RMSE"});

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> notes;
  for (const auto& encoder : encoders) {
    table.push_back({encoder == kTableEncoder ? "CBOW (table)" : encoder});
    std::vector<RowKey> mine;
    for (const auto& k : order) {
      if (std::get<0>(k) == encoder) mine.push_back(k);
    }
    std::sort(mine.begin(), mine.end());
    for (const auto& key : mine) {
      const auto& by_task = rows[key];
      std::vector<std::string> line{"  " + row_label(by_task.begin()->second->config)};
      auto failed = [&](const GridCell* cell) {
        if (!cell) return true;
        if (!cell->run || !cell->run->test) {
          notes.push_back(row_label(cell->config) + " [" + cell->config.encoder + ", subtask " +
                          std::to_string(cell->config.subtask) + "]: " + cell->error);
          return true;
        }
        return false;
      };
      if (has1) {
        auto it = by_task.find(1);
        const GridCell* cell = it == by_task.end() ? nullptr : it->second;
        if (failed(cell)) {
          line.insert(line.end(), {cell ? "failed" : "", "", ""});
        } else {
          const auto& m = *cell->run->test->task1;
          line.insert(line.end(), {format_real(m.rmse), gain(m.rmse, ref_rmse, true), format_real(m.spearman)});
        }
      }
      if (has2) {
        auto it = by_task.find(2);
        const GridCell* cell = it == by_task.end() ? nullptr : it->second;
        if (failed(cell)) {
          line.insert(line.end(), {cell ? "failed" : "", "", "", ""});
        } else {
          const auto& m = *cell->run->test->task2;
          line.insert(line.end(), {format_real(m.accuracy), gain(m.accuracy, ref_acc, false), format_real(m.reward),
                                   format_real(m.rmse)});
        }
      }
      table.push_back(std::move(line));
    }
  }

  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  };
  measure(header);
  for (const auto& r : table) measure(r);

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string cell = i < r.size() ? r[i] : "";
      if (i == 0) {
        out << std::left << std::setw(static_cast<int>(width[i])) << cell;
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[i])) << cell;
      }
    }
    out << "\n";
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << "\n";
  for (const auto& r : table) emit(r);
  for (const auto& n : notes) out << "failed: " << n << "\n";
  return out.str();
}

}  // namespace humor
