#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "humor/encoders.hpp"
#include "humor/model.hpp"

namespace humor {

enum class Schedule { Constant, LinearDecay };
enum class Selection { BestDev, LastEpoch };

inline constexpr const char* kTableEncoder = "table";

// One experiment. Keys of the flat document form (to_json/from_json) are the
// CLI flag names.
struct ExperimentConfig {
  int subtask = 1;
  std::string encoder = kTableEncoder;  // "table" or a backend identity
  Transfer transfer = Transfer::Freeze;
  FeatureMode feature = FeatureMode::Context;
  bool use_extra = false;
  std::optional<std::size_t> batch_size;  // default 32 / 16 by subtask
  std::size_t max_epochs = 10;
  std::optional<double> learning_rate;    // default by encoder and transfer
  Schedule schedule = Schedule::Constant;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  Selection selection = Selection::BestDev;
  bool clamp = false;
  std::string embeddings;                 // embedding text file (table encoder)
  std::size_t embedding_dim = 300;
  std::size_t mlp_hidden = ScoreHead::kDefaultHidden;

  bool table_encoder() const { return encoder == kTableEncoder; }
  std::size_t effective_batch_size() const;
  double effective_learning_rate() const;
  // MLP unless a contextual encoder is finetuned.
  HeadKind head_kind() const;

  void validate() const;
  nlohmann::json to_json() const;  // with defaults resolved
  static ExperimentConfig from_json(const nlohmann::json& doc);
  // Stable hex digest of to_json().
  std::string hash() const;
};

std::string to_string(Transfer t);
std::string to_string(FeatureMode m);
std::string to_string(Schedule s);
std::string to_string(Selection s);
Transfer parse_transfer(const std::string& text);
FeatureMode parse_feature_mode(const std::string& text);
Schedule parse_schedule(const std::string& text);
Selection parse_selection(const std::string& text);
bool parse_bool(const std::string& text);

}  // namespace humor
