#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "humor/config.hpp"
#include "humor/params.hpp"

namespace humor {

inline constexpr int kCheckpointFormatVersion = 1;

// Trainable state of a scorer plus everything needed to rebuild it. Stored as
// CBOR with a format-version field.
struct Checkpoint {
  ExperimentConfig config;
  std::string backend_identity;            // "table" or the backend identity
  std::map<std::string, Matrix> tensors;   // head, mix and finetuned backend weights
  std::map<std::string, Vector> table_rows;  // finetuned embedding rows by word
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& doc);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace humor
