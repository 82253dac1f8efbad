#include "humor/config.hpp"

#include <cstdio>

#include "humor/error.hpp"

namespace humor {
namespace {

double as_real(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const auto s = v.get<std::string>();
      const double x = std::stod(s, &used);
      if (used == s.size()) return x;
    } catch (const std::exception&) {
    }
  }
  throw Error("config key '" + key + "' expects a number");
}

std::uint64_t as_count(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const double x = as_real(v, key);
  if (x < 0 || x != static_cast<double>(static_cast<std::uint64_t>(x))) {
    throw Error("config key '" + key + "' expects a non-negative integer");
  }
  return static_cast<std::uint64_t>(x);
}

bool as_bool(const nlohmann::json& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) return parse_bool(v.get<std::string>());
  throw Error("config key '" + key + "' expects a boolean");
}

std::string as_string(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  throw Error("config key '" + key + "' expects a string");
}

}  // namespace

std::string to_string(Transfer t) { return t == Transfer::Freeze ? "freeze" : "finetune"; }

std::string to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::Context: return "context";
    case FeatureMode::Original: return "original";
    case FeatureMode::Edit: return "edit";
  }
  return "?";
}

std::string to_string(Schedule s) { return s == Schedule::Constant ? "constant" : "linear"; }
std::string to_string(Selection s) { return s == Selection::BestDev ? "best" : "last"; }

Transfer parse_transfer(const std::string& text) {
  if (text == "freeze") return Transfer::Freeze;
  if (text == "finetune" || text == "ft") return Transfer::Finetune;
  throw Error("unknown transfer '" + text + "' (freeze|finetune)");
}

FeatureMode parse_feature_mode(const std::string& text) {
  if (text == "context") return FeatureMode::Context;
  if (text == "original") return FeatureMode::Original;
  if (text == "edit") return FeatureMode::Edit;
  throw Error("unknown feature mode '" + text + "' (context|original|edit)");
}

Schedule parse_schedule(const std::string& text) {
  if (text == "constant") return Schedule::Constant;
  if (text == "linear" || text == "linear-decay") return Schedule::LinearDecay;
  throw Error("unknown schedule '" + text + "' (constant|linear)");
}

Selection parse_selection(const std::string& text) {
  if (text == "best") return Selection::BestDev;
  if (text == "last") return Selection::LastEpoch;
  throw Error("unknown selection '" + text + "' (best|last)");
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error("expected a boolean, got '" + text + "'");
}

std::size_t ExperimentConfig::effective_batch_size() const {
  if (batch_size) return *batch_size;
  return subtask == 1 ? 32 : 16;
}

double ExperimentConfig::effective_learning_rate() const {
  if (learning_rate) return *learning_rate;
  return !table_encoder() && transfer == Transfer::Finetune ? 2e-5 : 1e-3;
}

HeadKind ExperimentConfig::head_kind() const {
  return !table_encoder() && transfer == Transfer::Finetune ? HeadKind::Linear : HeadKind::Mlp;
}

void ExperimentConfig::validate() const {
  if (subtask != 1 && subtask != 2) throw Error("subtask must be 1 or 2");
  if (encoder.empty()) throw Error("encoder must be set");
  if (effective_batch_size() == 0) throw Error("batch size must be positive");
  if (max_epochs == 0) throw Error("epochs must be positive");
  if (!(effective_learning_rate() > 0.0)) throw Error("learning rate must be positive");
  if (!(clip_norm > 0.0)) throw Error("clip norm must be positive");
  if (embedding_dim == 0) throw Error("embedding dimension must be positive");
  if (mlp_hidden == 0) throw Error("hidden width must be positive");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"subtask", subtask},
          {"encoder", encoder},
          {"transfer", to_string(transfer)},
          {"feature", to_string(feature)},
          {"extra", use_extra},
          {"batch-size", effective_batch_size()},
          {"epochs", max_epochs},
          {"lr", effective_learning_rate()},
          {"schedule", to_string(schedule)},
          {"clip", clip_norm},
          {"seed", seed},
          {"selection", to_string(selection)},
          {"clamp", clamp},
          {"embeddings", embeddings},
          {"embedding-dim", embedding_dim},
          {"hidden", mlp_hidden}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error("config must be a flat key-value object");
  ExperimentConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "subtask") c.subtask = static_cast<int>(as_count(v, key));
    else if (key == "encoder") c.encoder = as_string(v, key);
    else if (key == "transfer") c.transfer = parse_transfer(as_string(v, key));
    else if (key == "feature") c.feature = parse_feature_mode(as_string(v, key));
    else if (key == "extra") c.use_extra = as_bool(v, key);
    else if (key == "batch-size") c.batch_size = as_count(v, key);
    else if (key == "epochs") c.max_epochs = as_count(v, key);
    else if (key == "lr") c.learning_rate = as_real(v, key);
    else if (key == "schedule") c.schedule = parse_schedule(as_string(v, key));
    else if (key == "clip") c.clip_norm = as_real(v, key);
    else if (key == "seed") c.seed = as_count(v, key);
    else if (key == "selection") c.selection = parse_selection(as_string(v, key));
    else if (key == "clamp") c.clamp = as_bool(v, key);
    else if (key == "embeddings") c.embeddings = as_string(v, key);
    else if (key == "embedding-dim") c.embedding_dim = as_count(v, key);
    else if (key == "hidden") c.mlp_hidden = as_count(v, key);
    else throw Error("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::hash() const {
  const auto text = to_json().dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
  return buf;
}

}  // namespace humor
