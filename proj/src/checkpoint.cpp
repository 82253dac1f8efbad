#include "humor/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "humor/error.hpp"

namespace humor {
namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw Error("checkpoint tensor has the wrong size");
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

}  // namespace

nlohmann::json Checkpoint::to_json() const {
  nlohmann::json j;
  j["format"] = "humor-checkpoint";
  j["format_version"] = kCheckpointFormatVersion;
  j["config"] = config.to_json();
  j["config_hash"] = config.hash();
  j["backend_identity"] = backend_identity;
  j["transfer"] = to_string(config.transfer);
  j["feature"] = to_string(config.feature);
  auto& t = j["tensors"] = nlohmann::json::object();
  for (const auto& [name, m] : tensors) t[name] = matrix_to_json(m);
  auto& rows = j["table_rows"] = nlohmann::json::object();
  for (const auto& [word, v] : table_rows) rows[word] = std::vector<double>(v.data(), v.data() + v.size());
  j["metadata"] = metadata;
  return j;
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "humor-checkpoint") throw Error("not a checkpoint document");
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointFormatVersion) {
    throw Error("unsupported checkpoint format version " + std::to_string(version));
  }
  Checkpoint c;
  c.config = ExperimentConfig::from_json(j.at("config"));
  if (j.at("config_hash").get<std::string>() != c.config.hash()) throw Error("checkpoint config hash mismatch");
  c.backend_identity = j.at("backend_identity").get<std::string>();
  for (const auto& [name, m] : j.at("tensors").items()) c.tensors.emplace(name, matrix_from_json(m));
  for (const auto& [word, v] : j.at("table_rows").items()) {
    const auto data = v.get<std::vector<double>>();
    c.table_rows.emplace(word, Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size())));
  }
  c.metadata = j.value("metadata", nlohmann::json::object());
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto bytes = nlohmann::json::to_cbor(to_json());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(nlohmann::json::from_cbor(bytes));
}

}  // namespace humor
