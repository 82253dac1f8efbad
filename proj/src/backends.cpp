#include "humor/backends.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <random>
#include <regex>

#include <json.hpp>

#include "humor/error.hpp"

namespace humor {
namespace {

// Uniform in [-scale, scale] from the top 53 bits; independent of the
// standard library's distribution implementations.
Matrix uniform_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols, double scale) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      m(i, j) = (2.0 * u - 1.0) * scale;
    }
  }
  return m;
}

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("truncated activation cache");
  return value;
}

}  // namespace

TinyContextBackend::TinyContextBackend(Options opts) : opts_(opts) {
  if (opts_.layers == 0 || opts_.hidden == 0 || opts_.buckets <= 4 || opts_.max_length < 3) {
    throw Error("invalid tiny backend options");
  }
  std::mt19937_64 gen(opts_.seed);
  const auto d = static_cast<Eigen::Index>(opts_.hidden);
  const double fan_in = 1.0 / std::sqrt(static_cast<double>(opts_.hidden));
  embed_ = Tensor(uniform_matrix(gen, d, static_cast<Eigen::Index>(opts_.buckets), 1.0));
  position_ = Tensor(uniform_matrix(gen, d, static_cast<Eigen::Index>(opts_.max_length), 0.1));
  for (std::size_t l = 0; l < opts_.layers; ++l) {
    w_.emplace_back(uniform_matrix(gen, d, d, 1.5 * fan_in));
    v_.emplace_back(uniform_matrix(gen, d, d, fan_in));
    b_.emplace_back(Matrix::Zero(d, 1));
  }
}

std::optional<TinyContextBackend::Options> TinyContextBackend::parse_identity(const std::string& identity) {
  Options opts;
  if (identity == "tiny") return opts;
  static const std::regex pattern(R"(tiny-L(\d+)-d(\d+))");
  std::smatch m;
  if (!std::regex_match(identity, m, pattern)) return std::nullopt;
  opts.layers = std::stoul(m[1].str());
  opts.hidden = std::stoul(m[2].str());
  return opts;
}

std::string TinyContextBackend::identity() const {
  return "tiny-L" + std::to_string(opts_.layers) + "-d" + std::to_string(opts_.hidden);
}

std::vector<Unit> TinyContextBackend::subword(std::string_view word, std::size_t) const {
  std::vector<Unit> out;
  constexpr std::size_t kChunk = 4;
  const auto span = static_cast<std::uint64_t>(opts_.buckets - 4);
  for (std::size_t pos = 0; pos < word.size(); pos += kChunk) {
    std::string piece = pos == 0 ? "" : "##";
    piece.append(word.substr(pos, kChunk));
    out.push_back(static_cast<Unit>(4 + fnv1a(piece.data(), piece.size()) % span));
  }
  return out;
}

LayerStack TinyContextBackend::forward(std::span<const Unit> units) const {
  const auto T = static_cast<Eigen::Index>(units.size());
  if (units.empty()) throw Error("cannot encode an empty sequence");
  if (units.size() > opts_.max_length) throw Error("sequence longer than backend max length");
  LayerStack stack;
  Matrix h(static_cast<Eigen::Index>(opts_.hidden), T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto u = units[static_cast<std::size_t>(t)];
    if (u < 0 || static_cast<std::size_t>(u) >= opts_.buckets) throw Error("unit id out of range");
    h.col(t) = embed_.value.col(u) + position_.value.col(t);
  }
  stack.layers.push_back(h);
  for (std::size_t l = 0; l < opts_.layers; ++l) {
    const Vector mean = stack.layers.back().rowwise().mean();
    const Vector shared = v_[l].value * mean + b_[l].value.col(0);
    Matrix a = w_[l].value * stack.layers.back();
    a.colwise() += shared;
    stack.layers.push_back(a.array().tanh().matrix());
  }
  return stack;
}

void TinyContextBackend::backward(std::span<const Unit> units, const LayerStack& acts, const Matrix& top_grad) {
  const auto T = static_cast<Eigen::Index>(units.size());
  Matrix grad = top_grad;
  for (std::size_t l = opts_.layers; l >= 1; --l) {
    const Matrix& out = acts.layers[l];
    const Matrix& in = acts.layers[l - 1];
    const Matrix da = grad.cwiseProduct((1.0 - out.array().square()).matrix());
    const Vector da_sum = da.rowwise().sum();
    const Vector mean = in.rowwise().mean();
    w_[l - 1].grad += da * in.transpose();
    v_[l - 1].grad += da_sum * mean.transpose();
    b_[l - 1].grad.col(0) += da_sum;
    Matrix next = w_[l - 1].value.transpose() * da;
    next.colwise() += (v_[l - 1].value.transpose() * da_sum) / static_cast<double>(T);
    grad = std::move(next);
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    embed_.grad.col(units[static_cast<std::size_t>(t)]) += grad.col(t);
    position_.grad.col(t) += grad.col(t);
  }
}

std::vector<NamedTensor> TinyContextBackend::parameters() {
  std::vector<NamedTensor> out{{"backend.embed", &embed_}, {"backend.position", &position_}};
  for (std::size_t l = 0; l < opts_.layers; ++l) {
    const auto tag = "backend.layer" + std::to_string(l + 1);
    out.push_back({tag + ".w", &w_[l]});
    out.push_back({tag + ".v", &v_[l]});
    out.push_back({tag + ".b", &b_[l]});
  }
  return out;
}

std::uint64_t TinyContextBackend::checksum() const {
  std::vector<const Matrix*> values{&embed_.value, &position_.value};
  for (std::size_t l = 0; l < opts_.layers; ++l) {
    values.push_back(&w_[l].value);
    values.push_back(&v_[l].value);
    values.push_back(&b_[l].value);
  }
  return humor::checksum(values);
}

std::uint64_t sequence_key(std::span<const Unit> units) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Unit u : units) {
    const auto x = static_cast<std::uint32_t>(u);
    const unsigned char bytes[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                                    static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
    h = fnv1a(bytes, 4, h);
  }
  return h;
}

void write_feature_cache(const std::filesystem::path& path, std::size_t layer_count, std::size_t hidden,
                         const std::vector<std::pair<std::vector<Unit>, LayerStack>>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write("HUMF", 4);
  write_pod<std::uint32_t>(out, 1);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(layer_count));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(hidden));
  write_pod<std::uint64_t>(out, records.size());
  for (const auto& [units, stack] : records) {
    if (stack.layers.size() != layer_count) throw Error("layer count mismatch in cache record");
    write_pod<std::uint64_t>(out, sequence_key(units));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(units.size()));
    for (const auto& layer : stack.layers) {
      if (static_cast<std::size_t>(layer.rows()) != hidden || static_cast<std::size_t>(layer.cols()) != units.size()) {
        throw Error("activation shape mismatch in cache record");
      }
      for (Eigen::Index t = 0; t < layer.cols(); ++t) {
        for (Eigen::Index k = 0; k < layer.rows(); ++k) write_pod<float>(out, static_cast<float>(layer(k, t)));
      }
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

CachedFeatureBackend::CachedFeatureBackend(std::string identity, const std::filesystem::path& dir,
                                           bool require_features)
    : identity_(std::move(identity)) {
  std::ifstream cfg_in(dir / "backend.json");
  if (!cfg_in) throw Error("backend '" + identity_ + "': missing " + (dir / "backend.json").string());
  const auto cfg = nlohmann::json::parse(cfg_in);
  layers_ = cfg.at("num_layers").get<std::size_t>();
  hidden_ = cfg.at("hidden_size").get<std::size_t>();
  max_length_ = cfg.value("max_length", std::size_t{512});

  std::ifstream vocab_in(dir / cfg.value("vocab", std::string("vocab.txt")));
  if (!vocab_in) throw Error("backend '" + identity_ + "': missing vocabulary");
  std::vector<std::string> lines;
  for (std::string line; std::getline(vocab_in, line);) lines.push_back(line);
  vocab_ = WordPiece::from_vocab_lines(lines, cfg.value("lower_case", false),
                                       cfg.value("unk_token", std::string("[UNK]")));
  mask_ = vocab_->id(cfg.value("mask_token", std::string("[MASK]")));
  for (const auto& t : cfg.value("prefix_tokens", std::vector<std::string>{})) prefix_.push_back(vocab_->id(t));
  for (const auto& t : cfg.value("suffix_tokens", std::vector<std::string>{})) suffix_.push_back(vocab_->id(t));

  features_path_ = dir / cfg.value("features", std::string("features.bin"));
  if (!require_features && !std::filesystem::exists(features_path_)) return;
  features_.open(features_path_, std::ios::binary);
  if (!features_) throw Error("backend '" + identity_ + "': missing " + features_path_.string());
  char magic[4];
  features_.read(magic, 4);
  if (!features_ || std::memcmp(magic, "HUMF", 4) != 0) throw Error("not an activation cache: " + features_path_.string());
  if (read_pod<std::uint32_t>(features_) != 1) throw Error("unsupported activation cache version");
  const auto layer_count = read_pod<std::uint32_t>(features_);
  const auto hidden = read_pod<std::uint32_t>(features_);
  if (layer_count != layers_ + 1 || hidden != hidden_) throw Error("activation cache shape disagrees with backend.json");
  const auto records = read_pod<std::uint64_t>(features_);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t r = 0; r < records; ++r) {
    const auto key = read_pod<std::uint64_t>(features_);
    const auto T = read_pod<std::uint32_t>(features_);
    const auto offset = static_cast<std::uint64_t>(features_.tellg()) - sizeof(std::uint32_t);
    offsets_.emplace(key, offset);
    h = fnv1a(&key, sizeof key, h);
    features_.seekg(static_cast<std::streamoff>(std::uint64_t{layer_count} * T * hidden * sizeof(float)), std::ios::cur);
  }
  file_checksum_ = h;
}

std::vector<Unit> CachedFeatureBackend::subword(std::string_view word, std::size_t) const {
  return vocab_->tokenize(word);
}

LayerStack CachedFeatureBackend::forward(std::span<const Unit> units) const {
  auto it = offsets_.find(sequence_key(units));
  if (it == offsets_.end()) {
    throw Error("backend '" + identity_ + "': no cached activations for a sequence of " +
                std::to_string(units.size()) + " units");
  }
  std::lock_guard lock(read_mutex_);
  features_.clear();
  features_.seekg(static_cast<std::streamoff>(it->second));
  const auto T = read_pod<std::uint32_t>(features_);
  if (T != units.size()) throw Error("activation cache key collision");
  LayerStack stack;
  std::vector<float> buf(static_cast<std::size_t>(T) * hidden_);
  for (std::size_t l = 0; l <= layers_; ++l) {
    features_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!features_) throw Error("truncated activation cache");
    stack.layers.push_back(
        Eigen::Map<Eigen::MatrixXf>(buf.data(), static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(T))
            .cast<double>());
  }
  return stack;
}

std::unique_ptr<EncoderBackend> make_backend(const std::string& identity, const std::filesystem::path& backend_dir) {
  if (auto opts = TinyContextBackend::parse_identity(identity)) return std::make_unique<TinyContextBackend>(*opts);
  if (backend_dir.empty()) {
    throw Error("backend '" + identity + "' needs a weights directory (set HUMOR_BACKEND_DIR)");
  }
  return std::make_unique<CachedFeatureBackend>(identity, backend_dir / identity);
}

std::filesystem::path default_backend_dir() {
  const char* dir = std::getenv("HUMOR_BACKEND_DIR");
  return dir ? std::filesystem::path(dir) : std::filesystem::path();
}

}  // namespace humor
