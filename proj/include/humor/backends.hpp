#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "humor/encoders.hpp"

namespace humor {

// Small self-contained contextual encoder. Layer l mixes every position with
// the sequence mean of layer l-1:
//   h_0[t] = E[unit_t] + P[t]
//   h_l[t] = tanh(W_l h_{l-1}[t] + V_l mean_s h_{l-1}[s] + b_l)
// Words are split into chunks of at most four bytes ("##" marks
// continuations) and hashed into a fixed bucket vocabulary. Parameters are a
// pure function of the seed, so the identity string fully determines a
// freshly constructed instance.
class TinyContextBackend final : public EncoderBackend {
 public:
  struct Options {
    std::size_t layers = 4;
    std::size_t hidden = 32;
    std::size_t buckets = 2048;
    std::size_t max_length = 64;
    std::uint64_t seed = 20200917;
  };

  static constexpr Unit kPad = 0;
  static constexpr Unit kBos = 1;
  static constexpr Unit kEos = 2;
  static constexpr Unit kMask = 3;

  explicit TinyContextBackend(Options opts);

  // "tiny" or "tiny-L<layers>-d<hidden>".
  static std::optional<Options> parse_identity(const std::string& identity);

  std::string identity() const override;
  std::size_t num_layers() const override { return opts_.layers; }
  std::size_t hidden_size() const override { return opts_.hidden; }
  std::size_t max_length() const override { return opts_.max_length; }
  std::vector<Unit> subword(std::string_view word, std::size_t word_index) const override;
  Unit mask_unit() const override { return kMask; }
  std::vector<Unit> prefix_units() const override { return {kBos}; }
  std::vector<Unit> suffix_units() const override { return {kEos}; }

  LayerStack forward(std::span<const Unit> units) const override;

  bool trainable() const override { return true; }
  void backward(std::span<const Unit> units, const LayerStack& activations, const Matrix& top_grad) override;
  std::vector<NamedTensor> parameters() override;
  std::uint64_t checksum() const override;

 private:
  Options opts_;
  Tensor embed_;     // hidden x buckets
  Tensor position_;  // hidden x max_length
  std::vector<Tensor> w_;
  std::vector<Tensor> v_;
  std::vector<Tensor> b_;
};

// Frozen activations of an external encoder, precomputed offline and looked
// up by unit sequence. The directory holds:
//   backend.json  {"num_layers", "hidden_size", "max_length", "lower_case",
//                  "vocab", "features", "mask_token", "unk_token",
//                  "prefix_tokens", "suffix_tokens"}
//   <vocab>       WordPiece vocabulary, one token per line (line = id)
//   <features>    binary activation cache, see write_feature_cache()
class CachedFeatureBackend final : public EncoderBackend {
 public:
  // With `require_features` unset a missing activation file yields an empty
  // cache, which is enough to tokenize inputs for an external encoder.
  CachedFeatureBackend(std::string identity, const std::filesystem::path& dir, bool require_features = true);

  std::string identity() const override { return identity_; }
  std::size_t num_layers() const override { return layers_; }
  std::size_t hidden_size() const override { return hidden_; }
  std::size_t max_length() const override { return max_length_; }
  std::vector<Unit> subword(std::string_view word, std::size_t word_index) const override;
  Unit mask_unit() const override { return mask_; }
  std::vector<Unit> prefix_units() const override { return prefix_; }
  std::vector<Unit> suffix_units() const override { return suffix_; }

  LayerStack forward(std::span<const Unit> units) const override;
  std::uint64_t checksum() const override { return file_checksum_; }

 private:
  std::string identity_;
  std::size_t layers_ = 0;
  std::size_t hidden_ = 0;
  std::size_t max_length_ = 0;
  std::optional<WordPiece> vocab_;
  Unit mask_ = 0;
  std::vector<Unit> prefix_;
  std::vector<Unit> suffix_;
  std::filesystem::path features_path_;
  std::unordered_map<std::uint64_t, std::uint64_t> offsets_;
  std::uint64_t file_checksum_ = 0;
  mutable std::ifstream features_;
  mutable std::mutex read_mutex_;
};

// Key under which a unit sequence's activations are cached.
std::uint64_t sequence_key(std::span<const Unit> units);

// Activation cache layout (little-endian):
//   "HUMF" | u32 version=1 | u32 layer_count (L+1) | u32 hidden | u64 records
//   per record: u64 sequence_key | u32 T | f32[layer_count][T][hidden]
void write_feature_cache(const std::filesystem::path& path, std::size_t layer_count, std::size_t hidden,
                         const std::vector<std::pair<std::vector<Unit>, LayerStack>>& records);

// Resolves a backend identity: built-in "tiny..." encoders, otherwise a
// directory <backend_dir>/<identity>.
std::unique_ptr<EncoderBackend> make_backend(const std::string& identity,
                                             const std::filesystem::path& backend_dir);

// HUMOR_BACKEND_DIR, or empty when unset.
std::filesystem::path default_backend_dir();

}  // namespace humor
