#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "humor/corpus.hpp"
#include "humor/params.hpp"
#include "humor/spans.hpp"

namespace humor {

enum class Transfer { Freeze, Finetune };
enum class FeatureMode { Context, Original, Edit };

// Static word vectors. Lookup is case-sensitive with a lower-case fallback;
// absent words resolve to the all-zero vector.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension = 0) : d_(dimension) {}

  std::size_t dimension() const { return d_; }
  std::size_t size() const { return words_.size(); }

  // Adds a row; returns false (and leaves the table unchanged) for a duplicate.
  bool add(std::string word, std::span<const double> values);

  // Row index after the case fallback, nullopt when OOV.
  std::optional<std::size_t> find(std::string_view word) const;
  Vector lookup(std::string_view word) const;

  const std::string& word(std::size_t row) const { return words_[row]; }
  // Column `row` holds the vector of word(row).
  const Matrix& matrix() const;
  void set_row(std::size_t row, const Vector& values);

 private:
  std::size_t d_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> words_;
  std::vector<double> data_;
  mutable Matrix matrix_;
  mutable bool dirty_ = true;
};

struct EmbeddingLoadReport {
  std::size_t lines = 0;
  std::size_t skipped_by_filter = 0;
  std::vector<std::size_t> duplicate_lines;  // one warning per duplicate row
};

// Reads "word x_1 ... x_d" lines. When `keep` is given, only words it accepts
// are stored (the whole file is still validated). Throws ParseError naming the
// line for a wrong value count.
EmbeddingTable load_embeddings(std::istream& in, std::size_t expected_d,
                               const std::function<bool(std::string_view)>& keep = {},
                               EmbeddingLoadReport* report = nullptr);

// Filter accepting the listed words and their lower-case forms.
std::function<bool(std::string_view)> vocabulary_filter(const std::vector<Words>& sentences);

Vector mean_pool(std::span<const Vector> vectors);
Vector max_pool(std::span<const Vector> vectors);

struct SpanEmbeddings {
  Vector u;        // edit span
  Vector v_prime;  // original span
  Vector v;        // context
};

// Bag-of-words span encoding: u and v' are span means, v is the elementwise
// max over every context word except the mask.
SpanEmbeddings cbow_encode(const SentenceTriple& triple, const EmbeddingTable& table);

// Softmax-normalised layer weights scaled by gamma.
class ScalarMix {
 public:
  explicit ScalarMix(std::size_t layer_count = 1);

  std::size_t layer_count() const { return static_cast<std::size_t>(logits.value.rows()); }
  Vector weights() const;
  double gamma_value() const { return gamma.value(0, 0); }

  // `layers` holds one column per layer (d x (L+1)).
  Vector apply(const Matrix& layers) const;
  Vector apply(std::span<const Vector> layers) const;
  // Accumulates parameter gradients for d(loss)/d(output) = `grad_out`.
  void backward(const Matrix& layers, const Vector& grad_out);

  std::vector<NamedTensor> parameters() { return {{"mix.logits", &logits}, {"mix.gamma", &gamma}}; }

  Tensor logits;  // (L+1) x 1, initialised to 0
  Tensor gamma;   // 1 x 1, initialised to 1
};

// Per-layer activations; layers[l] is d x T with one column per position and
// l = 0 the embedding layer.
struct LayerStack {
  std::vector<Matrix> layers;
};

// A contextual encoder. One instance encodes every sequence of a pair, so
// both sides share parameters.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual std::string identity() const = 0;
  virtual std::size_t num_layers() const = 0;  // L, excluding the embedding layer
  virtual std::size_t hidden_size() const = 0;
  virtual std::size_t max_length() const = 0;
  virtual std::vector<Unit> subword(std::string_view word, std::size_t word_index) const = 0;
  virtual Unit mask_unit() const = 0;
  virtual std::vector<Unit> prefix_units() const { return {}; }
  virtual std::vector<Unit> suffix_units() const { return {}; }

  virtual LayerStack forward(std::span<const Unit> units) const = 0;

  virtual bool trainable() const { return false; }
  // Accumulates parameter gradients given d(loss)/d(top layer), d x T.
  virtual void backward(std::span<const Unit> units, const LayerStack& activations, const Matrix& top_grad);
  virtual std::vector<NamedTensor> parameters() { return {}; }
  virtual std::uint64_t checksum() const = 0;

  SubwordFn subword_fn() const;
};

// Unit sequences for the three sentences with specials attached; all spans
// and the mask position are 1-based within these final sequences.
struct ContextualInputs {
  std::vector<Unit> original;
  std::vector<Unit> edited;
  std::vector<Unit> context;
  SubwordSpan original_span;
  SubwordSpan edit_span;
  std::size_t mask_position = 0;
};

ContextualInputs prepare_contextual(const SentenceTriple& triple, const EncoderBackend& backend);

// Mean over span positions of each layer: d x (L+1).
Matrix span_layer_means(const LayerStack& stack, std::size_t start, std::size_t end);

// Freeze: every position is the scalar mix of all layers. Finetune (mix ==
// nullptr): the top layer is used. Edit mode leaves v and v_prime empty.
SpanEmbeddings contextual_encode(const SentenceTriple& triple, const EncoderBackend& backend,
                                 FeatureMode mode, const ScalarMix* mix);

}  // namespace humor
