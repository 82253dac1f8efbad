#include "humor/encoders.hpp"

#include <charconv>
#include <memory>
#include <cmath>
#include <sstream>

#include "humor/error.hpp"

namespace humor {

bool EmbeddingTable::add(std::string word, std::span<const double> values) {
  if (values.size() != d_) throw Error("embedding width mismatch for '" + word + "'");
  if (index_.contains(word)) return false;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  data_.insert(data_.end(), values.begin(), values.end());
  dirty_ = true;
  return true;
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  const std::string key(word);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const std::string lower = ascii_lower(word);
  if (lower != key) {
    if (auto it = index_.find(lower); it != index_.end()) return it->second;
  }
  return std::nullopt;
}

Vector EmbeddingTable::lookup(std::string_view word) const {
  auto row = find(word);
  if (!row) return Vector::Zero(static_cast<Eigen::Index>(d_));
  return Eigen::Map<const Vector>(data_.data() + *row * d_, static_cast<Eigen::Index>(d_));
}

const Matrix& EmbeddingTable::matrix() const {
  if (dirty_) {
    matrix_ = Eigen::Map<const Matrix>(data_.data(), static_cast<Eigen::Index>(d_),
                                       static_cast<Eigen::Index>(words_.size()));
    dirty_ = false;
  }
  return matrix_;
}

void EmbeddingTable::set_row(std::size_t row, const Vector& values) {
  if (row >= words_.size() || static_cast<std::size_t>(values.size()) != d_) {
    throw Error("embedding row update out of range");
  }
  std::copy(values.data(), values.data() + d_, data_.begin() + static_cast<std::ptrdiff_t>(row * d_));
  dirty_ = true;
}

EmbeddingTable load_embeddings(std::istream& in, std::size_t expected_d,
                               const std::function<bool(std::string_view)>& keep,
                               EmbeddingLoadReport* report) {
  if (expected_d == 0) throw Error("embedding dimension must be positive");
  EmbeddingTable table(expected_d);
  EmbeddingLoadReport local;
  EmbeddingLoadReport& rep = report ? *report : local;
  std::vector<double> values(expected_d);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++rep.lines;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    const char* word_end = p;
    while (word_end < end && *word_end != ' ') ++word_end;
    const std::string_view word(p, static_cast<std::size_t>(word_end - p));
    std::size_t count = 0;
    const char* q = word_end;
    while (q < end) {
      while (q < end && *q == ' ') ++q;
      if (q == end) break;
      double x = 0.0;
      auto [next, ec] = std::from_chars(q, end, x);
      if (ec != std::errc() || (next < end && *next != ' ')) {
        throw ParseError(line_no, "unparsable value in embedding row for '" + std::string(word) + "'");
      }
      if (count < expected_d) values[count] = x;
      ++count;
      q = next;
    }
    if (count != expected_d) {
      throw ParseError(line_no, "expected " + std::to_string(expected_d) + " values, found " +
                                    std::to_string(count));
    }
    if (keep && !keep(word)) {
      ++rep.skipped_by_filter;
      continue;
    }
    if (!table.add(std::string(word), values)) rep.duplicate_lines.push_back(line_no);
  }
  return table;
}

std::function<bool(std::string_view)> vocabulary_filter(const std::vector<Words>& sentences) {
  auto vocab = std::make_shared<std::unordered_set<std::string>>();
  for (const auto& words : sentences) {
    for (const auto& w : words) {
      vocab->insert(w);
      vocab->insert(ascii_lower(w));
    }
  }
  return [vocab](std::string_view word) { return vocab->contains(std::string(word)); };
}

Vector mean_pool(std::span<const Vector> vectors) {
  if (vectors.empty()) throw Error("mean_pool over an empty list");
  Vector acc = vectors.front();
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    if (vectors[i].size() != acc.size()) throw Error("mean_pool width mismatch");
    acc += vectors[i];
  }
  return acc / static_cast<double>(vectors.size());
}

Vector max_pool(std::span<const Vector> vectors) {
  if (vectors.empty()) throw Error("max_pool over an empty list");
  Vector acc = vectors.front();
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    if (vectors[i].size() != acc.size()) throw Error("max_pool width mismatch");
    acc = acc.cwiseMax(vectors[i]);
  }
  return acc;
}

namespace {

std::vector<Vector> lookup_range(const Words& words, Span span, const EmbeddingTable& table) {
  std::vector<Vector> out;
  for (std::size_t pos = span.start; pos <= span.end; ++pos) out.push_back(table.lookup(words[pos - 1]));
  return out;
}

}  // namespace

SpanEmbeddings cbow_encode(const SentenceTriple& triple, const EmbeddingTable& table) {
  if (triple.context_tokens.size() < 2) throw Error("context has no words besides the mask");
  SpanEmbeddings out;
  out.u = mean_pool(lookup_range(triple.edited_tokens, triple.edit_span, table));
  out.v_prime = mean_pool(lookup_range(triple.original_tokens, triple.original_span, table));
  std::vector<Vector> context;
  for (std::size_t pos = 1; pos <= triple.context_tokens.size(); ++pos) {
    if (pos == triple.context_span.start) continue;
    context.push_back(table.lookup(triple.context_tokens[pos - 1]));
  }
  out.v = max_pool(context);
  return out;
}

ScalarMix::ScalarMix(std::size_t layer_count)
    : logits(Matrix::Zero(static_cast<Eigen::Index>(layer_count), 1)), gamma(Matrix::Ones(1, 1)) {
  if (layer_count == 0) throw Error("scalar mix needs at least one layer");
}

Vector ScalarMix::weights() const {
  const Vector z = logits.value.col(0);
  const Vector e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

Vector ScalarMix::apply(const Matrix& layers) const {
  if (static_cast<std::size_t>(layers.cols()) != layer_count()) {
    throw Error("scalar mix expects " + std::to_string(layer_count()) + " layers, got " +
                std::to_string(layers.cols()));
  }
  return gamma_value() * (layers * weights());
}

Vector ScalarMix::apply(std::span<const Vector> layers) const {
  if (layers.size() != layer_count()) {
    throw Error("scalar mix expects " + std::to_string(layer_count()) + " layers, got " +
                std::to_string(layers.size()));
  }
  Matrix m(layers.front().size(), static_cast<Eigen::Index>(layers.size()));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].size() != m.rows()) throw Error("scalar mix layer width mismatch");
    m.col(static_cast<Eigen::Index>(l)) = layers[l];
  }
  return apply(m);
}

void ScalarMix::backward(const Matrix& layers, const Vector& grad_out) {
  const Vector w = weights();
  const Vector unscaled = layers * w;
  gamma.grad(0, 0) += grad_out.dot(unscaled);
  // d/dw_l = gamma * <g, e_l>; softmax Jacobian: dz_k = w_k (dw_k - sum_l w_l dw_l).
  const Vector dw = gamma_value() * (layers.transpose() * grad_out);
  const double centre = w.dot(dw);
  logits.grad.col(0) += w.cwiseProduct((dw.array() - centre).matrix());
}

void EncoderBackend::backward(std::span<const Unit>, const LayerStack&, const Matrix&) {
  throw Error("backend '" + identity() + "' does not support finetuning");
}

SubwordFn EncoderBackend::subword_fn() const {
  return [this](std::string_view word, std::size_t index) { return subword(word, index); };
}

namespace {

struct Framed {
  std::vector<Unit> units;
  SubwordSpan span;
};

Framed frame(const EncoderBackend& backend, std::vector<Unit> body, SubwordSpan span) {
  Framed f;
  f.units = backend.prefix_units();
  const std::size_t offset = f.units.size();
  f.units.insert(f.units.end(), body.begin(), body.end());
  auto suffix = backend.suffix_units();
  f.units.insert(f.units.end(), suffix.begin(), suffix.end());
  f.span = {span.start + offset, span.end + offset, f.units.size()};
  truncate_right(f.units, f.span, backend.max_length());
  f.span.sequence_length = f.units.size();
  return f;
}

}  // namespace

ContextualInputs prepare_contextual(const SentenceTriple& triple, const EncoderBackend& backend) {
  const auto fn = backend.subword_fn();
  auto [original, original_span] = subword_align(triple.original_tokens, triple.original_span, fn);
  auto [edited, edit_span] = subword_align(triple.edited_tokens, triple.edit_span, fn);
  auto context = build_masked(edited, edit_span, backend.mask_unit());
  SubwordSpan mask_span{edit_span.start, edit_span.start, context.units.size()};

  ContextualInputs in;
  auto fo = frame(backend, std::move(original.units), original_span);
  auto fe = frame(backend, std::move(edited.units), edit_span);
  auto fc = frame(backend, std::move(context.units), mask_span);
  in.original = std::move(fo.units);
  in.original_span = fo.span;
  in.edited = std::move(fe.units);
  in.edit_span = fe.span;
  in.context = std::move(fc.units);
  in.mask_position = fc.span.start;
  return in;
}

Matrix span_layer_means(const LayerStack& stack, std::size_t start, std::size_t end) {
  const auto d = stack.layers.front().rows();
  Matrix out(d, static_cast<Eigen::Index>(stack.layers.size()));
  const auto first = static_cast<Eigen::Index>(start - 1);
  const auto count = static_cast<Eigen::Index>(end - start + 1);
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    out.col(static_cast<Eigen::Index>(l)) = stack.layers[l].middleCols(first, count).rowwise().mean();
  }
  return out;
}

SpanEmbeddings contextual_encode(const SentenceTriple& triple, const EncoderBackend& backend,
                                 FeatureMode mode, const ScalarMix* mix) {
  const auto in = prepare_contextual(triple, backend);
  auto pooled = [&](const std::vector<Unit>& units, std::size_t start, std::size_t end) -> Vector {
    const auto stack = backend.forward(units);
    if (mix) return mix->apply(span_layer_means(stack, start, end));
    return stack.layers.back()
        .middleCols(static_cast<Eigen::Index>(start - 1), static_cast<Eigen::Index>(end - start + 1))
        .rowwise()
        .mean();
  };
  SpanEmbeddings out;
  out.u = pooled(in.edited, in.edit_span.start, in.edit_span.end);
  if (mode != FeatureMode::Edit) {
    out.v_prime = pooled(in.original, in.original_span.start, in.original_span.end);
    out.v = pooled(in.context, in.mask_position, in.mask_position);
  }
  return out;
}

}  // namespace humor
