#include "humor/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "humor/corpus.hpp"
#include "humor/error.hpp"

namespace humor {

Vector fuse_pair(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw Error("fuse width mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  const auto d = x.size();
  Vector h(4 * d);
  h.segment(0, d) = x;
  h.segment(d, d) = y;
  h.segment(2 * d, d) = (x - y).cwiseAbs();
  h.segment(3 * d, d) = x.cwiseProduct(y);
  return h;
}

std::pair<Vector, Vector> fuse_pair_backward(const Vector& x, const Vector& y, const Vector& grad_h) {
  const auto d = x.size();
  const Vector sign = (x - y).unaryExpr([](double t) { return static_cast<double>((t > 0) - (t < 0)); });
  const Vector g_abs = grad_h.segment(2 * d, d).cwiseProduct(sign);
  const Vector g_prod = grad_h.segment(3 * d, d);
  Vector dx = grad_h.segment(0, d) + g_abs + g_prod.cwiseProduct(y);
  Vector dy = grad_h.segment(d, d) - g_abs + g_prod.cwiseProduct(x);
  return {std::move(dx), std::move(dy)};
}

FusionFeature fuse(const SpanEmbeddings& spans, FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Context:
      return {fuse_pair(spans.u, spans.v), mode};
    case FeatureMode::Original:
      return {fuse_pair(spans.u, spans.v_prime), mode};
    case FeatureMode::Edit:
      return {spans.u, mode};
  }
  throw Error("unknown feature mode");
}

std::size_t fusion_width(std::size_t d, FeatureMode mode) { return mode == FeatureMode::Edit ? d : 4 * d; }

namespace {

Matrix fan_in_uniform(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      m(i, j) = (2.0 * u - 1.0) * bound;
    }
  }
  return m;
}

}  // namespace

ScoreHead::ScoreHead(HeadKind kind, std::size_t input_width, std::uint64_t seed, std::size_t hidden)
    : kind_(kind), input_width_(input_width) {
  if (input_width == 0) throw Error("score head needs a positive input width");
  std::mt19937_64 gen(seed);
  const auto in = static_cast<Eigen::Index>(input_width);
  if (kind == HeadKind::Mlp) {
    const auto hid = static_cast<Eigen::Index>(hidden);
    hidden_w = Tensor(fan_in_uniform(gen, hid, in));
    hidden_b = Tensor(Matrix::Zero(hid, 1));
    out_w = Tensor(fan_in_uniform(gen, 1, hid));
  } else {
    out_w = Tensor(fan_in_uniform(gen, 1, in));
  }
  out_b = Tensor(Matrix::Zero(1, 1));
}

double ScoreHead::forward(const Vector& h, Trace* trace) const {
  if (static_cast<std::size_t>(h.size()) != input_width_) {
    throw Error("score head expects width " + std::to_string(input_width_) + ", got " + std::to_string(h.size()));
  }
  if (kind_ == HeadKind::Linear) {
    if (trace) trace->input = h;
    return out_w.value.row(0).dot(h) + out_b.value(0, 0);
  }
  Vector hidden = (hidden_w.value * h + hidden_b.value.col(0)).array().tanh().matrix();
  const double z = out_w.value.row(0).dot(hidden) + out_b.value(0, 0);
  if (trace) {
    trace->input = h;
    trace->hidden = std::move(hidden);
  }
  return z;
}

Vector ScoreHead::backward(const Trace& trace, double grad_out) {
  out_b.grad(0, 0) += grad_out;
  if (kind_ == HeadKind::Linear) {
    out_w.grad.row(0) += grad_out * trace.input.transpose();
    return grad_out * out_w.value.row(0).transpose();
  }
  out_w.grad.row(0) += grad_out * trace.hidden.transpose();
  const Vector da = grad_out * out_w.value.row(0).transpose().cwiseProduct(
                                   (1.0 - trace.hidden.array().square()).matrix());
  hidden_w.grad += da * trace.input.transpose();
  hidden_b.grad.col(0) += da;
  return hidden_w.value.transpose() * da;
}

std::vector<NamedTensor> ScoreHead::parameters() {
  if (kind_ == HeadKind::Linear) return {{"head.out_w", &out_w}, {"head.out_b", &out_b}};
  return {{"head.hidden_w", &hidden_w}, {"head.hidden_b", &hidden_b}, {"head.out_w", &out_w}, {"head.out_b", &out_b}};
}

double loss_task1(std::span<const double> gold, std::span<const double> predicted) {
  if (gold.empty()) throw Error("loss over an empty batch");
  if (gold.size() != predicted.size()) throw Error("loss: gold and predicted lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const double e = predicted[i] - gold[i];
    sum += e * e;
  }
  return sum / static_cast<double>(gold.size());
}

double loss_task2(std::span<const double> gold1, std::span<const double> gold2,
                  std::span<const double> predicted1, std::span<const double> predicted2) {
  return loss_task1(gold1, predicted1) + loss_task1(gold2, predicted2);
}

int predict_label(double score1, double score2) {
  if (!std::isfinite(score1) || !std::isfinite(score2)) throw Error("non-finite score in pair prediction");
  return score2 > score1 ? 2 : 1;
}

double clamp_grade(double z) { return std::clamp(z, kMinGrade, kMaxGrade); }

}  // namespace humor
