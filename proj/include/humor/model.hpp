#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "humor/encoders.hpp"
#include "humor/params.hpp"

namespace humor {

// h = [x; y; |x - y|; x * y]
Vector fuse_pair(const Vector& x, const Vector& y);

// Gradients of fuse_pair w.r.t. x and y. The |x - y| block uses sign(x - y),
// with zero at equality.
std::pair<Vector, Vector> fuse_pair_backward(const Vector& x, const Vector& y, const Vector& grad_h);

struct FusionFeature {
  Vector h;
  FeatureMode mode;
};

// Context: f(u, v). Original: f(u, v'). Edit: u alone.
FusionFeature fuse(const SpanEmbeddings& spans, FeatureMode mode);

std::size_t fusion_width(std::size_t d, FeatureMode mode);

enum class HeadKind { Mlp, Linear };

// Regression head: either tanh MLP (in -> hidden -> 1) or a single affine map.
class ScoreHead {
 public:
  static constexpr std::size_t kDefaultHidden = 256;

  struct Trace {
    Vector input;
    Vector hidden;
  };

  ScoreHead() = default;
  ScoreHead(HeadKind kind, std::size_t input_width, std::uint64_t seed, std::size_t hidden = kDefaultHidden);

  HeadKind kind() const { return kind_; }
  std::size_t input_width() const { return input_width_; }

  double score(const Vector& h) const { return forward(h, nullptr); }
  double forward(const Vector& h, Trace* trace) const;
  // Accumulates parameter gradients; returns d(loss)/dh.
  Vector backward(const Trace& trace, double grad_out);

  std::vector<NamedTensor> parameters();

  // Layout: MLP uses all four; Linear uses out_w (1 x in) and out_b.
  Tensor hidden_w;
  Tensor hidden_b;
  Tensor out_w;
  Tensor out_b;

 private:
  HeadKind kind_ = HeadKind::Linear;
  std::size_t input_width_ = 0;
};

// Mean over the batch of squared errors.
double loss_task1(std::span<const double> gold, std::span<const double> predicted);

// Sum of the per-member batch losses.
double loss_task2(std::span<const double> gold1, std::span<const double> gold2,
                  std::span<const double> predicted1, std::span<const double> predicted2);

// 1 when the first score is at least the second, else 2.
int predict_label(double score1, double score2);

double clamp_grade(double z);

}  // namespace humor
