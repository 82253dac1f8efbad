#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace humor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A trainable tensor and its gradient accumulator (same shape).
struct Tensor {
  Matrix value;
  Matrix grad;

  Tensor() = default;
  explicit Tensor(Matrix init) : value(std::move(init)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

// Global L2 norm over all gradients.
double grad_norm(const std::vector<NamedTensor>& params);

// Rescales all gradients so the global norm is at most `max_norm`; returns the
// norm before clipping.
double clip_grad_norm(const std::vector<NamedTensor>& params, double max_norm);

// Adam with bias correction. State is keyed by position in the parameter list,
// which must not change between steps.
class Adam {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  explicit Adam(Options opts) : opts_(opts) {}

  void step(const std::vector<NamedTensor>& params, double learning_rate);
  std::int64_t steps() const { return t_; }

 private:
  Options opts_;
  std::int64_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

// FNV-1a over the raw bytes of the values, in order.
std::uint64_t checksum(const std::vector<const Matrix*>& values);

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace humor
