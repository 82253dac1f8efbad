#include "humor/params.hpp"

#include <cmath>

#include "humor/error.hpp"

namespace humor {

double grad_norm(const std::vector<NamedTensor>& params) {
  double sq = 0.0;
  for (const auto& p : params) sq += p.tensor->grad.squaredNorm();
  return std::sqrt(sq);
}

double clip_grad_norm(const std::vector<NamedTensor>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (const auto& p : params) p.tensor->grad *= scale;
  }
  return norm;
}

void Adam::step(const std::vector<NamedTensor>& params, double learning_rate) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.tensor->value.rows(), p.tensor->value.cols()));
      v_.push_back(Matrix::Zero(p.tensor->value.rows(), p.tensor->value.cols()));
    }
  }
  if (m_.size() != params.size()) throw Error("optimizer parameter list changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& g = params[i].tensor->grad;
    m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g;
    v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g.cwiseProduct(g);
    const double step = learning_rate / bc1;
    const double denom_scale = 1.0 / std::sqrt(bc2);
    params[i].tensor->value.array() -=
        step * m_[i].array() / ((v_[i].array().sqrt() * denom_scale) + opts_.eps);
  }
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t checksum(const std::vector<const Matrix*>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Matrix* m : values) {
    h = fnv1a(m->data(), static_cast<std::size_t>(m->size()) * sizeof(double), h);
  }
  return h;
}

}  // namespace humor
