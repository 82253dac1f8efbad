#include "support/oracles.hpp"

#include <cmath>

namespace humor::oracle {

std::vector<double> quadratic_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      if (j != i && v[j] == v[i]) equal += 1;
    }
    r[i] = 1 + less + equal / 2;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(quadratic_ranks(a), quadratic_ranks(b));
}

std::optional<double> reward(const std::vector<int>& gold, const std::vector<int>& pred, const std::vector<double>& z1,
                             const std::vector<double>& z2) {
  double total = 0;
  int n = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == 0) continue;
    ++n;
    total += (gold[i] == pred[i] ? 1.0 : -1.0) * std::fabs(z1[i] - z2[i]);
  }
  if (n == 0) return std::nullopt;
  return total / n;
}

std::vector<double> fuse(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> h;
  for (double v : x) h.push_back(v);
  for (double v : y) h.push_back(v);
  for (std::size_t i = 0; i < x.size(); ++i) h.push_back(std::fabs(x[i] - y[i]));
  for (std::size_t i = 0; i < x.size(); ++i) h.push_back(x[i] * y[i]);
  return h;
}

}  // namespace humor::oracle
