#include "humor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "humor/error.hpp"

namespace humor {

double rmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.empty()) throw Error("rmse of an empty input");
  if (predicted.size() != truth.size()) throw Error("rmse: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - truth[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

MaybeReal pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("correlation: length mismatch");
  if (a.size() < 2) throw Error("correlation needs at least two points");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

MaybeReal spearman(std::span<const double> predicted, std::span<const double> truth) {
  const auto rp = average_ranks(predicted);
  const auto rt = average_ranks(truth);
  return pearson(rp, rt);
}

MaybeReal accuracy(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) throw Error("accuracy: length mismatch");
  std::size_t n = 0, correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] != 1 && predicted[i] != 2) throw Error("predicted label outside {1,2}");
    if (gold[i] == 0) continue;
    ++n;
    if (gold[i] == predicted[i]) ++correct;
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(n);
}

MaybeReal reward(std::span<const int> gold, std::span<const int> predicted, std::span<const double> z1,
                 std::span<const double> z2) {
  if (gold.size() != predicted.size() || gold.size() != z1.size() || gold.size() != z2.size()) {
    throw Error("reward: length mismatch");
  }
  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == 0) continue;
    ++n;
    const double gap = std::abs(z1[i] - z2[i]);
    sum += gold[i] == predicted[i] ? gap : -gap;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

Task1Metrics evaluate_task1(std::span<const double> predicted, std::span<const double> truth) {
  Task1Metrics m;
  m.rmse = rmse(predicted, truth);
  m.spearman = predicted.size() >= 2 ? spearman(predicted, truth) : std::nullopt;
  m.n = predicted.size();
  return m;
}

Task2Metrics evaluate_task2(std::span<const int> gold_labels, std::span<const int> predicted_labels,
                            std::span<const std::optional<double>> gold1, std::span<const std::optional<double>> gold2,
                            std::span<const double> predicted1, std::span<const double> predicted2) {
  const std::size_t n = gold_labels.size();
  if (predicted_labels.size() != n || gold1.size() != n || gold2.size() != n || predicted1.size() != n ||
      predicted2.size() != n) {
    throw Error("evaluate_task2: length mismatch");
  }
  Task2Metrics m;
  m.n_pairs = n;
  m.accuracy = accuracy(gold_labels, predicted_labels);
  m.n_evaluated = static_cast<std::size_t>(std::count_if(gold_labels.begin(), gold_labels.end(), [](int y) { return y != 0; }));

  std::vector<int> gold_r, pred_r;
  std::vector<double> z1, z2, pooled_pred, pooled_gold;
  for (std::size_t i = 0; i < n; ++i) {
    if (gold1[i]) {
      pooled_pred.push_back(predicted1[i]);
      pooled_gold.push_back(*gold1[i]);
    }
    if (gold2[i]) {
      pooled_pred.push_back(predicted2[i]);
      pooled_gold.push_back(*gold2[i]);
    }
    if (gold1[i] && gold2[i]) {
      gold_r.push_back(gold_labels[i]);
      pred_r.push_back(predicted_labels[i]);
      z1.push_back(*gold1[i]);
      z2.push_back(*gold2[i]);
    }
  }
  m.reward = reward(gold_r, pred_r, z1, z2);
  m.n_scored = pooled_pred.size();
  if (!pooled_pred.empty()) m.rmse = rmse(pooled_pred, pooled_gold);
  return m;
}

MaybeReal MetricsReport::primary() const {
  if (subtask == 1 && task1) return task1->rmse;
  if (subtask == 2 && task2) return task2->accuracy;
  return std::nullopt;
}

std::string format_real(const MaybeReal& value, int precision) {
  if (!value) return "n/a";
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << *value;
  std::string text = out.str();
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) text.erase(0, 1);
  return text;
}

std::string MetricsReport::render_text() const {
  std::ostringstream out;
  auto row = [&](const std::string& name, const std::string& value, std::size_t n) {
    out << std::left << std::setw(12) << name << std::right << std::setw(8) << value << "   (n=" << n << ")\n";
  };
  out << "Subtask " << subtask << "\n";
  if (task1) {
    row("RMSE", format_real(task1->rmse), task1->n);
    row("Spearman", format_real(task1->spearman), task1->n);
  }
  if (task2) {
    row("Accuracy", format_real(task2->accuracy), task2->n_evaluated);
    row("Reward", format_real(task2->reward), task2->n_evaluated);
    row("RMSE", format_real(task2->rmse), task2->n_scored);
  }
  return out.str();
}

namespace {

nlohmann::json maybe(const MaybeReal& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["subtask"] = subtask;
  if (task1) {
    j["rmse"] = task1->rmse;
    j["spearman"] = maybe(task1->spearman);
    j["n"] = task1->n;
  }
  if (task2) {
    j["accuracy"] = maybe(task2->accuracy);
    j["reward"] = maybe(task2->reward);
    j["rmse"] = maybe(task2->rmse);
    j["n_pairs"] = task2->n_pairs;
    j["n_evaluated"] = task2->n_evaluated;
    j["n_scored"] = task2->n_scored;
    j["reward_population"] = kRewardPopulation;
  }
  return j;
}

CorrelationMatrix correlation_matrix(const std::vector<std::pair<std::string, std::vector<double>>>& systems) {
  if (systems.size() < 2) throw Error("correlation matrix needs at least two systems");
  const std::size_t len = systems.front().second.size();
  for (const auto& [name, scores] : systems) {
    if (scores.size() != len) throw Error("correlation matrix: system '" + name + "' has a different length");
  }
  CorrelationMatrix m;
  const std::size_t n = systems.size();
  m.values.assign(n, std::vector<MaybeReal>(n));
  for (std::size_t i = 0; i < n; ++i) {
    m.names.push_back(systems[i].first);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = systems[i].second;
      const auto& b = systems[j].second;
      m.values[i][j] = i > j ? pearson(a, b) : spearman(a, b);
    }
  }
  return m;
}

std::string CorrelationMatrix::render(int precision) const {
  std::size_t width = 6;
  for (const auto& name : names) width = std::max(width, name.size() + 2);
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "";
  for (const auto& name : names) out << std::right << std::setw(static_cast<int>(width)) << name;
  out << "\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width)) << names[i];
    for (std::size_t j = 0; j < names.size(); ++j) {
      const std::string cell = i == j ? "/" : format_real(values[i][j], precision);
      out << std::right << std::setw(static_cast<int>(width)) << cell;
    }
    out << "\n";
  }
  out << "(lower triangle: Pearson; upper triangle: Spearman)\n";
  return out.str();
}

nlohmann::json CorrelationMatrix::to_json() const {
  nlohmann::json j;
  j["names"] = names;
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t j2 = 0; j2 < names.size(); ++j2) row.push_back(i == j2 ? nlohmann::json("/") : maybe(values[i][j2]));
    rows.push_back(row);
  }
  j["values"] = rows;
  j["lower"] = "pearson";
  j["upper"] = "spearman";
  return j;
}

}  // namespace humor
