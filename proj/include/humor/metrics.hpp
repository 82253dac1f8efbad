#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace humor {

// Undefined values (zero variance, empty population) are nullopt and render
// as "n/a".
using MaybeReal = std::optional<double>;

double rmse(std::span<const double> predicted, std::span<const double> truth);

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

MaybeReal pearson(std::span<const double> a, std::span<const double> b);
MaybeReal spearman(std::span<const double> predicted, std::span<const double> truth);

// Fraction of correct predictions over pairs whose gold label is not 0.
MaybeReal accuracy(std::span<const int> gold, std::span<const int> predicted);

// (1/N) sum over gold-non-zero pairs of (+1 if correct, -1 otherwise) * |z1 - z2|.
MaybeReal reward(std::span<const int> gold, std::span<const int> predicted, std::span<const double> z1,
                 std::span<const double> z2);

struct Task1Metrics {
  double rmse = 0.0;
  MaybeReal spearman;
  std::size_t n = 0;
};

struct Task2Metrics {
  MaybeReal accuracy;
  MaybeReal reward;
  MaybeReal rmse;            // both members' scores pooled
  std::size_t n_pairs = 0;
  std::size_t n_evaluated = 0;  // gold label != 0
  std::size_t n_scored = 0;     // members entering the RMSE
};

struct MetricsReport {
  int subtask = 1;
  std::optional<Task1Metrics> task1;
  std::optional<Task2Metrics> task2;

  // The primary metric: RMSE (Subtask 1) or accuracy (Subtask 2).
  MaybeReal primary() const;

  std::string render_text() const;
  nlohmann::json to_json() const;
};

// Reward and accuracy both exclude gold ties; recorded in every report.
inline constexpr const char* kRewardPopulation = "gold label != 0 (ties excluded before dividing)";

Task1Metrics evaluate_task1(std::span<const double> predicted, std::span<const double> truth);

// Reward weighs each pair by its gold grade gap. A pair missing a gold grade
// only enters accuracy.
Task2Metrics evaluate_task2(std::span<const int> gold_labels, std::span<const int> predicted_labels,
                            std::span<const std::optional<double>> gold1, std::span<const std::optional<double>> gold2,
                            std::span<const double> predicted1, std::span<const double> predicted2);

// Lower triangle Pearson, upper triangle Spearman, diagonal undefined.
struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<MaybeReal>> values;

  MaybeReal pearson_at(std::size_t i, std::size_t j) const { return values[std::max(i, j)][std::min(i, j)]; }
  MaybeReal spearman_at(std::size_t i, std::size_t j) const { return values[std::min(i, j)][std::max(i, j)]; }

  std::string render(int precision = 2) const;
  nlohmann::json to_json() const;
};

CorrelationMatrix correlation_matrix(const std::vector<std::pair<std::string, std::vector<double>>>& systems);

std::string format_real(const MaybeReal& value, int precision = 3);

}  // namespace humor
