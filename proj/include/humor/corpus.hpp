#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "humor/spans.hpp"

namespace humor {

inline constexpr std::string_view kMaskWord = "[MASK]";
inline constexpr double kMinGrade = 0.0;
inline constexpr double kMaxGrade = 3.0;

// One graded micro-edit. `original_text` marks the replaced region as
// "<words/>"; `grades` holds the raw per-annotator digits and is not used for
// training.
struct HeadlineInstance {
  std::string id;
  std::string original_text;
  std::string edit_word;
  std::string grades;
  std::optional<double> mean_grade;

  bool labeled() const { return mean_grade.has_value(); }
};

// Two edits of the same headline; label 1 or 2 names the funnier one, 0 a tie.
struct PairInstance {
  std::string id;
  HeadlineInstance first;
  HeadlineInstance second;
  std::optional<int> label;

  bool scored() const { return first.labeled() && second.labeled(); }
};

// The original headline split around its "<.../>" region.
struct DelimitedHeadline {
  std::string prefix;
  std::string region;
  std::string suffix;
};

DelimitedHeadline split_delimited(std::string_view original_text);

// Full edited headline text (region replaced by the edit word).
std::string edited_text(const HeadlineInstance& instance);

struct SentenceTriple {
  Words original_tokens;
  Words edited_tokens;
  Words context_tokens;  // exactly one kMaskWord, at context_span.start
  Span original_span;    // [i, j]
  Span edit_span;        // [i, k]
  Span context_span;     // [i, i]
};

std::vector<HeadlineInstance> parse_task1(std::istream& in);
std::vector<PairInstance> parse_task2(std::istream& in);

SentenceTriple build_triple(const HeadlineInstance& instance, const WordTokenizer& tokenizer = word_tokenize);

// Training rows first, then the extra rows; no deduplication.
template <typename T>
std::vector<T> merge_extra(std::vector<T> train, const std::vector<T>& extra) {
  train.insert(train.end(), extra.begin(), extra.end());
  return train;
}

}  // namespace humor
