#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace humor {

// Contiguous token range, 1-based and inclusive on both ends.
struct Span {
  std::size_t start = 1;
  std::size_t end = 1;

  std::size_t size() const { return end - start + 1; }
  bool contains(std::size_t pos) const { return pos >= start && pos <= end; }
  bool operator==(const Span&) const = default;
};

using Words = std::vector<std::string>;
using WordTokenizer = std::function<Words(std::string_view)>;

// Rule-based word tokenizer: whitespace split, then leading/trailing
// punctuation, English clitics ('s, n't, ...) and intra-word hyphens are
// split off. Deterministic and locale-independent.
Words word_tokenize(std::string_view text);

// ASCII lower-casing; bytes >= 0x80 pass through unchanged.
std::string ascii_lower(std::string_view text);

using Unit = std::int32_t;

// Maps one word to its subword units. The index is the word's 0-based
// position, for backends that mark word-initial units differently.
using SubwordFn = std::function<std::vector<Unit>(std::string_view word, std::size_t word_index)>;

struct SubwordSpan {
  std::size_t start = 1;  // 1-based
  std::size_t end = 1;    // inclusive
  std::size_t sequence_length = 0;

  std::size_t size() const { return end - start + 1; }
  bool operator==(const SubwordSpan&) const = default;
};

struct AlignedSequence {
  std::vector<Unit> units;
  // Per word, the half-open [first, last) range of 0-based unit indices.
  std::vector<std::pair<std::size_t, std::size_t>> word_boundaries;
};

// Subword-tokenizes word by word and returns the unit range covered by
// `word_span`. Throws if a word maps to zero units or the span is out of range.
std::pair<AlignedSequence, SubwordSpan> subword_align(const Words& words, Span word_span,
                                                      const SubwordFn& subword_fn);

// Replaces the units of `span` by a single `mask_unit`; the masked region
// becomes one word in the boundary table.
AlignedSequence build_masked(const AlignedSequence& edited, const SubwordSpan& span, Unit mask_unit);

// Right-truncates `units` to `max_length`. Throws if the truncation would cut
// into `span` (1-based, inclusive).
void truncate_right(std::vector<Unit>& units, const SubwordSpan& span, std::size_t max_length);

// Greedy longest-match-first WordPiece over a fixed vocabulary, with "##"
// continuation pieces and an unknown-word fallback.
class WordPiece {
 public:
  // One token per line; the line number (0-based) is the unit id.
  static WordPiece from_vocab_lines(const std::vector<std::string>& lines, bool lower_case,
                                    std::string unk_token = "[UNK]",
                                    std::size_t max_chars_per_word = 100);

  std::vector<Unit> tokenize(std::string_view word) const;
  Unit id(std::string_view token) const;  // throws if absent
  bool contains(std::string_view token) const;
  const std::string& token(Unit id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, Unit, std::less<>> index_;
  bool lower_case_ = false;
  Unit unk_ = 0;
  std::size_t max_chars_ = 100;
};

}  // namespace humor
