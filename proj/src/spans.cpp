#include "humor/spans.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "humor/error.hpp"

namespace humor {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 11> kPrefixes = {
    "\xE2\x80\x9C", "\xE2\x80\x98", "\"", "'", "(", "[", "{", "$", "#", "`", "\xC2\xA3"};

constexpr std::array<std::string_view, 16> kSuffixPunct = {
    "...", "\xE2\x80\xA6", "\xE2\x80\x9D", "\xE2\x80\x99", ",", ".", "!", "?", ";", ":", ")", "]", "}", "\"", "'", "%"};

// Checked in order, so "n't" must precede shorter forms sharing its tail.
constexpr std::array<std::string_view, 14> kClitics = {
    "n't", "n\xE2\x80\x99t", "'s", "\xE2\x80\x99s", "'re", "\xE2\x80\x99re", "'ve", "\xE2\x80\x99ve",
    "'ll", "\xE2\x80\x99ll", "'m",  "\xE2\x80\x99m", "'d", "\xE2\x80\x99d"};

constexpr std::array<std::string_view, 14> kAbbreviations = {
    "Mr", "Mrs", "Ms", "Dr", "St", "Jr", "Sr", "vs", "Gov", "Sen", "Rep", "Gen", "Lt", "Inc"};

bool iequals_suffix(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  auto tail = s.substr(s.size() - suffix.size());
  return std::equal(tail.begin(), tail.end(), suffix.begin(), suffix.end(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  });
}

bool keeps_period(std::string_view body) {
  if (body.empty()) return false;
  if (body.find('.') != std::string_view::npos) return true;  // U.S, L.A
  if (body.size() == 1 && is_alpha(body[0])) return true;     // initials
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), body) != kAbbreviations.end();
}

void split_hyphens(std::string_view core, Words& out) {
  std::size_t begin = 0;
  for (std::size_t i = 1; i + 1 < core.size(); ++i) {
    if (core[i] == '-' && is_alnum(core[i - 1]) && is_alnum(core[i + 1])) {
      out.emplace_back(core.substr(begin, i - begin));
      out.emplace_back("-");
      begin = i + 1;
    }
  }
  out.emplace_back(core.substr(begin));
}

void tokenize_chunk(std::string_view chunk, Words& out) {
  bool progressed = true;
  while (!chunk.empty() && progressed) {
    progressed = false;
    for (auto p : kPrefixes) {
      if (chunk.size() > p.size() && chunk.starts_with(p)) {
        // A leading apostrophe that begins a clitic-only chunk stays attached.
        if (p == "'" && (iequals_suffix(chunk, "'s") && chunk.size() == 2)) break;
        out.emplace_back(p);
        chunk.remove_prefix(p.size());
        progressed = true;
        break;
      }
    }
  }

  Words suffixes;
  progressed = true;
  while (!chunk.empty() && progressed) {
    progressed = false;
    for (auto s : kSuffixPunct) {
      if (chunk.size() > s.size() && chunk.ends_with(s)) {
        auto body = chunk.substr(0, chunk.size() - s.size());
        if (s == "." && keeps_period(body)) continue;
        suffixes.emplace_back(s);
        chunk = body;
        progressed = true;
        break;
      }
    }
    if (progressed) continue;
    for (auto c : kClitics) {
      if (chunk.size() > c.size() && iequals_suffix(chunk, c)) {
        suffixes.emplace_back(chunk.substr(chunk.size() - c.size()));
        chunk.remove_suffix(c.size());
        progressed = true;
        break;
      }
    }
  }

  if (!chunk.empty()) split_hyphens(chunk, out);
  out.insert(out.end(), suffixes.rbegin(), suffixes.rend());
}

}  // namespace

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Words word_tokenize(std::string_view text) {
  Words out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) tokenize_chunk(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

std::pair<AlignedSequence, SubwordSpan> subword_align(const Words& words, Span word_span,
                                                      const SubwordFn& subword_fn) {
  if (word_span.start < 1 || word_span.start > word_span.end || word_span.end > words.size()) {
    throw Error("word span [" + std::to_string(word_span.start) + "," + std::to_string(word_span.end) +
                "] out of range for " + std::to_string(words.size()) + " words");
  }
  AlignedSequence seq;
  seq.word_boundaries.reserve(words.size());
  for (std::size_t w = 0; w < words.size(); ++w) {
    auto units = subword_fn(words[w], w);
    if (units.empty()) throw Error("word '" + words[w] + "' maps to zero subword units");
    const std::size_t first = seq.units.size();
    seq.units.insert(seq.units.end(), units.begin(), units.end());
    seq.word_boundaries.emplace_back(first, seq.units.size());
  }
  SubwordSpan span;
  span.start = seq.word_boundaries[word_span.start - 1].first + 1;
  span.end = seq.word_boundaries[word_span.end - 1].second;
  span.sequence_length = seq.units.size();
  return {std::move(seq), span};
}

AlignedSequence build_masked(const AlignedSequence& edited, const SubwordSpan& span, Unit mask_unit) {
  if (span.start < 1 || span.start > span.end || span.end > edited.units.size()) {
    throw Error("subword span out of range");
  }
  AlignedSequence out;
  const std::size_t first = span.start - 1;  // 0-based start
  const std::size_t last = span.end;         // 0-based one-past-end
  out.units.assign(edited.units.begin(), edited.units.begin() + static_cast<std::ptrdiff_t>(first));
  out.units.push_back(mask_unit);
  out.units.insert(out.units.end(), edited.units.begin() + static_cast<std::ptrdiff_t>(last), edited.units.end());

  const std::size_t removed = span.size() - 1;
  bool mask_emitted = false;
  for (auto [b, e] : edited.word_boundaries) {
    if (e <= first) {
      out.word_boundaries.emplace_back(b, e);
    } else if (b >= last) {
      out.word_boundaries.emplace_back(b - removed, e - removed);
    } else if (!mask_emitted) {
      out.word_boundaries.emplace_back(first, first + 1);
      mask_emitted = true;
    }
  }
  if (!mask_emitted) out.word_boundaries.emplace_back(first, first + 1);
  std::sort(out.word_boundaries.begin(), out.word_boundaries.end());
  return out;
}

void truncate_right(std::vector<Unit>& units, const SubwordSpan& span, std::size_t max_length) {
  if (units.size() <= max_length) return;
  if (span.end > max_length) {
    throw Error("sequence of " + std::to_string(units.size()) + " units exceeds max length " +
                std::to_string(max_length) + " and truncation would cut the span ending at " +
                std::to_string(span.end));
  }
  units.resize(max_length);
}

WordPiece WordPiece::from_vocab_lines(const std::vector<std::string>& lines, bool lower_case,
                                      std::string unk_token, std::size_t max_chars_per_word) {
  WordPiece wp;
  wp.lower_case_ = lower_case;
  wp.max_chars_ = max_chars_per_word;
  wp.tokens_.reserve(lines.size());
  for (const auto& raw : lines) {
    std::string tok = raw;
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == '\n')) tok.pop_back();
    const auto id = static_cast<Unit>(wp.tokens_.size());
    wp.index_.emplace(tok, id);  // first occurrence wins
    wp.tokens_.push_back(std::move(tok));
  }
  auto it = wp.index_.find(unk_token);
  if (it == wp.index_.end()) throw Error("vocabulary lacks unknown token " + unk_token);
  wp.unk_ = it->second;
  return wp;
}

bool WordPiece::contains(std::string_view token) const { return index_.find(token) != index_.end(); }

Unit WordPiece::id(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw Error("token not in vocabulary: " + std::string(token));
  return it->second;
}

std::vector<Unit> WordPiece::tokenize(std::string_view word) const {
  const std::string text = lower_case_ ? ascii_lower(word) : std::string(word);
  if (text.size() > max_chars_) return {unk_};
  std::vector<Unit> out;
  std::size_t start = 0;
  std::string candidate;
  while (start < text.size()) {
    std::size_t end = text.size();
    const std::pair<const std::string, Unit>* match = nullptr;
    while (start < end) {
      candidate.assign(start > 0 ? "##" : "");
      candidate.append(text, start, end - start);
      auto it = index_.find(candidate);
      if (it != index_.end()) {
        match = &*it;
        break;
      }
      --end;
    }
    if (!match) return {unk_};
    out.push_back(match->second);
    start = end;
  }
  return out;
}

}  // namespace humor
