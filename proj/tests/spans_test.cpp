#include "humor/spans.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <random>

#include "humor/backends.hpp"
#include "humor/error.hpp"

using namespace humor;

namespace {

std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(HUMOR_TEST_DATA) / name; }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string join_tab(const Words& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) out += (i ? "\t" : "") + words[i];
  return out;
}

// Fixed subword splits for named words; everything else is one unit.
SubwordFn table_fn(std::map<std::string, std::size_t> pieces) {
  return [pieces = std::move(pieces)](std::string_view w, std::size_t) {
    auto it = pieces.find(std::string(w));
    std::size_t n = it == pieces.end() ? 1 : it->second;
    std::vector<Unit> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<Unit>(100 + w.size() * 10 + i));
    return out;
  };
}

}  // namespace

TEST(WordTokenize, EditedMonkeyHeadline) {
  EXPECT_EQ(word_tokenize("California and Monkeys are going to war").size(), 7u);
  EXPECT_TRUE(word_tokenize("").empty());
  EXPECT_TRUE(word_tokenize("   ").empty());
}

TEST(WordTokenize, SplitsPunctuationAndClitics) {
  EXPECT_EQ(word_tokenize("Gene Cernan, last astronaut on the Moon, dies at 82").size(), 12u);
  EXPECT_EQ(word_tokenize("doesn't"), (Words{"does", "n't"}));
  EXPECT_EQ(word_tokenize("Trump's"), (Words{"Trump", "'s"}));
  EXPECT_EQ(word_tokenize("U.S."), (Words{"U.S."}));
  EXPECT_EQ(word_tokenize("(again)"), (Words{"(", "again", ")"}));
}

TEST(WordTokenize, MatchesGoldenFile) {
  auto inputs = read_lines(data_path("tokenize_inputs.txt"));
  ASSERT_FALSE(inputs.empty());
  std::vector<std::string> actual;
  for (const auto& line : inputs) actual.push_back(join_tab(word_tokenize(line)));
  if (std::getenv("HUMOR_UPDATE_GOLDEN")) {
    std::ofstream out(data_path("tokenize_golden.tsv"));
    for (const auto& line : actual) out << line << '\n';
    GTEST_SKIP() << "golden file rewritten";
  }
  auto golden = read_lines(data_path("tokenize_golden.tsv"));
  ASSERT_EQ(golden.size(), actual.size());
  for (std::size_t i = 0; i < golden.size(); ++i) EXPECT_EQ(actual[i], golden[i]) << "input: " << inputs[i];
}

TEST(WordTokenize, KeepsVisibleCharacters) {
  for (const auto& line : read_lines(data_path("tokenize_inputs.txt"))) {
    std::string squeezed, joined;
    for (char c : line)
      if (c != ' ') squeezed += c;
    for (const auto& w : word_tokenize(line)) joined += w;
    EXPECT_EQ(joined, squeezed);
  }
}

TEST(SubwordAlign, TwoPieceWord) {
  Words words{"What", "if", "donkeys", "had"};
  auto [seq, span] = subword_align(words, {3, 3}, table_fn({{"donkeys", 2}}));
  EXPECT_EQ(span.size(), 2u);
  EXPECT_EQ(span.start, 3u);
  EXPECT_EQ(span.sequence_length, 5u);
  EXPECT_EQ(seq.units.size(), 5u);
}

TEST(SubwordAlign, TinyBackendSplitsDonkeys) {
  TinyContextBackend tiny({});
  EXPECT_EQ(tiny.subword("donkeys", 2).size(), 2u);
  auto [seq, span] = subword_align({"a", "donkeys"}, {2, 2}, tiny.subword_fn());
  EXPECT_EQ(span.size(), 2u);
}

TEST(SubwordAlign, SingleUnitWord) {
  auto [seq, span] = subword_align({"a", "b", "c"}, {2, 2}, table_fn({}));
  EXPECT_EQ(span.start, span.end);
  EXPECT_EQ(span.start, 2u);
}

TEST(SubwordAlign, MultiWordSpanSumsPieces) {
  Words words{"California", "and", "President", "Trump", "are"};
  auto fn = table_fn({{"California", 3}, {"President", 2}, {"Trump", 2}});
  auto [seq, span] = subword_align(words, {3, 4}, fn);
  std::size_t before = fn("California", 0).size() + fn("and", 1).size();
  std::size_t inside = fn("President", 2).size() + fn("Trump", 3).size();
  EXPECT_EQ(span.start, before + 1);
  EXPECT_EQ(span.size(), inside);
  std::vector<Unit> concat;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto u = fn(words[i], i);
    concat.insert(concat.end(), u.begin(), u.end());
  }
  EXPECT_EQ(seq.units, concat);
}

TEST(SubwordAlign, Errors) {
  SubwordFn empty_for_b = [](std::string_view w, std::size_t) {
    return w == "b" ? std::vector<Unit>{} : std::vector<Unit>{1};
  };
  EXPECT_THROW(subword_align({"a", "b"}, {1, 1}, empty_for_b), Error);
  EXPECT_THROW(subword_align({"a"}, {1, 2}, table_fn({})), Error);
  EXPECT_THROW(subword_align({"a", "b"}, {2, 1}, table_fn({})), Error);
}

TEST(SubwordAlign, FullRangeCoversEverythingOnce) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    Words words;
    std::map<std::string, std::size_t> pieces;
    const std::size_t n = 1 + gen() % 10;
    for (std::size_t i = 0; i < n; ++i) {
      words.push_back("w" + std::to_string(i));
      pieces[words.back()] = 1 + gen() % 4;
    }
    auto [seq, span] = subword_align(words, {1, n}, table_fn(pieces));
    EXPECT_EQ(span.start, 1u);
    EXPECT_EQ(span.end, seq.units.size());
    std::size_t cursor = 0;
    for (const auto& [first, last] : seq.word_boundaries) {
      EXPECT_EQ(first, cursor);
      EXPECT_LT(first, last);
      cursor = last;
    }
    EXPECT_EQ(cursor, seq.units.size());
  }
}

TEST(BuildMasked, LengthArithmetic) {
  AlignedSequence seq;
  for (Unit u = 10; u < 19; ++u) {
    seq.word_boundaries.emplace_back(seq.units.size(), seq.units.size() + 1);
    seq.units.push_back(u);
  }
  auto masked = build_masked(seq, {4, 5, 9}, -1);
  ASSERT_EQ(masked.units.size(), 8u);
  EXPECT_EQ(masked.units[3], -1);
  EXPECT_EQ(std::count(masked.units.begin(), masked.units.end(), -1), 1);

  auto same = build_masked(seq, {6, 6, 9}, -1);
  EXPECT_EQ(same.units.size(), 9u);
  EXPECT_EQ(same.units[5], -1);
  auto again = build_masked(same, {6, 6, 9}, -1);
  EXPECT_EQ(again.units, same.units);
  EXPECT_EQ(again.word_boundaries, same.word_boundaries);
}

TEST(BuildMasked, OutsideUnitsUnchanged) {
  std::mt19937 gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    Words words;
    std::map<std::string, std::size_t> pieces;
    const std::size_t n = 2 + gen() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      words.push_back("x" + std::to_string(i));
      pieces[words.back()] = 1 + gen() % 3;
    }
    const std::size_t i = 1 + gen() % n;
    const std::size_t j = i + gen() % (n - i + 1);
    auto [seq, span] = subword_align(words, {i, j}, table_fn(pieces));
    auto masked = build_masked(seq, span, -7);
    ASSERT_EQ(masked.units.size(), seq.units.size() - span.size() + 1);
    for (std::size_t k = 0; k + 1 < span.start; ++k) EXPECT_EQ(masked.units[k], seq.units[k]);
    EXPECT_EQ(masked.units[span.start - 1], -7);
    for (std::size_t k = span.end; k < seq.units.size(); ++k)
      EXPECT_EQ(masked.units[k - span.size() + 1], seq.units[k]);
    EXPECT_EQ(masked.word_boundaries.size(), n - (j - i));
  }
}

TEST(TruncateRight, KeepsSpanOrThrows) {
  std::vector<Unit> units{1, 2, 3, 4, 5, 6};
  auto copy = units;
  truncate_right(copy, {2, 3, 6}, 4);
  EXPECT_EQ(copy, (std::vector<Unit>{1, 2, 3, 4}));
  copy = units;
  truncate_right(copy, {2, 3, 6}, 10);
  EXPECT_EQ(copy, units);
  copy = units;
  EXPECT_THROW(truncate_right(copy, {4, 5, 6}, 4), Error);
}

TEST(WordPiece, GreedyLongestMatch) {
  auto wp = WordPiece::from_vocab_lines({"[PAD]", "[UNK]", "don", "##key", "##keys", "##s", "d", "what"}, true);
  auto units = wp.tokenize("Donkeys");
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(wp.token(units[0]), "don");
  EXPECT_EQ(wp.token(units[1]), "##keys");
  EXPECT_EQ(wp.tokenize("zebra"), (std::vector<Unit>{wp.id("[UNK]")}));
  EXPECT_EQ(wp.tokenize("WHAT"), (std::vector<Unit>{wp.id("what")}));
  EXPECT_TRUE(wp.contains("##s"));
  EXPECT_THROW(wp.id("missing"), Error);

  auto cased = WordPiece::from_vocab_lines({"[UNK]", "what"}, false);
  EXPECT_EQ(cased.tokenize("What"), (std::vector<Unit>{0}));
}
