#include "humor/csv.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "humor/error.hpp"

using humor::csv::Reader;
using humor::csv::Record;

namespace {

std::vector<Record> read_all(const std::string& text) {
  std::istringstream in(text);
  Reader reader(in);
  std::vector<Record> out;
  while (auto r = reader.next()) out.push_back(*r);
  return out;
}

}  // namespace

TEST(Csv, PlainAndQuotedFields) {
  auto rows = read_all("a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (Record{"1", "x, y", "say \"hi\""}));
}

TEST(Csv, NewlineInsideQuotesAndCrlf) {
  auto rows = read_all("id,text\r\n7,\"two\nlines\"\r\n8,last");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][1], "two\nlines");
  EXPECT_EQ(rows[2], (Record{"8", "last"}));
}

TEST(Csv, EmptyFieldsSurvive) {
  auto rows = read_all(",,\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (Record{"", "", ""}));
}

TEST(Csv, LineNumbersTrackEmbeddedNewlines) {
  std::istringstream in("h\n\"a\nb\"\nc\n");
  Reader reader(in);
  reader.next();
  reader.next();
  EXPECT_EQ(reader.line(), 2u);
  reader.next();
  EXPECT_EQ(reader.line(), 4u);
}

TEST(Csv, UnterminatedQuoteIsAnError) {
  EXPECT_THROW(read_all("a,\"open\n"), humor::ParseError);
}

TEST(Csv, WriteRoundTrips) {
  Record fields{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  std::ostringstream out;
  humor::csv::write_record(out, fields);
  auto back = read_all(out.str());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], fields);
  EXPECT_EQ(humor::csv::quote_if_needed("plain"), "plain");
}
