#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace humor::csv {

using Record = std::vector<std::string>;

// Streaming RFC-4180 reader: comma-delimited, double-quote quoting, "" as an
// escaped quote, CRLF or LF line endings, newlines allowed inside quotes.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. Throws ParseError on an
  // unterminated quoted field.
  std::optional<Record> next();

  // Physical line on which the last returned record started (1-based).
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

// Writes one record, quoting fields only when required.
void write_record(std::ostream& out, const Record& fields);

std::string quote_if_needed(std::string_view field);

}  // namespace humor::csv
