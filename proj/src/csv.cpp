#include "humor/csv.hpp"

#include "humor/error.hpp"

namespace humor::csv {

std::optional<Record> Reader::next() {
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return std::nullopt;

  record_line_ = line_;
  Record record;
  std::string field;
  bool quoted = false;
  bool after_quote = false;

  for (;; c = in_.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ParseError(record_line_, "unterminated quoted field");
      record.push_back(std::move(field));
      return record;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field.empty() && !after_quote) {
          quoted = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        after_quote = false;
        break;
      case '\r':
        if (in_.peek() == '\n') break;
        [[fallthrough]];
      case '\n':
        ++line_;
        record.push_back(std::move(field));
        return record;
      default:
        field.push_back(ch);
    }
  }
}

std::string quote_if_needed(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_record(std::ostream& out, const Record& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote_if_needed(fields[i]);
  }
  out << '\n';
}

}  // namespace humor::csv
