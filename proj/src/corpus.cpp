#include "humor/corpus.hpp"

#include <charconv>
#include <cmath>
#include <map>

#include "humor/csv.hpp"
#include "humor/error.hpp"

namespace humor {
namespace {

constexpr std::string_view kOpen = "<";
constexpr std::string_view kClose = "/>";

class Columns {
 public:
  Columns(const csv::Record& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string name = header[i];
      // Tolerate a UTF-8 byte order mark on the first column.
      if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.erase(0, 3);
      index_.emplace(name, i);
    }
  }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require(const std::string& name) const {
    auto idx = find(name);
    if (!idx) throw ParseError(0, "missing column '" + name + "' in header");
    return *idx;
  }

 private:
  std::map<std::string, std::size_t> index_;
};

std::optional<double> parse_grade(const std::string& text, std::size_t row) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(row, "unparsable grade '" + text + "'");
  }
  if (value < kMinGrade || value > kMaxGrade) {
    throw ParseError(row, "grade " + text + " outside [0,3]");
  }
  return value;
}

struct HeadlineColumns {
  std::size_t original;
  std::size_t edit;
  std::optional<std::size_t> grades;
  std::optional<std::size_t> mean_grade;

  HeadlineColumns(const Columns& cols, const std::string& suffix)
      : original(cols.require("original" + suffix)),
        edit(cols.require("edit" + suffix)),
        grades(cols.find("grades" + suffix)),
        mean_grade(cols.find("meanGrade" + suffix)) {}
};

HeadlineInstance read_headline(const csv::Record& rec, const HeadlineColumns& cols, std::string id,
                               std::size_t row) {
  HeadlineInstance h;
  h.id = std::move(id);
  h.original_text = rec[cols.original];
  h.edit_word = rec[cols.edit];
  if (cols.grades) h.grades = rec[*cols.grades];
  if (cols.mean_grade) h.mean_grade = parse_grade(rec[*cols.mean_grade], row);
  if (h.edit_word.empty()) throw ParseError(row, "empty edit word");
  try {
    split_delimited(h.original_text);
  } catch (const Error& e) {
    throw ParseError(row, e.what());
  }
  return h;
}

template <typename RowFn>
void for_each_row(std::istream& in, RowFn&& fn) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return;
  Columns cols(*header);
  fn.bind(cols);
  std::size_t row = 0;
  while (auto rec = reader.next()) {
    ++row;
    if (rec->size() == 1 && rec->front().empty()) continue;  // blank line
    if (rec->size() != header->size()) {
      throw ParseError(row, "expected " + std::to_string(header->size()) + " columns, found " +
                                std::to_string(rec->size()));
    }
    fn(*rec, row);
  }
}

struct Task1Rows {
  std::vector<HeadlineInstance> out;
  std::optional<std::size_t> id_col;
  std::optional<HeadlineColumns> cols;

  void bind(const Columns& c) {
    id_col = c.require("id");
    cols.emplace(c, "");
  }
  void operator()(const csv::Record& rec, std::size_t row) {
    out.push_back(read_headline(rec, *cols, rec[*id_col], row));
  }
};

std::pair<std::string, std::string> member_ids(const std::string& pair_id) {
  auto dash = pair_id.find('-');
  if (dash != std::string::npos && dash > 0 && dash + 1 < pair_id.size()) {
    return {pair_id.substr(0, dash), pair_id.substr(dash + 1)};
  }
  return {pair_id + "/1", pair_id + "/2"};
}

struct Task2Rows {
  std::vector<PairInstance> out;
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> label_col;
  std::optional<HeadlineColumns> first;
  std::optional<HeadlineColumns> second;

  void bind(const Columns& c) {
    id_col = c.require("id");
    label_col = c.find("label");
    first.emplace(c, "1");
    second.emplace(c, "2");
  }
  void operator()(const csv::Record& rec, std::size_t row) {
    PairInstance p;
    p.id = rec[*id_col];
    auto [id1, id2] = member_ids(p.id);
    if (id1 == id2) throw ParseError(row, "pair members share id " + id1);
    p.first = read_headline(rec, *first, id1, row);
    p.second = read_headline(rec, *second, id2, row);
    if (label_col && !rec[*label_col].empty()) {
      const auto& text = rec[*label_col];
      if (text != "0" && text != "1" && text != "2") {
        throw ParseError(row, "label '" + text + "' outside {0,1,2}");
      }
      p.label = text[0] - '0';
      if (*p.label == 0 && p.scored() && std::abs(*p.first.mean_grade - *p.second.mean_grade) > 1e-9) {
        throw ParseError(row, "tie label with unequal grades");
      }
    }
    out.push_back(std::move(p));
  }
};

}  // namespace

DelimitedHeadline split_delimited(std::string_view text) {
  const auto open = text.find(kOpen);
  if (open == std::string_view::npos) throw Error("no delimited region in '" + std::string(text) + "'");
  const auto close = text.find(kClose, open + kOpen.size());
  if (close == std::string_view::npos) throw Error("unterminated delimited region in '" + std::string(text) + "'");
  const auto rest = text.substr(close + kClose.size());
  if (rest.find(kClose) != std::string_view::npos) {
    throw Error("multiple delimited regions in '" + std::string(text) + "'");
  }
  const auto region = text.substr(open + kOpen.size(), close - open - kOpen.size());
  if (region.find(kOpen) != std::string_view::npos) {
    throw Error("nested delimiter in '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, open)), std::string(region), std::string(rest)};
}

std::string edited_text(const HeadlineInstance& instance) {
  auto parts = split_delimited(instance.original_text);
  return parts.prefix + instance.edit_word + parts.suffix;
}

std::vector<HeadlineInstance> parse_task1(std::istream& in) {
  Task1Rows rows;
  for_each_row(in, rows);
  return std::move(rows.out);
}

std::vector<PairInstance> parse_task2(std::istream& in) {
  Task2Rows rows;
  for_each_row(in, rows);
  return std::move(rows.out);
}

SentenceTriple build_triple(const HeadlineInstance& instance, const WordTokenizer& tokenizer) {
  const auto parts = split_delimited(instance.original_text);
  const Words prefix = tokenizer(parts.prefix);
  const Words region = tokenizer(parts.region);
  const Words edit = tokenizer(instance.edit_word);
  const Words suffix = tokenizer(parts.suffix);
  if (region.empty()) throw Error("headline " + instance.id + ": replaced region has no tokens");
  if (edit.empty()) throw Error("headline " + instance.id + ": edit word has no tokens");

  SentenceTriple t;
  const std::size_t i = prefix.size() + 1;

  auto assemble = [&](const Words& middle) {
    Words out = prefix;
    out.insert(out.end(), middle.begin(), middle.end());
    out.insert(out.end(), suffix.begin(), suffix.end());
    return out;
  };
  t.original_tokens = assemble(region);
  t.edited_tokens = assemble(edit);
  t.context_tokens = assemble({std::string(kMaskWord)});
  t.original_span = {i, i + region.size() - 1};
  t.edit_span = {i, i + edit.size() - 1};
  t.context_span = {i, i};
  return t;
}

}  // namespace humor
