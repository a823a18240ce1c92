#include "phi/csv.hpp"

namespace phi::csv {

Reader::Reader(std::istream& in, char delimiter) : in_(in), delim_(delimiter) {}

std::optional<Record> Reader::next() {
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return std::nullopt;
    ++line_;
    if (first_) {
      first_ = false;
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }

  Record rec;
  rec.line = line_;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (!quoted) break;
      // Quoted field spans a line break.
      std::string more;
      if (!std::getline(in_, more)) {
        rec.unterminated_quote = true;
        break;
      }
      ++line_;
      if (!more.empty() && more.back() == '\r') more.pop_back();
      field.push_back('\n');
      line = std::move(more);
      i = 0;
      continue;
    }
    const char c = line[i++];
    if (quoted) {
      if (c == '"') {
        if (i < line.size() && line[i] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim_) {
      rec.fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  rec.fields.push_back(std::move(field));
  return rec;
}

std::string escape(std::string_view field, char delimiter) {
  const bool needs = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(delimiter);
    out << escape(fields[i], delimiter);
  }
  out.put('\n');
}

}  // namespace phi::csv
