#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace phi::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
  bool unterminated_quote = false;
};

/// RFC 4180 style reader: quoted fields may contain the delimiter, doubled
/// quotes and line breaks. A UTF-8 BOM at the start of the stream is skipped.
class Reader {
 public:
  Reader(std::istream& in, char delimiter);
  std::optional<Record> next();

 private:
  std::istream& in_;
  char delim_;
  std::size_t line_ = 0;
  bool first_ = true;
};

/// Quotes a field when it contains the delimiter, a quote or a line break.
std::string escape(std::string_view field, char delimiter = ',');

/// Writes one delimited row terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace phi::csv
