#include "phi/ingest.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <locale>
#include <set>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "phi/csv.hpp"
#include "phi/error.hpp"

namespace phi::ingest {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string join_raw(const std::vector<std::string>& fields, char delim) {
  std::ostringstream os;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << delim;
    os << csv::escape(fields[i], delim);
  }
  return os.str();
}

struct ColumnIndex {
  std::optional<std::size_t> organisation, directorate, department, service_plan, creditor_name,
      payment_date, transaction_no, net_amount, subjective_group, subjective_subgroup, subjective_detail;
  std::size_t max_index = 0;
};

ColumnIndex resolve_columns(const std::vector<std::string>& header, const ColumnMapping& m,
                            const std::string& source) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(trim(header[i]), i);

  ColumnIndex idx;
  auto bind = [&](std::optional<std::size_t>& slot, const std::string& name, bool required, const char* key) {
    if (name.empty()) {
      if (required) throw ConfigError("ingest", fmt::format("column mapping '{}' must not be empty", key));
      return;
    }
    auto it = pos.find(name);
    if (it == pos.end()) {
      throw ConfigError("ingest", fmt::format("{}: header has no column '{}' (mapped as {})", source, name, key));
    }
    slot = it->second;
    idx.max_index = std::max(idx.max_index, it->second);
  };
  bind(idx.organisation, m.organisation, false, "organisation");
  bind(idx.directorate, m.directorate, false, "directorate");
  bind(idx.department, m.department, false, "department");
  bind(idx.service_plan, m.service_plan, false, "service_plan");
  bind(idx.creditor_name, m.creditor_name, true, "creditor_name");
  bind(idx.payment_date, m.payment_date, false, "payment_date");
  bind(idx.transaction_no, m.transaction_no, false, "transaction_no");
  bind(idx.net_amount, m.net_amount, true, "net_amount");
  bind(idx.subjective_group, m.subjective_group, false, "subjective_group");
  bind(idx.subjective_subgroup, m.subjective_subgroup, false, "subjective_subgroup");
  bind(idx.subjective_detail, m.subjective_detail, false, "subjective_detail");
  return idx;
}

std::string field_at(const std::vector<std::string>& f, const std::optional<std::size_t>& i) {
  return i ? trim(f[*i]) : std::string{};
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

std::optional<CalendarDate> parse_date(const std::string& text, const std::vector<std::string>& formats) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  for (const auto& f : formats) {
    std::tm tm{};
    std::istringstream is(t);
    is.imbue(std::locale::classic());
    is >> std::get_time(&tm, f.c_str());
    if (is.fail()) continue;
    is >> std::ws;
    if (!is.eof()) continue;
    CalendarDate d{tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday};
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (d.month < 1 || d.month > 12 || d.day < 1) continue;
    const int dim = kDays[d.month - 1] + (d.month == 2 && is_leap(d.year) ? 1 : 0);
    if (d.day > dim) continue;
    return d;
  }
  return std::nullopt;
}

ParseResult parse_csv(std::istream& in, const std::string& source, const ParseOptions& opts) {
  csv::Reader reader(in, opts.delimiter);
  auto header = reader.next();
  if (!header) throw IngestError("ingest", fmt::format("{}: empty input, no header row", source));
  const ColumnIndex idx = resolve_columns(header->fields, opts.columns, source);
  const std::size_t width = header->fields.size();

  ParseResult out;
  while (auto rec = reader.next()) {
    auto reject = [&](std::string reason) {
      out.rejects.push_back({source, rec->line, std::move(reason), join_raw(rec->fields, opts.delimiter)});
    };
    if (rec->unterminated_quote) {
      reject("unterminated quoted field");
      continue;
    }
    auto& f = rec->fields;
    if (f.size() != width) {
      const bool trailing_empty =
          f.size() > width && std::all_of(f.begin() + width, f.end(), [](const std::string& s) { return trim(s).empty(); });
      if (!trailing_empty) {
        reject(fmt::format("field count {} does not match header ({})", f.size(), width));
        continue;
      }
      f.resize(width);
    }

    RawRow row;
    row.source = source;
    row.line = rec->line;
    row.creditor_name = field_at(f, idx.creditor_name);
    if (row.creditor_name.empty()) {
      reject("empty creditor name");
      continue;
    }
    const std::string amount_text = field_at(f, idx.net_amount);
    auto amount = parse_money(amount_text);
    if (!amount) {
      reject(fmt::format("unparseable amount '{}'", amount_text));
      continue;
    }
    row.net_amount = *amount;
    row.organisation = field_at(f, idx.organisation);
    row.directorate = field_at(f, idx.directorate);
    row.department = field_at(f, idx.department);
    row.service_plan = field_at(f, idx.service_plan);
    row.payment_date_text = field_at(f, idx.payment_date);
    row.payment_date = parse_date(row.payment_date_text, opts.date_formats);
    if (!row.payment_date_text.empty() && !row.payment_date) ++out.unparsed_dates;
    row.transaction_no = field_at(f, idx.transaction_no);
    row.subjective_group = field_at(f, idx.subjective_group);
    row.subjective_subgroup = field_at(f, idx.subjective_subgroup);
    row.subjective_detail = field_at(f, idx.subjective_detail);
    out.rows.push_back(std::move(row));
  }
  return out;
}

ParseResult parse_csv(const std::filesystem::path& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("ingest", fmt::format("cannot open input file '{}'", path.string()));
  return parse_csv(in, path.filename().string(), opts);
}

FilterResult filter_positive(std::vector<RawRow> rows) {
  FilterResult out;
  const std::size_t before = rows.size();
  out.kept.reserve(rows.size());
  for (auto& r : rows) {
    if (r.net_amount.positive()) out.kept.push_back(std::move(r));
  }
  out.dropped = before - out.kept.size();
  return out;
}

std::vector<std::string> select_high_volume(const std::map<std::string, std::size_t>& counts, std::size_t min_n) {
  std::vector<std::string> ids;
  for (const auto& [id, n] : counts) {
    if (n >= min_n) ids.push_back(id);
  }
  return ids;
}

std::vector<std::string> select_high_volume(std::span<const PaymentRecord> records, std::size_t min_n) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.supplier_id];
  return select_high_volume(counts, min_n);
}

CorpusStats corpus_stats(const ParseResult& parsed, const FilterResult& filtered) {
  CorpusStats s;
  s.n_rows_raw = parsed.rows.size();
  s.n_rows_rejected = parsed.rejects.size();
  s.n_rows_dropped_nonpositive = filtered.dropped;
  s.n_rows_clean = filtered.kept.size();
  s.n_unparsed_dates = parsed.unparsed_dates;

  std::set<std::string> names;
  std::unordered_set<std::string> seen_txn;
  for (const auto& r : parsed.rows) {
    names.insert(r.creditor_name);
    s.total_spend_raw += r.net_amount;
    if (!r.transaction_no.empty() && !seen_txn.insert(r.transaction_no).second) ++s.n_duplicate_transaction_nos;
  }
  s.n_raw_names = names.size();

  if (!filtered.kept.empty()) {
    std::vector<std::int64_t> pence;
    pence.reserve(filtered.kept.size());
    for (const auto& r : filtered.kept) {
      pence.push_back(r.net_amount.pence());
      s.total_spend += r.net_amount;
    }
    std::sort(pence.begin(), pence.end());
    s.min_amount = Money::from_pence(pence.front());
    s.max_amount = Money::from_pence(pence.back());
    const std::size_t n = pence.size();
    const double mid = n % 2 ? static_cast<double>(pence[n / 2])
                             : (static_cast<double>(pence[n / 2 - 1]) + static_cast<double>(pence[n / 2])) / 2.0;
    s.median_amount = mid / 100.0;
  }
  return s;
}

}  // namespace phi::ingest
