#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phi/money.hpp"

namespace phi::ingest {

/// Header names for each logical column. Empty means "not present in this feed";
/// creditor_name and net_amount are mandatory.
struct ColumnMapping {
  std::string organisation = "Organisation Name";
  std::string directorate = "Directorate";
  std::string department = "Department";
  std::string service_plan = "Service Plan";
  std::string creditor_name = "Creditor Name";
  std::string payment_date = "Payment Date";
  std::string transaction_no = "Transaction No";
  std::string net_amount = "Net Amount";
  std::string subjective_group = "Subjective Group";
  std::string subjective_subgroup = "Subjective Subgroup";
  std::string subjective_detail = "Subjective Detail";
};

struct CalendarDate {
  int year = 0;
  int month = 0;
  int day = 0;
  friend auto operator<=>(const CalendarDate&, const CalendarDate&) = default;
};

struct RawRow {
  std::string source;
  std::size_t line = 0;
  std::string organisation;
  std::string directorate;
  std::string department;
  std::string service_plan;
  std::string creditor_name;  // whitespace-trimmed, never empty
  std::string payment_date_text;
  std::optional<CalendarDate> payment_date;
  std::string transaction_no;
  Money net_amount;
  std::string subjective_group;
  std::string subjective_subgroup;
  std::string subjective_detail;
};

struct Reject {
  std::string source;
  std::size_t line = 0;
  std::string reason;
  std::string raw;
};

struct ParseOptions {
  ColumnMapping columns;
  char delimiter = ',';
  /// strptime-style formats tried in order; dates are carried, never scored.
  std::vector<std::string> date_formats = {"%d/%m/%Y", "%Y-%m-%d", "%d-%b-%Y", "%d-%b-%y", "%d/%m/%y"};
};

struct ParseResult {
  std::vector<RawRow> rows;
  std::vector<Reject> rejects;
  std::size_t unparsed_dates = 0;
};

/// Throws IngestError when the file cannot be opened or has no header, and
/// ConfigError when a mapped column is absent from the header. Row-level
/// problems become Reject entries.
ParseResult parse_csv(const std::filesystem::path& path, const ParseOptions& opts);
ParseResult parse_csv(std::istream& in, const std::string& source, const ParseOptions& opts);

std::optional<CalendarDate> parse_date(const std::string& text, const std::vector<std::string>& formats);

struct FilterResult {
  std::vector<RawRow> kept;
  std::size_t dropped = 0;
};

/// Keeps rows with net_amount > 0, preserving input order.
FilterResult filter_positive(std::vector<RawRow> rows);

/// One cleaned transaction, keyed by canonical supplier once harmonised.
struct PaymentRecord {
  std::string supplier_raw;
  std::string supplier_id;
  Money amount;
  std::string directorate;
  std::string subjective_detail;
};

/// Suppliers with at least min_n records, sorted by id.
std::vector<std::string> select_high_volume(const std::map<std::string, std::size_t>& counts, std::size_t min_n);
std::vector<std::string> select_high_volume(std::span<const PaymentRecord> records, std::size_t min_n = 50);

struct CorpusStats {
  std::size_t n_rows_raw = 0;  // rows that parsed (rejects excluded)
  std::size_t n_rows_rejected = 0;
  std::size_t n_rows_dropped_nonpositive = 0;
  std::size_t n_rows_clean = 0;
  std::size_t n_raw_names = 0;
  std::size_t n_unparsed_dates = 0;
  std::size_t n_duplicate_transaction_nos = 0;  // rows whose non-empty Transaction No was seen before
  Money total_spend_raw;
  Money total_spend;  // clean rows
  Money min_amount;
  Money max_amount;
  double median_amount = 0.0;  // GBP, clean rows; may fall on a half penny
};

CorpusStats corpus_stats(const ParseResult& parsed, const FilterResult& filtered);

}  // namespace phi::ingest
