#include <sstream>

#include "doctest.h"
#include "phi/error.hpp"
#include "phi/ingest.hpp"

using namespace phi;
using namespace phi::ingest;

namespace {

const char* kHeader =
    "Organisation Name,Directorate,Department,Service Plan,Creditor Name,Payment Date,Transaction No,Net Amount,"
    "Subjective Group,Subjective Subgroup,Subjective Detail\n";

std::string row(const std::string& name, const std::string& amount, const std::string& date = "03/06/2025",
                const std::string& txn = "T1") {
  return "City of York Council,Finance,Dept,Plan," + name + "," + date + "," + txn + "," + amount + ",G,SG,Services\n";
}

ParseResult parse(const std::string& body, const ParseOptions& opts = {}) {
  std::istringstream in(std::string(kHeader) + body);
  return parse_csv(in, "test.csv", opts);
}

}  // namespace

TEST_CASE("well-formed rows all parse") {
  auto r = parse(row("ACME LTD", "10.00") + row("ACME LTD", "20.50", "2025-06-04", "T2") + row("B CO", "1"));
  CHECK(r.rows.size() == 3);
  CHECK(r.rejects.empty());
  CHECK(r.rows[1].net_amount.pence() == 2050);
  REQUIRE(r.rows[1].payment_date);
  CHECK(r.rows[1].payment_date->month == 6);
  CHECK(r.rows[0].directorate == "Finance");
  CHECK(r.rows[0].subjective_detail == "Services");
}

TEST_CASE("an unparseable amount is rejected with its line") {
  auto r = parse(row("ACME", "10") + row("ACME", "abc") + row("ACME", "5"));
  CHECK(r.rows.size() == 2);
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].line == 3);
  CHECK(r.rejects[0].reason.find("amount") != std::string::npos);
}

TEST_CASE("ragged rows and empty names are rejected, unparsed dates only counted") {
  auto r = parse(row("ACME", "10") + "a,b,c\n" + row("", "4") + row("ACME", "3", "31/02/2025"));
  CHECK(r.rows.size() == 2);
  CHECK(r.rejects.size() == 2);
  CHECK(r.unparsed_dates == 1);
  CHECK_FALSE(r.rows[1].payment_date);
}

TEST_CASE("a missing mapped column is a config error, an empty file an ingest error") {
  std::istringstream bad("Creditor Name,Amount\nA,1\n");
  CHECK_THROWS_AS(parse_csv(bad, "x", ParseOptions{}), ConfigError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_csv(empty, "x", ParseOptions{}), IngestError);

  ParseOptions minimal;
  minimal.columns = ColumnMapping{"", "", "", "", "Creditor Name", "", "", "Amount", "", "", ""};
  std::istringstream ok("Creditor Name,Amount\nA,1\n");
  CHECK(parse_csv(ok, "x", minimal).rows.size() == 1);
}

TEST_CASE("date formats") {
  const ParseOptions o;
  CHECK(parse_date("29/02/2024", o.date_formats).has_value());
  CHECK_FALSE(parse_date("29/02/2025", o.date_formats).has_value());
  auto d = parse_date("05-Jul-2025", o.date_formats);
  REQUIRE(d);
  CHECK(d->month == 7);
  CHECK(d->day == 5);
  CHECK_FALSE(parse_date("yesterday", o.date_formats).has_value());
}

TEST_CASE("non-positive amounts are filtered out") {
  auto r = parse(row("A", "10") + row("A", "-5") + row("A", "0") + row("A", "3"));
  auto f = filter_positive(r.rows);
  REQUIRE(f.kept.size() == 2);
  CHECK(f.dropped == 2);
  CHECK(f.kept[0].net_amount.pence() == 1000);
  CHECK(f.kept[1].net_amount.pence() == 300);

  auto all = filter_positive(parse(row("A", "1") + row("A", "2")).rows);
  CHECK(all.dropped == 0);
  CHECK(all.kept.size() == 2);
}

TEST_CASE("volume filter keeps exactly the suppliers with at least min_n payments") {
  std::map<std::string, std::size_t> counts{{"S-a", 49}, {"S-b", 50}, {"S-c", 51}};
  CHECK(select_high_volume(counts, 50) == std::vector<std::string>{"S-b", "S-c"});
  std::vector<PaymentRecord> recs(50);
  for (auto& p : recs) p.supplier_id = "S-x";
  CHECK(select_high_volume(recs, 50).size() == 1);
  recs.pop_back();
  CHECK(select_high_volume(recs, 50).empty());
}

TEST_CASE("corpus statistics") {
  auto r = parse(row("A", "10", "01/06/2025", "T1") + row("B", "-5", "01/06/2025", "T1") + row("A", "2", "x", "T3"));
  auto f = filter_positive(r.rows);
  auto s = corpus_stats(r, f);
  CHECK(s.n_rows_raw == 3);
  CHECK(s.n_rows_clean == 2);
  CHECK(s.n_rows_dropped_nonpositive == 1);
  CHECK(s.n_raw_names == 2);
  CHECK(s.n_duplicate_transaction_nos == 1);
  CHECK(s.n_unparsed_dates == 1);
  CHECK(s.total_spend_raw.pence() == 700);
  CHECK(s.total_spend.pence() == 1200);
  CHECK(s.median_amount == doctest::Approx(6.0));
}
