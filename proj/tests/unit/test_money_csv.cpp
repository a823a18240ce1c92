#include <sstream>

#include "doctest.h"
#include "phi/csv.hpp"
#include "phi/money.hpp"

using phi::Money;
using phi::parse_money;

TEST_CASE("money parses the usual ledger spellings to pence") {
  CHECK(parse_money("12.34")->pence() == 1234);
  CHECK(parse_money("1,234.5")->pence() == 123450);
  CHECK(parse_money("\xC2\xA3" "7")->pence() == 700);
  CHECK(parse_money("-5")->pence() == -500);
  CHECK(parse_money("(3.10)")->pence() == -310);
  CHECK(parse_money("0")->pence() == 0);
  CHECK_FALSE(parse_money("abc"));
  CHECK_FALSE(parse_money(""));
  CHECK_FALSE(parse_money("1.2.3"));
}

TEST_CASE("money formats with two decimals") {
  CHECK(Money::from_pence(123456).str() == "1234.56");
  CHECK(Money::from_pence(-5).str() == "-0.05");
  CHECK(Money().str() == "0.00");
  Money m;
  m += Money::from_pence(250);
  CHECK(m.to_double() == doctest::Approx(2.5));
  CHECK(Money::from_pence(1) > Money());
}

TEST_CASE("csv reader handles quotes, embedded newlines and a BOM") {
  std::istringstream in("\xEF\xBB\xBF" "a,b,c\n\"x,1\",\"say \"\"hi\"\"\",\"two\nlines\"\n\n3,4,5\n");
  phi::csv::Reader r(in, ',');
  auto h = r.next();
  REQUIRE(h);
  CHECK(h->fields == std::vector<std::string>{"a", "b", "c"});
  auto r1 = r.next();
  REQUIRE(r1);
  CHECK(r1->fields == std::vector<std::string>{"x,1", "say \"hi\"", "two\nlines"});
  CHECK(r1->line == 2);
  auto r2 = r.next();
  REQUIRE(r2);
  while (r2 && r2->fields.size() == 1 && r2->fields[0].empty()) r2 = r.next();
  REQUIRE(r2);
  CHECK(r2->fields == std::vector<std::string>{"3", "4", "5"});
  CHECK_FALSE(r.next());
}

TEST_CASE("csv writer round-trips through the reader") {
  std::ostringstream out;
  const std::vector<std::string> row{"plain", "with,comma", "with \"quote\"", "line\nbreak", ""};
  phi::csv::write_row(out, row);
  std::istringstream in(out.str());
  phi::csv::Reader r(in, ',');
  auto rec = r.next();
  REQUIRE(rec);
  CHECK(rec->fields == row);
}
