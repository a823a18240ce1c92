#include <set>

#include "doctest.h"
#include "phi/error.hpp"
#include "phi/harmonise.hpp"

using namespace phi;
using namespace phi::harmonise;

namespace {

const std::vector<SuffixRule> kRules = default_suffix_rules();

NameKey key(std::string_view s) { return normalise_name(s, kRules); }

std::vector<NameKey> keys(std::initializer_list<std::string_view> names) {
  std::vector<NameKey> out;
  for (auto n : names) out.push_back(key(n));
  return out;
}

}  // namespace

TEST_CASE("name normalisation") {
  CHECK(key("Muddy Boots Nursery Ltd.").normalised == "MUDDY BOOTS NURSERY LIMITED");
  CHECK(key("ACME").normalised == "ACME");
  CHECK(key("  O'Brien  &  Sons (UK) ltd ").normalised == "OBRIEN SONS UK LIMITED");
  CHECK(key("E.ON Next Energy Ltd").normalised == "EON NEXT ENERGY LIMITED");
  CHECK(key("Smith and Co").normalised == "SMITH AND COMPANY");
  // Only the trailing run of legal forms is rewritten.
  CHECK(key("CO OP FOOD LTD").normalised == "CO OP FOOD LIMITED");
  CHECK(key("St Peter\xE2\x80\x99s Academy").normalised == "ST PETERS ACADEMY");
  CHECK(key("A\xC2\xA0" "B").tokens == std::vector<std::string>{"A", "B"});
  // Normalising twice changes nothing.
  for (auto s : {"Muddy Boots Nursery Ltd.", "Smith & Co.", "X LTD LTD", "CO"}) {
    CHECK(key(key(s).normalised).normalised == key(s).normalised);
  }
  CHECK_FALSE(try_normalise_name(" .,- ", kRules));
  CHECK_THROWS_AS(normalise_name("...", kRules), IngestError);

  auto rules = kRules;
  rules[2].enabled = true;
  CHECK(normalise_name("Park Academy", rules).normalised == "PARK SCHOOL");
}

TEST_CASE("similarity scores") {
  auto docs = keys({"MUDDY BOOTS NURSERY", "MUDDY BOOTS NURSERY POPPLETON", "E ON NEXT ENERGY LTD",
                    "E ON NEXT ENERGY", "ALPHA SUPPLIES", "ZETA CLEANING"});
  IdfTable idf(docs);
  auto same = score_pair(docs[0], docs[0], idf);
  CHECK(same.tfidf_cosine == doctest::Approx(1.0));
  CHECK(same.token_set_ratio == 100);
  CHECK(same.jaccard == 1.0);
  CHECK(same.ensemble == doctest::Approx(1.0));

  MatchRule rule;
  auto disjoint = score_pair(docs[4], docs[5], idf);
  CHECK(disjoint.jaccard == 0.0);
  CHECK_FALSE(rule.matches(disjoint));

  CHECK(rule.matches(score_pair(docs[0], docs[1], idf)));
  CHECK(rule.matches(score_pair(docs[2], docs[3], idf)));
}

TEST_CASE("token set ratio and indel ratio") {
  CHECK(indel_ratio("abc", "abc") == 1.0);
  CHECK(indel_ratio("abcd", "abce") == doctest::Approx(0.75));
  const std::vector<std::string> a{"FUZZY", "WUZZY", "WAS", "A", "BEAR"}, b{"WUZZY", "FUZZY", "WAS", "A", "BEAR"};
  CHECK(token_set_ratio(a, b) == 100);
  const std::vector<std::string> c{"ACME"}, d{"ACNE"};
  CHECK(token_set_ratio(c, d) == 75);
  CHECK(token_set_ratio(c, std::vector<std::string>{}) == 0);
  CHECK(jaccard(a, c) == 0.0);
  CHECK(jaccard(std::vector<std::string>{"A", "B"}, std::vector<std::string>{"B", "C"}) == doctest::Approx(1.0 / 3));
}

TEST_CASE("clusters are connected components with a modal canonical name") {
  HarmoniseConfig cfg;
  std::vector<NameFrequency> names{
      {"ALPHA BETA GAMMA", 10},
      {"ALPHA BETA GAMMA DELTA", 3},
      {"ALPHA BETA GAMMA DELTA EPSILON", 4},
      {"Acme Ltd", 2},
      {"ACME LIMITED", 5},
      {"ZULU WIDGETS", 1},
      {"---", 1},
  };
  auto map = build_canonical_map(names, cfg);
  REQUIRE(map.clusters.size() == 3);
  CHECK(map.unnormalisable == std::vector<std::string>{"---"});

  const auto* chain = map.find("ALPHA BETA GAMMA DELTA EPSILON");
  REQUIRE(chain);
  CHECK(chain->members.size() == 3);
  CHECK(chain->canonical == "ALPHA BETA GAMMA");
  CHECK(chain->rows == 17);
  CHECK(map.find("ALPHA BETA GAMMA") == chain);

  // The chain ends do not match each other directly.
  std::vector<NameKey> docs;
  for (const auto& n : names) {
    if (auto k = try_normalise_name(n.raw, cfg.suffixes)) docs.push_back(*k);
  }
  IdfTable idf(docs);
  CHECK_FALSE(cfg.rule.matches(score_pair(docs[0], docs[2], idf)));

  const auto* acme = map.find("Acme Ltd");
  REQUIRE(acme);
  CHECK(acme->canonical == "ACME LIMITED");
  CHECK(acme->members == std::vector<std::string>{"ACME LIMITED", "Acme Ltd"});
  CHECK(map.find("ZULU WIDGETS")->members.size() == 1);
  CHECK(map.find("nobody") == nullptr);

  std::set<std::string> ids;
  for (const auto& c : map.clusters) ids.insert(c.pseudonym);
  CHECK(ids.size() == map.clusters.size());
}

TEST_CASE("no matching pairs leaves singletons") {
  std::vector<NameFrequency> names{{"RED APPLE", 1}, {"BLUE PEAR", 1}, {"GREEN PLUM", 1}};
  auto map = build_canonical_map(names, HarmoniseConfig{});
  CHECK(map.clusters.size() == 3);
  CHECK(map.edges.empty());
}

TEST_CASE("pseudonyms are keyed, stable and short") {
  const auto p = pseudonym("ACME LIMITED", "salt");
  CHECK(p.size() == 10);
  CHECK(p.rfind("S-", 0) == 0);
  CHECK(p == pseudonym("ACME LIMITED", "salt"));
  CHECK(p != pseudonym("ACME LIMITED", "pepper"));
  CHECK(p != pseudonym("ACME LIMITED", "salt", 1));
}
