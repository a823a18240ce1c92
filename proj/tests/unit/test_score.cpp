#include <cmath>

#include "doctest.h"
#include "phi/score.hpp"

using namespace phi;
using namespace phi::score;

namespace {

gmm::MixtureModel mixture(std::vector<gmm::Component> c, std::size_t dominant) {
  gmm::MixtureModel m;
  m.components = std::move(c);
  m.dominant = dominant;
  return m;
}

stats::QuantileSet quantiles(double q05, double q25, double q50, double q75, double q95) {
  stats::QuantileSet q;
  q.q05 = q05;
  q.q25 = q25;
  q.q50 = q50;
  q.q75 = q75;
  q.q95 = q95;
  return q;
}

}  // namespace

TEST_CASE("asymmetry component") {
  CHECK(asymmetry_component(quantiles(0, 1, 2, 3, 4)) == 1.0);
  CHECK(asymmetry_component(quantiles(0, 1, 1, 3, 4)) == doctest::Approx(2.0));
  CHECK(asymmetry_component(quantiles(0, 1, 3, 3, 4)) == doctest::Approx(2.0));
  CHECK(asymmetry_component(quantiles(2, 2, 2, 2, 2)) == 1.0);
}

TEST_CASE("tail component") {
  CHECK(tail_component(quantiles(2, 2, 2, 2, 2)) == doctest::Approx(1.0));
  // Normal quantile spans: 1 + ln(3.2897 / 1.3490).
  CHECK(tail_component(quantiles(-1.6448536, -0.6744898, 0, 0.6744898, 1.6448536)) ==
        doctest::Approx(1.8915).epsilon(1e-4));
  CHECK(tail_component(quantiles(-1, -1, 0, 1, 1)) == doctest::Approx(1.0));
  CHECK(tail_component(quantiles(-1.5, -1, 0, 1, 1.5)) == doctest::Approx(1 + std::log(1.5)));
}

TEST_CASE("dispersion component") {
  CHECK(dispersion_component(mixture({{1.0, 0.0, 0.16}}, 0)) == doctest::Approx(1.4));
  CHECK(dispersion_component(mixture({{0.8, 0.0, 1.0}, {0.2, 10.0, 1.0}}, 0)) ==
        doctest::Approx(1 + 0.8 + 0.2 * std::log(11.0)));
  CHECK(dispersion_component(mixture({{0.8, 0.0, 1.0}, {0.2, 10.0, 1.0}}, 0)) == doctest::Approx(2.2796).epsilon(1e-4));
}

TEST_CASE("PHI product and log contributions") {
  auto one = combine(1, 1, 1, 1);
  CHECK(one.phi == 1.0);
  CHECK_FALSE(one.contributions.defined);

  auto s01 = combine(2, 1.215, 4.430, 27.853);
  CHECK(s01.phi == doctest::Approx(299.84).epsilon(2e-3));
  CHECK(s01.contributions.d == doctest::Approx(58.3).epsilon(2e-3));
  CHECK(s01.contributions.m + s01.contributions.a + s01.contributions.t + s01.contributions.d ==
        doctest::Approx(100.0));

  auto a = combine(1, 1.08, 1.84, 1.05);
  CHECK(a.phi == doctest::Approx(1.08 * 1.84 * 1.05).epsilon(1e-12));
  CHECK(std::round(a.phi * 100) / 100 == doctest::Approx(2.09));

  CHECK(100 * std::log(3.0) / std::log(6.854) == doctest::Approx(57.1).epsilon(1e-3));

  auto only_t = combine(1, 1, 3, 1);
  CHECK(only_t.contributions.t == doctest::Approx(100.0));
  CHECK(only_t.contributions.m == 0.0);
}

TEST_CASE("compute_phi assembles the components") {
  auto m = mixture({{0.5, 0, 1}, {0.5, 4, 1}}, 0);
  auto q = quantiles(-1, 0, 1, 4, 5);
  auto c = compute_phi(m, q);
  CHECK(c.m == 2);
  CHECK(c.a == doctest::Approx(asymmetry_component(q)));
  CHECK(c.t == doctest::Approx(tail_component(q)));
  CHECK(c.d == doctest::Approx(dispersion_component(m)));
  CHECK(c.phi == doctest::Approx(2 * c.a * c.t * c.d));
}

TEST_CASE("percentile ranks") {
  auto p = percentile_ranks(std::vector<double>{3, 1, 2, 10});
  CHECK(p[3] == 100.0);
  CHECK(p[1] == 25.0);
  auto eq = percentile_ranks(std::vector<double>{5, 5, 5});
  CHECK(eq[0] == eq[1]);
  CHECK(eq[1] == eq[2]);
}

TEST_CASE("tier counts") {
  auto t119 = tier_counts(119, TierCuts{});
  CHECK(t119.high == 12);
  CHECK(t119.moderate == 24);
  CHECK(t119.low == 83);
  auto t10 = tier_counts(10, TierCuts{});
  CHECK(t10.high == 1);
  CHECK(t10.moderate == 2);
  CHECK(t10.low == 7);
  auto t1 = tier_counts(1, TierCuts{});
  CHECK(t1.low == 1);
  CHECK(t1.high + t1.moderate == 0);
}

TEST_CASE("tier assignment orders by PHI then id") {
  std::vector<PhiScore> s;
  for (int i = 0; i < 10; ++i) {
    PhiScore p;
    p.supplier = "S-" + std::to_string(9 - i);
    p.components = combine(1, 1, 1 + i * 0.1, 1);
    s.push_back(p);
  }
  s[0].components = s[1].components;  // tie between S-9 and S-8
  CHECK(assign_tiers(s, TierCuts{}));
  CHECK(s[0].supplier == "S-0");
  CHECK(s[0].rank == 1);
  CHECK(s[0].tier == Tier::kHigh);
  CHECK(s[1].tier == Tier::kModerate);
  CHECK(s[2].tier == Tier::kModerate);
  CHECK(s[3].tier == Tier::kLow);
  CHECK(s[8].supplier == "S-8");
  CHECK(s[9].supplier == "S-9");

  std::vector<PhiScore> small(3);
  for (std::size_t i = 0; i < small.size(); ++i) small[i].components = combine(2, 1, 1, 1 + i);
  CHECK_FALSE(assign_tiers(small, TierCuts{}));
  for (const auto& x : small) CHECK(x.tier == Tier::kLow);
}
