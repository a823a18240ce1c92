#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "phi/money.hpp"
#include "phi/robust_stats.hpp"

using namespace phi;
using namespace phi::stats;

namespace {

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>{}, p); }

// Brute-force sup |F_a - F_b| over the pooled points.
double ks_brute(const std::vector<double>& a, const std::vector<double>& b) {
  auto ecdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v <= x; })) /
           static_cast<double>(s.size());
  };
  double d = 0;
  for (const auto* s : {&a, &b}) {
    for (double x : *s) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  }
  return d;
}

}  // namespace

TEST_CASE("type 7 quantiles") {
  const std::vector<double> odd{1, 2, 3, 4, 5}, even{1, 2, 3, 4}, two{0, 10};
  CHECK(quantile(odd, 0.5) == 3.0);
  CHECK(quantile(even, 0.5) == 2.5);
  CHECK(quantile(two, 0.25) == 2.5);
  CHECK(quantile(two, 0.0) == 0.0);
  CHECK(quantile(two, 1.0) == 10.0);
  auto q = quantile_set(std::vector<double>{5, 1, 4, 2, 3});
  CHECK(q.q50 == 3.0);
  CHECK(q.q25 == 2.0);
  CHECK(q.q05 == doctest::Approx(1.2));
}

TEST_CASE("global scale and standardisation") {
  std::vector<Money> m;
  for (int p : {100, 200, 300, 400, 500}) m.push_back(Money::from_pence(p));
  auto s = global_scale(m);
  CHECK(s.median == doctest::Approx(3.0));
  CHECK(s.iqr == doctest::Approx(2.0));
  CHECK(robust_standardise(Money::from_pence(300), s) == 0.0);
  CHECK(robust_standardise(5.0, s) == doctest::Approx(1.0));
  CHECK(to_gbp(1.0, s) == doctest::Approx(5.0));
}

TEST_CASE("Bowley skewness") {
  CHECK(bowley_skewness(quantile_set(std::vector<double>{1, 2, 3, 4, 5})) == 0.0);
  CHECK(bowley_skewness(quantile_set(std::vector<double>(9, 7.0))) == 0.0);
  QuantileSet q;
  q.q25 = 0;
  q.q50 = 1;
  q.q75 = 4;
  CHECK(bowley_skewness(q) == doctest::Approx(0.5));
}

TEST_CASE("tail ratio") {
  CHECK(tail_ratio(quantile_set(std::vector<double>(20, 3.0))) == doctest::Approx(1.0));

  // Quantile oracle for a large normal sample: (z95 - z05) / (z75 - z25).
  std::vector<double> x;
  const int n = 200001;
  for (int i = 1; i <= n; ++i) x.push_back(normal_quantile(static_cast<double>(i) / (n + 1)));
  const double expect = (normal_quantile(0.95) - normal_quantile(0.05)) / (normal_quantile(0.75) - normal_quantile(0.25));
  CHECK(expect == doctest::Approx(2.4387).epsilon(1e-4));
  CHECK(tail_ratio(quantile_set(x)) == doctest::Approx(expect).epsilon(1e-3));

  // Heap on one value with a wide outer spread.
  QuantileSet h;
  h.q05 = 0;
  h.q25 = h.q50 = h.q75 = 5;
  h.q95 = 10;
  CHECK(tail_ratio(h) == doctest::Approx((10 + 1e-6) / 1e-6));
}

TEST_CASE("coefficient of variation") {
  CHECK(coefficient_of_variation(std::vector<double>{4, 4, 4}) == 0.0);
  CHECK(coefficient_of_variation(std::vector<double>{1, 3}) == doctest::Approx(0.5));
  CHECK(coefficient_of_variation(std::vector<double>{1, 3}, 1) == doctest::Approx(std::sqrt(2.0) / 2));
}

TEST_CASE("average ranks and Spearman") {
  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  std::vector<double> x{1, 2, 3, 4, 5, 6}, up, down;
  for (double v : x) {
    up.push_back(std::exp(v));
    down.push_back(-v * v * v);
  }
  CHECK(spearman_rho(x, up).rho == doctest::Approx(1.0));
  CHECK(spearman_rho(x, down).rho == doctest::Approx(-1.0));
  CHECK(spearman_rho(x, up).p < 1e-3);

  // Rank-then-Pearson oracle with ties.
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> d(0, 9);
  std::vector<double> a(40), b(40);
  for (int i = 0; i < 40; ++i) {
    a[i] = d(g);
    b[i] = a[i] + d(g);
  }
  CHECK(spearman_rho(a, b).rho == doctest::Approx(pearson(average_ranks(a), average_ranks(b))).epsilon(1e-12));
}

TEST_CASE("two-sample Kolmogorov-Smirnov") {
  const std::vector<double> a{1, 2, 3, 4}, b{10, 11, 12};
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, a).p == doctest::Approx(1.0));
  CHECK(ks_two_sample(a, b).statistic == 1.0);
  std::mt19937_64 g(11);
  std::normal_distribution<double> n01;
  std::vector<double> x(57), y(43);
  for (auto& v : x) v = std::round(n01(g) * 4) / 4;
  for (auto& v : y) v = std::round((n01(g) + 0.5) * 4) / 4;
  CHECK(ks_two_sample(x, y).statistic == doctest::Approx(ks_brute(x, y)).epsilon(1e-12));
  CHECK(kolmogorov_sf(0.0) == doctest::Approx(1.0));
  // Q_KS(1) = 2 * sum (-1)^{k-1} exp(-2 k^2) = 0.2699996...
  CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.26999967).epsilon(1e-7));
}

TEST_CASE("Lorenz curve") {
  auto eq = lorenz_points(std::vector<double>{5, 5, 5, 5});
  REQUIRE(eq.size() == 5);
  for (const auto& p : eq) CHECK(p.spend_share == doctest::Approx(p.supplier_share));
  auto one = lorenz_points(std::vector<double>{0, 0, 0, 8});
  CHECK(one[3].spend_share == 0.0);
  CHECK(one[4].spend_share == doctest::Approx(1.0));
  CHECK(top_share(one, 0.25) == doctest::Approx(1.0));
  CHECK(top_share(eq, 0.5) == doctest::Approx(0.5));
}
