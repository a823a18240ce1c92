#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "phi/anchoring.hpp"
#include "phi/error.hpp"

using namespace phi;
using namespace phi::anchoring;
using score::Tier;

TEST_CASE("smoothed histogram matches a reflect-mode Gaussian filter") {
  PeakConfig cfg;
  cfg.bin_width = 1;
  cfg.range_min = 0;
  cfg.range_max = 40;
  const std::vector<double> v{3.2, 3.7, 4.1, 10, 20, 21, 21.5, 21.9, 30, 40, -1, 41};
  auto h = smoothed_histogram(v, cfg);
  REQUIRE(h.counts.size() == 40);
  CHECK(h.excluded == 2);
  CHECK(h.counts[3] == 2);
  CHECK(h.counts[39] == 1);  // range_max falls in the last bin
  // scipy.ndimage.gaussian_filter1d(counts, 4, mode="reflect", truncate=4)
  const double expect[] = {
      0.3843780984084173, 0.3840774292996817, 0.38169702824626905, 0.3745753257818934, 0.36051378747886687,
      0.3388478348007126, 0.3106088786074954, 0.2783804466722749, 0.24519516651230072, 0.21392564012518633,
      0.18698698253698387, 0.16652862877765098, 0.1547587712465386, 0.15405142719680187, 0.16654827667904287,
      0.19304703447990212, 0.2322077679438269, 0.27979249742448875, 0.3288812160513657, 0.3710925236056159,
      0.3985483687894501, 0.4060964134696965, 0.3926370171254077, 0.3614561931059463, 0.3190762223454314,
      0.27320672246406025, 0.23062594540758957, 0.19561403073341804, 0.16960941707335236, 0.1517560029268611,
      0.14024433495722383, 0.13352402474878236, 0.13101617322604522, 0.1331024025870161, 0.14036742416096848,
      0.15278346193179723, 0.16896758361089287, 0.18608493912763235, 0.20046158680551668, 0.2087269735275973};
  for (std::size_t i = 0; i < 40; ++i) CHECK(h.density[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  double mass = 0;
  for (double d : h.density) mass += d;
  CHECK(mass == doctest::Approx(10.0));

  CHECK_THROWS_AS(smoothed_histogram(std::vector<double>{-5}, cfg), NumericalError);
}

TEST_CASE("a repeated single value smooths to a hump on its bin") {
  PeakConfig cfg;
  auto h = smoothed_histogram(std::vector<double>(25, 5050.0), cfg);
  const auto top = std::max_element(h.density.begin(), h.density.end()) - h.density.begin();
  CHECK(h.bin_centre(static_cast<std::size_t>(top)) == 5050.0);
  double mass = 0;
  for (double d : h.density) mass += d;
  CHECK(mass == doctest::Approx(25.0));
}

TEST_CASE("local maxima and prominences follow scipy") {
  const std::vector<double> x{0, 3, 1, 4, 4, 4, 2, 6, 0, 0, 5, 5, 1, 2, 0};
  const auto p = local_maxima(x);
  CHECK(p == std::vector<std::size_t>{1, 4, 7, 10, 13});
  CHECK(peak_prominences(x, p) == std::vector<double>{2, 2, 6, 5, 1});
  CHECK(local_maxima(std::vector<double>{3, 1, 2}).empty());
  CHECK(local_maxima(std::vector<double>{1, 2, 3, 4}).empty());
}

TEST_CASE("peak detection") {
  PeakConfig cfg;
  std::vector<double> v;
  for (int i = 0; i < 30; ++i) v.push_back(2000 + (i % 5) * 10);
  for (int i = 0; i < 30; ++i) v.push_back(7000 + (i % 5) * 10);
  for (int i = 0; i < 30; ++i) v.push_back(150);  // below min_position
  auto h = smoothed_histogram(v, cfg);
  auto peaks = detect_peaks(h, cfg);
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(peaks[0].position - 2050) <= 100);
  CHECK(std::abs(peaks[1].position - 7050) <= 100);
  CHECK(peaks[0].prominence > 0);

  std::vector<double> mono;
  for (int i = 0; i < 300; ++i) mono.push_back(100.0 * i);
  for (int i = 0; i < 300; ++i) mono.push_back(29999.0);
  CHECK(detect_peaks(smoothed_histogram(mono, cfg), cfg).empty());
}

TEST_CASE("nearest peak and proximity") {
  const std::vector<double> peaks{1150, 7450, 11050};
  CHECK(nearest_peak_distance(7450, peaks).pct_distance == 0.0);
  auto n = nearest_peak_distance(1265, peaks);
  CHECK(n.peak == 1150);
  CHECK(n.pct_distance == doctest::Approx(10.0));
  CHECK(within_window(n.pct_distance, 10));
  CHECK_FALSE(within_window(10.01, 10));
  auto tie = nearest_peak_distance((7450 + 11050) / 2.0, peaks);
  CHECK(tie.peak == 7450);
  CHECK(tie.index == 1);
  CHECK_THROWS_AS(nearest_peak_distance(5, std::vector<double>{}), NumericalError);
}

TEST_CASE("permutation test") {
  const bool prox_v[] = {true, true, false, false, true, false, false, false, true, false};
  const std::span<const bool> prox(prox_v);
  std::vector<Tier> tiers{Tier::kHigh, Tier::kHigh, Tier::kHigh, Tier::kLow, Tier::kLow,
                          Tier::kLow,  Tier::kLow,  Tier::kModerate, Tier::kLow, Tier::kLow};

  auto r = permutation_test(prox, tiers, Tier::kHigh, 4000, 7);
  CHECK(r.observed == 2);
  CHECK(r.n_target == 3);
  CHECK(r.n_proximate == 4);
  CHECK(r.null_counts.size() == 4000);
  // Hypergeometric: E = 3 * 4 / 10, P(X >= 2) = (C(4,2)C(6,1) + C(4,3)) / C(10,3) = 40/120.
  CHECK(r.perm_mean == doctest::Approx(1.2).epsilon(0.05));
  CHECK(r.p == doctest::Approx(1.0 / 3).epsilon(0.07));
  CHECK(r.p_add_one == doctest::Approx((r.p * 4000 + 1) / 4001));

  auto again = permutation_test(prox, tiers, Tier::kHigh, 4000, 7, 3);
  CHECK(again.null_counts == r.null_counts);
  CHECK(again.p == r.p);

  std::vector<Tier> all(10, Tier::kHigh);
  auto deg = permutation_test(prox, all, Tier::kHigh, 100, 1);
  CHECK(deg.p == 1.0);
  for (auto c : deg.null_counts) CHECK(c == deg.observed);

  std::vector<Tier> none(10, Tier::kLow);
  CHECK_THROWS_AS(permutation_test(prox, none, Tier::kHigh, 10, 1), NumericalError);
}

TEST_CASE("analyse ties the pieces together") {
  std::vector<CentreObservation> obs;
  auto add = [&](double c, Tier t) { obs.push_back({"S-" + std::to_string(obs.size()), c, t, 1.0, 1.0}); };
  for (int i = 0; i < 10; ++i) add(3000 + i, Tier::kHigh);
  for (int i = 0; i < 10; ++i) add(12000 + 3 * i, Tier::kHigh);
  for (int i = 0; i < 40; ++i) add(500 + 250.0 * i, Tier::kLow);
  for (int i = 0; i < 5; ++i) add(20000, Tier::kModerate);
  AnchoringConfig cfg;
  cfg.n_perm = 500;
  auto a = analyse(obs, cfg);
  REQUIRE(a.peaks.size() == 2);
  CHECK(a.tiers[2].tier == Tier::kHigh);
  CHECK(a.tiers[2].n == 20);
  CHECK(a.tiers[2].proportion[0] == 1.0);
  CHECK(a.tiers[1].proportion[0] == 0.0);
  CHECK(a.permutations.size() == 2);
  CHECK(a.permutations[0].p < 0.01);
  REQUIRE(a.ks);
  CHECK(a.high_distances.size() == 20);
  CHECK(a.low_distances.size() == 40);

  cfg.exogenous_peaks = std::vector<double>{3000, 12000};
  auto e = analyse(obs, cfg);
  CHECK(e.exogenous);
  CHECK(e.peaks.size() == 2);
  CHECK(e.nearest[0].peak == 3000);
}
