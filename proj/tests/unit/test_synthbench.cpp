#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "phi/gmm.hpp"
#include "phi/robust_stats.hpp"
#include "phi/score.hpp"
#include "phi/synthbench.hpp"

using namespace phi;
using namespace phi::synth;

namespace {

struct Scored {
  score::PhiComponents c;
  gmm::Selection fit;
};

std::vector<double> standardised(const std::vector<Money>& m, const stats::GlobalScale& s) {
  std::vector<double> z;
  for (auto v : m) z.push_back(stats::robust_standardise(v, s));
  return z;
}

Scored score_with(const std::vector<Money>& m, const stats::GlobalScale& s) {
  auto z = standardised(m, s);
  Scored out;
  out.fit = gmm::select_and_prune(z, gmm::EmConfig{});
  out.c = score::compute_phi(out.fit.model, stats::quantile_set(z));
  return out;
}

Scored score_alone(const SyntheticSpec& spec) {
  const auto m = sample_payments(spec);
  return score_with(m, stats::global_scale(m));
}

// D and T are read against a population scale, so archetypes are scored
// inside the pooled default cohort rather than against themselves.
const stats::GlobalScale& cohort_scale() {
  static const stats::GlobalScale scale = [] {
    std::vector<Money> all;
    for (const auto& s : default_cohort(CohortOptions{})) {
      const auto m = sample_payments(s);
      all.insert(all.end(), m.begin(), m.end());
    }
    return stats::global_scale(all);
  }();
  return scale;
}

Scored score_in_cohort(const SyntheticSpec& spec) { return score_with(sample_payments(spec), cohort_scale()); }

}  // namespace

TEST_CASE("largest-remainder allocation") {
  CHECK(allocate_counts(std::vector<double>{0.5, 0.3, 0.2}, 10) == std::vector<std::size_t>{5, 3, 2});
  CHECK(allocate_counts(std::vector<double>{1, 1, 1}, 10) == std::vector<std::size_t>{4, 3, 3});
  CHECK(allocate_counts(std::vector<double>{0.52, 0.48}, 7) == std::vector<std::size_t>{4, 3});
}

TEST_CASE("sampling is a pure function of the spec") {
  auto spec = supplier_b_like("ACME LIMITED", 300, 42);
  auto a = sample_payments(spec), b = sample_payments(spec);
  CHECK(a == b);
  CHECK(a.size() == 300);
  CHECK(std::all_of(a.begin(), a.end(), [](Money m) { return m.positive(); }));
  spec.seed = 43;
  CHECK(sample_payments(spec) != a);
}

TEST_CASE("unimodal spec fits one component") {
  CHECK(score_alone(supplier_a_like("A", 400, 1)).fit.model.k() == 1);
}

TEST_CASE("separated bimodal spec is recovered") {
  auto spec = separated_bimodal("B", 8, 500, 3);
  auto m = sample_payments(spec);
  std::vector<double> x;
  for (auto v : m) x.push_back(v.to_double());
  auto fit = gmm::select_and_prune(x, gmm::EmConfig{});
  REQUIRE(fit.model.k() == 2);
  CHECK(std::abs(fit.model.components[0].mean - spec.modes[0].mean_gbp) < 0.2 * 200);
  CHECK(std::abs(fit.model.components[1].mean - spec.modes[1].mean_gbp) < 0.2 * 200);
  CHECK(std::abs(fit.model.components[0].weight - 0.5) < 0.05);
}

TEST_CASE("separated archetype outscores tiered archetype through D") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto pair = rank_pair("p", seed);
    REQUIRE(pair.size() == 2);
    const auto& sep = pair[0].pair_role == "separated" ? pair[0] : pair[1];
    const auto& tier = pair[0].pair_role == "separated" ? pair[1] : pair[0];
    auto s = score_in_cohort(sep), t = score_in_cohort(tier);
    CHECK(s.c.m == t.c.m);
    CHECK(s.c.a == doctest::Approx(t.c.a).epsilon(0.1));
    CHECK(s.c.t == doctest::Approx(t.c.t).epsilon(0.1));
    CHECK(s.c.d > 2 * t.c.d);
    CHECK(s.c.phi > t.c.phi);
  }
}

TEST_CASE("tiered quadrimodal archetype has a small D share") {
  const auto c = score_in_cohort(supplier_d_like("D", 400, 5)).c;
  CHECK(c.contributions.d < 5.0);
}

TEST_CASE("separated bimodal archetype beats the quadrimodal one") {
  const auto b = score_in_cohort(supplier_b_like("B", 300, 11)).c;
  const auto d = score_in_cohort(supplier_d_like("D", 300, 12)).c;
  CHECK(b.contributions.d > 25.0);
  CHECK(d.contributions.d < 5.0);
  CHECK(b.phi > d.phi);
}

TEST_CASE("heaped archetype is dominated by the tail factor") {
  const auto c = score_in_cohort(heaped_like("H", 300, 9)).c;
  CHECK(c.contributions.t > c.contributions.m);
  CHECK(c.contributions.t > c.contributions.a);
  CHECK(c.contributions.t > c.contributions.d);
}

TEST_CASE("default cohort layout") {
  CohortOptions opts;
  auto specs = default_cohort(opts);
  std::size_t analytic = 0, low = 0;
  std::set<std::string> names;
  for (const auto& s : specs) {
    (s.n_payments >= 50 ? analytic : low)++;
    names.insert(s.name);
  }
  CHECK(analytic == 119);
  CHECK(low == 60);
  CHECK(names.size() == specs.size());
  std::size_t pairs = 0;
  for (const auto& s : specs) pairs += !s.pair_id.empty();
  CHECK(pairs == 4);
  CHECK(default_cohort(opts).size() == specs.size());
}

TEST_CASE("cohort files are written") {
  const auto dir = std::filesystem::temp_directory_path() / "phi_synth_unit";
  std::filesystem::remove_all(dir);
  auto specs = rank_pair("x", 1);
  auto csv = generate_cohort(specs, dir, "salt");
  CHECK(std::filesystem::exists(csv));
  CHECK(std::filesystem::exists(dir / "ground_truth.json"));
  std::ifstream in(csv);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  std::size_t expect = 1;
  for (const auto& s : specs) expect += s.n_payments + s.n_nonpositive;
  CHECK(lines == expect);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic centres follow the design") {
  CentreDesign d;
  auto c = synthetic_centres(d, 3);
  std::size_t high = 0, low = 0;
  for (const auto& o : c) {
    (o.tier == score::Tier::kHigh ? high : low)++;
    CHECK(o.centre_gbp >= d.lo);
    CHECK(o.centre_gbp <= d.hi);
  }
  CHECK(high == d.n_high);
  CHECK(low == d.n_low);
}
