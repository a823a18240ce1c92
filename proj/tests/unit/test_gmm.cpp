#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "phi/gmm.hpp"
#include "phi/rng.hpp"

using namespace phi;
using namespace phi::gmm;

namespace {

std::vector<double> normal_draws(std::size_t n, double mu, double sd, std::uint64_t seed) {
  CounterRng rng(seed, 7);
  const boost::math::normal_distribution<> z;
  std::vector<double> x(n);
  for (auto& v : x) v = mu + sd * boost::math::quantile(z, rng.uniform_open());
  return x;
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

}  // namespace

TEST_CASE("k_max follows the 25-observations-per-component rule") {
  CHECK(k_max(50) == 2);
  CHECK(k_max(100) == 4);
  CHECK(k_max(24) == 1);
  CHECK(k_max(1) == 1);
  CHECK(k_max(10000) == 4);
}

TEST_CASE("k-means++ seeding") {
  const auto x = concat(normal_draws(100, 0, 1, 1), normal_draws(100, 10, 1, 2));
  auto init = kmeans_init(x, 2, 0);
  REQUIRE(init.means.size() == 2);
  const double lo = std::min(init.means[0], init.means[1]), hi = std::max(init.means[0], init.means[1]);
  CHECK(std::abs(lo - 0) < 0.5);
  CHECK(std::abs(hi - 10) < 0.5);

  auto one = kmeans_init(x, 1, 0);
  CHECK(one.weights[0] == doctest::Approx(1.0));
  CHECK(one.means[0] == doctest::Approx(mean(x)));

  const std::vector<double> flat(40, 2.0);
  auto deg = kmeans_init(flat, 2, 0);
  for (double v : deg.variances) CHECK(v == doctest::Approx(1e-6));
}

TEST_CASE("EM with k=1 is the closed form") {
  const auto x = normal_draws(300, 3, 2, 5);
  const double m = mean(x);
  double var = 0;
  for (double v : x) var += (v - m) * (v - m);
  var /= x.size();
  auto fit = em_fit(x, 1, EmConfig{});
  REQUIRE(fit.components.size() == 1);
  CHECK(fit.components[0].mean == doctest::Approx(m));
  CHECK(fit.components[0].variance == doctest::Approx(var + 1e-6));
  CHECK(fit.converged);

  auto flat = em_fit(std::vector<double>(60, 1.5), 1, EmConfig{});
  CHECK(flat.components[0].variance == doctest::Approx(1e-6));
}

TEST_CASE("EM recovers a separated two-component mixture") {
  const auto x = concat(normal_draws(250, 0, 1, 21), normal_draws(250, 8, 1, 22));
  LikelihoodTrace trace;
  auto fit = em_fit(x, 2, EmConfig{}, &trace);
  REQUIRE(fit.components.size() == 2);
  CHECK(std::abs(fit.components[0].mean - 0) < 0.2);
  CHECK(std::abs(fit.components[1].mean - 8) < 0.2);
  CHECK(std::abs(fit.components[0].weight - 0.5) < 0.05);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1] - 1e-9);
  CHECK(fit.loglik == doctest::Approx(log_likelihood(fit, x)));
}

TEST_CASE("BIC") {
  MixtureModel m;
  m.components = {{1.0, 0.0, 1.0}};
  m.loglik = -50;
  CHECK(bic(m, 100) == doctest::Approx(100 + 2 * std::log(100.0)));
  MixtureModel m2 = m;
  m2.components = {{0.5, 0.0, 1.0}, {0.5, 1.0, 1.0}};
  CHECK(bic(m, 100) < bic(m2, 100));

  const auto x = concat(normal_draws(250, 0, 1, 31), normal_draws(250, 8, 1, 32));
  EmConfig cfg;
  CHECK(bic(em_fit(x, 2, cfg), x.size()) < bic(em_fit(x, 1, cfg), x.size()));
}

TEST_CASE("selection and pruning") {
  auto uni = select_and_prune(normal_draws(200, 0, 1, 41), EmConfig{});
  CHECK(uni.model.k() == 1);
  CHECK(uni.candidates.size() == 4);

  // Three clusters, one holding 3% of the mass.
  auto x = concat(normal_draws(97 * 3, 0, 1, 51), normal_draws(97 * 3, 12, 1, 52));
  x = concat(x, normal_draws(18, 40, 0.5, 53));
  MixtureModel three;
  three.components = {{0.485, 0, 1}, {0.485, 12, 1}, {0.03, 40, 0.25}};
  std::vector<Component> dropped;
  auto pruned = prune(three, 0.05, &dropped);
  CHECK(pruned.k() == 2);
  CHECK(dropped.size() == 1);
  CHECK(pruned.components[0].weight + pruned.components[1].weight == doctest::Approx(1.0));
  CHECK(pruned.components[0].weight == doctest::Approx(0.5));

  auto sel = select_and_prune(x, EmConfig{});
  CHECK(sel.model.k() <= sel.selected.k());
  double w = 0;
  for (const auto& c : sel.model.components) w += c.weight;
  CHECK(w == doctest::Approx(1.0));
  for (std::size_t i = 1; i < sel.model.components.size(); ++i) {
    CHECK(sel.model.components[i - 1].mean < sel.model.components[i].mean);
  }
}

TEST_CASE("fits are deterministic for a fixed seed") {
  const auto x = concat(normal_draws(120, 0, 1, 61), normal_draws(80, 5, 2, 62));
  auto a = select_and_prune(x, EmConfig{});
  auto b = select_and_prune(x, EmConfig{});
  REQUIRE(a.model.k() == b.model.k());
  for (std::size_t i = 0; i < a.model.components.size(); ++i) {
    CHECK(a.model.components[i].mean == b.model.components[i].mean);
    CHECK(a.model.components[i].variance == b.model.components[i].variance);
  }
}
