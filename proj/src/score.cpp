#include "phi/score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phi::score {

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::kHigh: return "High";
    case Tier::kModerate: return "Moderate";
    case Tier::kLow: break;
  }
  return "Low";
}

double asymmetry_component(const stats::QuantileSet& q) { return 1.0 + std::abs(stats::bowley_skewness(q)); }

double tail_component(const stats::QuantileSet& q, double eps) {
  return 1.0 + std::abs(std::log(stats::tail_ratio(q, eps)));
}

double dispersion_component(const gmm::MixtureModel& model) {
  const auto& comps = model.components;
  const auto& dom = comps[model.dominant];
  double d = 1.0 + dom.weight * dom.sd();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (i == model.dominant) continue;
    d += comps[i].weight * comps[i].sd() * std::log1p(std::abs(comps[i].mean - dom.mean));
  }
  return d;
}

Contributions log_contributions(const PhiComponents& c) {
  Contributions out;
  if (!(c.phi > 1.0 + 1e-12)) return out;
  const double lp = std::log(c.phi);
  out.m = 100.0 * std::log(static_cast<double>(c.m)) / lp;
  out.a = 100.0 * std::log(c.a) / lp;
  out.t = 100.0 * std::log(c.t) / lp;
  out.d = 100.0 * std::log(c.d) / lp;
  out.defined = true;
  return out;
}

PhiComponents combine(int m, double a, double t, double d) {
  PhiComponents c;
  c.m = m;
  c.a = a;
  c.t = t;
  c.d = d;
  c.phi = static_cast<double>(m) * a * t * d;
  c.contributions = log_contributions(c);
  return c;
}

PhiComponents compute_phi(const gmm::MixtureModel& model, const stats::QuantileSet& q, double eps) {
  return combine(static_cast<int>(model.k()), asymmetry_component(q), tail_component(q, eps),
                 dispersion_component(model));
}

std::vector<double> percentile_ranks(std::span<const double> scores) {
  const auto ranks = stats::average_ranks(scores);
  const double n = static_cast<double>(scores.size());
  std::vector<double> out(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) out[i] = 100.0 * ranks[i] / n;
  return out;
}

TierCounts tier_counts(std::size_t n, const TierCuts& cuts) {
  TierCounts tc;
  if (n < cuts.min_cohort) {
    tc.low = n;
    return tc;
  }
  const double nn = static_cast<double>(n);
  const auto high = static_cast<std::size_t>(std::lround(nn * (100.0 - cuts.p_high) / 100.0));
  const auto above_low = static_cast<std::size_t>(std::lround(nn * (100.0 - cuts.p_low) / 100.0));
  tc.high = std::min(high, n);
  const std::size_t upper = std::clamp(above_low, tc.high, n);
  tc.moderate = upper - tc.high;
  tc.low = n - upper;
  return tc;
}

bool assign_tiers(std::vector<PhiScore>& scores, const TierCuts& cuts) {
  std::stable_sort(scores.begin(), scores.end(), [](const PhiScore& a, const PhiScore& b) {
    if (a.components.phi != b.components.phi) return a.components.phi > b.components.phi;
    return a.supplier < b.supplier;
  });
  const TierCounts tc = tier_counts(scores.size(), cuts);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i].rank = i + 1;
    if (i < tc.high) {
      scores[i].tier = Tier::kHigh;
    } else if (i < tc.high + tc.moderate) {
      scores[i].tier = Tier::kModerate;
    } else {
      scores[i].tier = Tier::kLow;
    }
  }
  return scores.size() >= cuts.min_cohort;
}

}  // namespace phi::score
