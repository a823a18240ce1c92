#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phi/gmm.hpp"
#include "phi/robust_stats.hpp"

namespace phi::score {

enum class Tier { kLow, kModerate, kHigh };

std::string_view to_string(Tier t);

/// Share of ln(PHI) carried by each factor, in percent.
struct Contributions {
  double m = 0, a = 0, t = 0, d = 0;
  bool defined = false;  // false when PHI is numerically 1
};

struct PhiComponents {
  int m = 1;
  double a = 1;
  double t = 1;
  double d = 1;
  double phi = 1;
  Contributions contributions;
};

/// 1 + |Bowley skewness|, in [1, 2].
double asymmetry_component(const stats::QuantileSet& q);

/// 1 + |ln t_q|.
double tail_component(const stats::QuantileSet& q, double eps = 1e-6);

/// 1 + w* s* + sum over secondary components of w_i s_i ln(1 + |mu_i - mu*|),
/// in the units the mixture was fitted in.
double dispersion_component(const gmm::MixtureModel& model);

/// Multiplies the four factors and fills in the log decomposition.
PhiComponents combine(int m, double a, double t, double d);

PhiComponents compute_phi(const gmm::MixtureModel& model, const stats::QuantileSet& q, double eps = 1e-6);

/// 100 ln(X) / ln(PHI) per factor; all zero and undefined when PHI <= 1 + 1e-12.
Contributions log_contributions(const PhiComponents& c);

/// 100 * average 1-based rank / N; the unique maximum maps to 100.
std::vector<double> percentile_ranks(std::span<const double> scores);

struct TierCuts {
  double p_low = 70;
  double p_high = 90;
  std::size_t min_cohort = 10;  // smaller cohorts are all Low
};

struct TierCounts {
  std::size_t high = 0;
  std::size_t moderate = 0;
  std::size_t low = 0;
};

/// Whole-supplier counts: High = round(N (100 - p_high) / 100), Moderate is the
/// next block up to round(N (100 - p_low) / 100), the rest Low.
TierCounts tier_counts(std::size_t n, const TierCuts& cuts);

struct PhiScore {
  std::string supplier;
  PhiComponents components;
  double percentile = 0;
  std::size_t rank = 0;  // 1 = highest PHI
  Tier tier = Tier::kLow;
};

/// Orders by PHI descending (pseudonym ascending on ties), assigns rank and
/// tier in place. Returns false when the cohort is below cuts.min_cohort and
/// everything was left Low.
bool assign_tiers(std::vector<PhiScore>& scores, const TierCuts& cuts);

}  // namespace phi::score
