#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "phi/money.hpp"

namespace phi::stats {

/// Linear-interpolation quantile on a sorted sample (Hyndman-Fan type 7):
/// h = (n-1)p, x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
/// Throws NumericalError on an empty sample or p outside [0, 1].
double quantile(std::span<const double> sorted, double p);

struct QuantileSet {
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
  std::size_t n = 0;
};

/// Sorts a copy of the sample and extracts the five quantiles used by the index.
QuantileSet quantile_set(std::span<const double> sample);
QuantileSet quantile_set_sorted(std::span<const double> sorted);

/// Median and IQR over every cleaned payment, in GBP.
struct GlobalScale {
  double median = 0;
  double iqr = 0;
};

GlobalScale global_scale(std::span<const Money> amounts);

/// (amount - median) / iqr. Throws ConfigError when iqr <= 0.
double robust_standardise(Money amount, const GlobalScale& scale);
double robust_standardise(double amount_gbp, const GlobalScale& scale);
/// Inverse map back to GBP.
double to_gbp(double standardised, const GlobalScale& scale);

/// Quartile skewness in [-1, 1]; 0 when the quartiles coincide.
double bowley_skewness(const QuantileSet& q);

/// ((Q95 - Q05) + eps) / ((Q75 - Q25) + eps); >= 1 for any valid quantile set.
double tail_ratio(const QuantileSet& q, double eps = 1e-6);

/// sigma / mu on raw amounts. ddof 0 gives the population deviation.
/// Throws NumericalError on an empty sample or zero mean.
double coefficient_of_variation(std::span<const double> sample, int ddof = 0);

/// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);

struct Correlation {
  double rho = 0;
  double p = 1;
};

/// Pearson correlation of average-tied ranks; two-sided p from Student t with
/// n-2 degrees of freedom. Throws NumericalError for n < 3, unequal lengths, or
/// an all-tied input.
Correlation spearman_rho(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0;
  double p = 1;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

/// Two-sample Kolmogorov-Smirnov. p uses the asymptotic distribution with
/// effective size n_a n_b / (n_a + n_b). Throws NumericalError on empty input.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct LorenzPoint {
  double supplier_share = 0;
  double spend_share = 0;
};

/// Cumulative shares with suppliers in ascending spend order, starting at (0,0).
/// Throws NumericalError on negative spend or zero total.
std::vector<LorenzPoint> lorenz_points(std::span<const double> spend_by_supplier);

/// Spend share held by the top `fraction` of suppliers, read off the Lorenz curve
/// with linear interpolation.
double top_share(std::span<const LorenzPoint> curve, double fraction);

}  // namespace phi::stats
