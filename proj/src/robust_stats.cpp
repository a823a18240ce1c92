#include "phi/robust_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "phi/error.hpp"

namespace phi::stats {

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw NumericalError("robust_stats", "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw NumericalError("robust_stats", fmt::format("quantile level {} outside [0,1]", p));
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

QuantileSet quantile_set_sorted(std::span<const double> sorted) {
  QuantileSet q;
  q.n = sorted.size();
  q.q05 = quantile(sorted, 0.05);
  q.q25 = quantile(sorted, 0.25);
  q.q50 = quantile(sorted, 0.50);
  q.q75 = quantile(sorted, 0.75);
  q.q95 = quantile(sorted, 0.95);
  return q;
}

QuantileSet quantile_set(std::span<const double> sample) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  return quantile_set_sorted(s);
}

GlobalScale global_scale(std::span<const Money> amounts) {
  if (amounts.empty()) throw NumericalError("robust_stats", "global scale of an empty corpus");
  std::vector<double> v;
  v.reserve(amounts.size());
  for (Money m : amounts) v.push_back(m.to_double());
  std::sort(v.begin(), v.end());
  return {quantile(v, 0.5), quantile(v, 0.75) - quantile(v, 0.25)};
}

double robust_standardise(double amount_gbp, const GlobalScale& scale) {
  if (!(scale.iqr > 0.0)) {
    throw ConfigError("robust_stats", "global IQR is zero; the corpus is degenerate and cannot be standardised");
  }
  return (amount_gbp - scale.median) / scale.iqr;
}

double robust_standardise(Money amount, const GlobalScale& scale) {
  return robust_standardise(amount.to_double(), scale);
}

double to_gbp(double standardised, const GlobalScale& scale) { return standardised * scale.iqr + scale.median; }

double bowley_skewness(const QuantileSet& q) {
  const double iqr = q.q75 - q.q25;
  if (iqr == 0.0) return 0.0;
  const double a = (q.q75 + q.q25 - 2.0 * q.q50) / iqr;
  return std::clamp(a, -1.0, 1.0);
}

double tail_ratio(const QuantileSet& q, double eps) {
  return ((q.q95 - q.q05) + eps) / ((q.q75 - q.q25) + eps);
}

double coefficient_of_variation(std::span<const double> sample, int ddof) {
  if (sample.empty()) throw NumericalError("robust_stats", "coefficient of variation of an empty sample");
  const double n = static_cast<double>(sample.size());
  if (n - ddof <= 0) throw NumericalError("robust_stats", "too few observations for the requested ddof");
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  if (mean == 0.0) throw NumericalError("robust_stats", "coefficient of variation undefined for zero mean");
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - ddof)) / mean;
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    // positions i..j-1 share 1-based ranks i+1..j
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("robust_stats", "correlation undefined for a constant input");
  return sxy / std::sqrt(sxx * syy);
}

Correlation spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericalError("robust_stats", "spearman inputs differ in length");
  if (x.size() < 3) throw NumericalError("robust_stats", "spearman needs at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  Correlation c;
  c.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);
  const double df = static_cast<double>(x.size() - 2);
  if (std::abs(c.rho) >= 1.0) {
    c.p = 0.0;
  } else {
    const double t = c.rho * std::sqrt(df / ((1.0 - c.rho) * (1.0 + c.rho)));
    boost::math::students_t dist(df);
    c.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  }
  return c;
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr int kTerms = 100;
  double p = 0.0;
  if (lambda < 1.18) {
    // Jacobi theta form converges quickly for small lambda.
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double m = 2.0 * k - 1.0;
      cdf += std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    p = 1.0 - cdf;
  } else {
    double sign = 1.0;
    for (int k = 1; k <= kTerms; ++k) {
      p += sign * std::exp(-2.0 * k * k * lambda * lambda);
      sign = -sign;
    }
    p *= 2.0;
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw NumericalError("robust_stats", "two-sample K-S needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double v;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      v = sa[i];
    } else {
      v = sb[j];
    }
    while (i < sa.size() && sa[i] <= v) ++i;
    while (j < sb.size() && sb[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double en = na * nb / (na + nb);
  r.p = kolmogorov_sf(std::sqrt(en) * d);
  return r;
}

std::vector<LorenzPoint> lorenz_points(std::span<const double> spend_by_supplier) {
  std::vector<double> s(spend_by_supplier.begin(), spend_by_supplier.end());
  for (double v : s) {
    if (!(v >= 0.0)) throw NumericalError("robust_stats", "Lorenz curve needs non-negative spend");
  }
  std::sort(s.begin(), s.end());
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  if (!(total > 0.0)) throw NumericalError("robust_stats", "Lorenz curve undefined for zero total spend");
  std::vector<LorenzPoint> pts;
  pts.reserve(s.size() + 1);
  pts.push_back({0.0, 0.0});
  double cum = 0.0;
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    pts.push_back({static_cast<double>(i + 1) / n, cum / total});
  }
  pts.back() = {1.0, 1.0};
  return pts;
}

double top_share(std::span<const LorenzPoint> curve, double fraction) {
  if (curve.size() < 2) return 0.0;
  const double x = 1.0 - fraction;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].supplier_share >= x) {
      const auto& a = curve[i - 1];
      const auto& b = curve[i];
      const double w = b.supplier_share > a.supplier_share ? (x - a.supplier_share) / (b.supplier_share - a.supplier_share) : 1.0;
      return 1.0 - (a.spend_share + w * (b.spend_share - a.spend_share));
    }
  }
  return 0.0;
}

}  // namespace phi::stats
