#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phi/robust_stats.hpp"
#include "phi/score.hpp"

namespace phi::anchoring {

/// One post-prune mixture component of one supplier, mapped back to GBP.
struct CentreObservation {
  std::string supplier;
  double centre_gbp = 0;
  score::Tier tier = score::Tier::kLow;
  double weight = 0;
  double phi = 0;
};

struct PeakConfig {
  double bin_width = 100;
  double range_min = 0;
  double range_max = 30000;
  double sigma_bins = 4;
  double truncate = 4;  // kernel radius in sigmas
  double prominence_frac = 0.04;
  double min_position = 300;
};

struct Histogram {
  double range_min = 0;
  double bin_width = 100;
  std::vector<double> counts;
  std::vector<double> density;  // smoothed counts
  std::size_t excluded = 0;     // values outside the range

  double bin_centre(std::size_t i) const { return range_min + (static_cast<double>(i) + 0.5) * bin_width; }
};

/// Bins are left-closed [lo, lo + w); range_max itself falls in the last bin.
/// Counts are convolved with a truncated, renormalised Gaussian kernel with
/// mirror-reflected edges. Throws NumericalError when no value is in range.
Histogram smoothed_histogram(std::span<const double> values, const PeakConfig& cfg);

struct Peak {
  std::size_t bin = 0;
  double position = 0;  // bin centre, GBP
  double height = 0;
  double prominence = 0;
};

/// Local maxima (plateaus resolve to their middle bin, array ends never count)
/// whose topographic prominence is at least prominence_frac of the maximum
/// density and whose position exceeds min_position. Ascending by position.
std::vector<Peak> detect_peaks(const Histogram& hist, const PeakConfig& cfg);

/// Prominence of each candidate index, searching outwards to the first higher
/// sample or the array end on each side.
std::vector<double> peak_prominences(std::span<const double> x, std::span<const std::size_t> peaks);

/// Indices of all local maxima of x.
std::vector<std::size_t> local_maxima(std::span<const double> x);

struct NearestPeak {
  std::size_t index = 0;  // into the peak list
  double peak = 0;
  double pct_distance = 0;  // 100 |centre - peak| / peak
};

/// Nearest peak by absolute distance; ties go to the smaller peak. Peaks must
/// be ascending and non-empty (NumericalError otherwise).
NearestPeak nearest_peak_distance(double centre, std::span<const double> peaks);

/// pct_distance <= window, with a relative slack of 1e-12 so that a centre
/// sitting exactly on the window edge counts as proximate.
bool within_window(double pct_distance, double window_pct);

struct PermutationResult {
  std::size_t observed = 0;
  double perm_mean = 0;
  double p = 1;           // share of permutations with count >= observed
  double p_add_one = 1;   // (1 + that count) / (1 + n_perm)
  std::size_t n_perm = 0;
  std::uint64_t seed = 0;
  std::size_t n_target = 0;
  std::size_t n_total = 0;
  std::size_t n_proximate = 0;
  std::vector<std::size_t> null_counts;  // one per permutation
};

/// Holds proximity flags fixed and reshuffles tier labels. Iteration i draws
/// from its own counter stream, so results do not depend on thread count or
/// on the order of the observations. Throws NumericalError when the target
/// tier is empty or the inputs differ in length.
PermutationResult permutation_test(std::span<const bool> proximate, std::span<const score::Tier> tiers,
                                   score::Tier target, std::size_t n_perm, std::uint64_t seed,
                                   unsigned threads = 1);

struct TierProximity {
  score::Tier tier = score::Tier::kLow;
  std::size_t n = 0;
  std::vector<std::size_t> within;   // per window
  std::vector<double> proportion;    // per window; 0 for an empty tier
};

struct PeakProximity {
  double peak = 0;
  // Indexed [tier][window]; tier order Low, Moderate, High.
  std::size_t assigned[3] = {0, 0, 0};
  std::vector<std::size_t> within[3];
  std::vector<double> proportion[3];  // within / tier size
};

struct AnchoringConfig {
  PeakConfig peaks;
  std::vector<double> windows_pct = {5, 10};
  std::size_t n_perm = 5000;
  std::uint64_t seed = 0;
  bool p_add_one = false;  // report (1 + c) / (1 + N) as the headline p
  std::optional<std::vector<double>> exogenous_peaks;
};

struct AnchoringResult {
  std::vector<CentreObservation> observations;
  Histogram histogram;  // High-tier centres; empty when peaks are exogenous
  std::vector<Peak> peaks;
  bool exogenous = false;
  bool no_peaks = false;
  std::vector<NearestPeak> nearest;          // per observation
  std::vector<std::vector<bool>> proximate;  // [window][observation]
  std::vector<TierProximity> tiers;          // Low, Moderate, High
  std::vector<PeakProximity> per_peak;
  std::vector<PermutationResult> permutations;  // per window, target High
  std::optional<stats::KsResult> ks;            // High vs Low distances
  std::vector<double> high_distances;
  std::vector<double> low_distances;
};

std::size_t tier_index(score::Tier t);

/// Peaks from the High-tier centres (or the exogenous list), nearest-peak
/// distances for every centre, proximity tables, one permutation test per
/// window and a K-S comparison of High against Low distances.
AnchoringResult analyse(std::vector<CentreObservation> observations, const AnchoringConfig& cfg, unsigned threads = 1);

}  // namespace phi::anchoring
