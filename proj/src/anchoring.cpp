#include "phi/anchoring.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <thread>

#include <fmt/format.h>

#include "phi/error.hpp"
#include "phi/rng.hpp"

namespace phi::anchoring {

namespace {

std::vector<double> gaussian_kernel(double sigma, double truncate) {
  const auto radius = static_cast<long>(truncate * sigma + 0.5);
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long j = -radius; j <= radius; ++j) {
    const double w = sigma > 0 ? std::exp(-0.5 * (j / sigma) * (j / sigma)) : (j == 0 ? 1.0 : 0.0);
    k[static_cast<std::size_t>(j + radius)] = w;
    sum += w;
  }
  for (auto& w : k) w /= sum;
  return k;
}

// Mirror index with the edge sample repeated: (d c b a | a b c d | d c b a).
std::size_t reflect(long i, long n) {
  const long period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - 1 - i);
}

}  // namespace

std::size_t tier_index(score::Tier t) {
  switch (t) {
    case score::Tier::kLow: return 0;
    case score::Tier::kModerate: return 1;
    case score::Tier::kHigh: return 2;
  }
  return 0;
}

Histogram smoothed_histogram(std::span<const double> values, const PeakConfig& cfg) {
  if (!(cfg.bin_width > 0) || !(cfg.range_max > cfg.range_min)) {
    throw ConfigError("anchoring", "histogram needs a positive bin width and a non-empty range");
  }
  Histogram h;
  h.range_min = cfg.range_min;
  h.bin_width = cfg.bin_width;
  const auto nbins = static_cast<std::size_t>(std::ceil((cfg.range_max - cfg.range_min) / cfg.bin_width - 1e-9));
  h.counts.assign(nbins, 0.0);
  std::size_t in_range = 0;
  for (double v : values) {
    if (!(v >= cfg.range_min && v <= cfg.range_max)) {
      ++h.excluded;
      continue;
    }
    auto idx = static_cast<std::size_t>(std::floor((v - cfg.range_min) / cfg.bin_width));
    if (idx >= nbins) idx = nbins - 1;
    h.counts[idx] += 1.0;
    ++in_range;
  }
  if (in_range == 0) throw NumericalError("anchoring", "no centre falls inside the histogram range");

  const auto kernel = gaussian_kernel(cfg.sigma_bins, cfg.truncate);
  const long radius = static_cast<long>(kernel.size() / 2);
  const long n = static_cast<long>(nbins);
  h.density.assign(nbins, 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = -radius; j <= radius; ++j) acc += kernel[static_cast<std::size_t>(j + radius)] * h.counts[reflect(i + j, n)];
    h.density[static_cast<std::size_t>(i)] = acc;
  }
  return h;
}

std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  if (x.size() < 3) return peaks;
  const std::size_t i_max = x.size() - 1;
  std::size_t i = 1;
  while (i < i_max) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead < i_max && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
      }
    }
    ++i;
  }
  return peaks;
}

std::vector<double> peak_prominences(std::span<const double> x, std::span<const std::size_t> peaks) {
  std::vector<double> out;
  out.reserve(peaks.size());
  for (std::size_t p : peaks) {
    const double top = x[p];
    double left_min = top;
    for (std::size_t i = p + 1; i-- > 0;) {
      if (x[i] > top) break;
      left_min = std::min(left_min, x[i]);
    }
    double right_min = top;
    for (std::size_t i = p; i < x.size(); ++i) {
      if (x[i] > top) break;
      right_min = std::min(right_min, x[i]);
    }
    out.push_back(top - std::max(left_min, right_min));
  }
  return out;
}

std::vector<Peak> detect_peaks(const Histogram& hist, const PeakConfig& cfg) {
  std::vector<Peak> out;
  if (hist.density.empty()) return out;
  const double dmax = *std::max_element(hist.density.begin(), hist.density.end());
  const auto idx = local_maxima(hist.density);
  const auto prom = peak_prominences(hist.density, idx);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double pos = hist.bin_centre(idx[j]);
    if (prom[j] >= cfg.prominence_frac * dmax && pos > cfg.min_position) {
      out.push_back({idx[j], pos, hist.density[idx[j]], prom[j]});
    }
  }
  return out;
}

NearestPeak nearest_peak_distance(double centre, std::span<const double> peaks) {
  if (peaks.empty()) throw NumericalError("anchoring", "nearest peak requested from an empty peak set");
  NearestPeak best;
  double best_abs = std::abs(centre - peaks[0]);
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const double d = std::abs(centre - peaks[i]);
    if (d < best_abs || (d == best_abs && peaks[i] < peaks[best.index])) {
      best_abs = d;
      best.index = i;
    }
  }
  best.peak = peaks[best.index];
  best.pct_distance = 100.0 * best_abs / best.peak;
  return best;
}

bool within_window(double pct_distance, double window_pct) { return pct_distance <= window_pct * (1.0 + 1e-12); }

PermutationResult permutation_test(std::span<const bool> proximate, std::span<const score::Tier> tiers,
                                   score::Tier target, std::size_t n_perm, std::uint64_t seed, unsigned threads) {
  if (proximate.size() != tiers.size()) throw NumericalError("anchoring", "proximity flags and tiers differ in length");
  PermutationResult r;
  r.n_perm = n_perm;
  r.seed = seed;
  r.n_total = tiers.size();
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    if (proximate[i]) ++r.n_proximate;
    if (tiers[i] == target) {
      ++r.n_target;
      if (proximate[i]) ++r.observed;
    }
  }
  if (r.n_target == 0) {
    throw NumericalError("anchoring", fmt::format("permutation target tier {} has no observations", score::to_string(target)));
  }

  // A random relabelling hands the target tier a uniformly random subset of
  // n_target observations; only how many of them are proximate matters, so
  // each iteration draws that subset sequentially without replacement.
  r.null_counts.assign(n_perm, 0);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t it = begin; it < end; ++it) {
      CounterRng rng(seed, it);
      std::uint64_t remaining = r.n_total;
      std::uint64_t prox_left = r.n_proximate;
      std::size_t count = 0;
      for (std::size_t j = 0; j < r.n_target; ++j) {
        if (rng.below(remaining) < prox_left) {
          ++count;
          --prox_left;
        }
        --remaining;
      }
      r.null_counts[it] = count;
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || n_perm < 2 * threads) {
    run(0, n_perm);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_perm + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(n_perm, b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
    for (auto& th : pool) th.join();
  }

  std::size_t ge = 0;
  double sum = 0.0;
  for (std::size_t c : r.null_counts) {
    sum += static_cast<double>(c);
    if (c >= r.observed) ++ge;
  }
  if (n_perm > 0) {
    r.perm_mean = sum / static_cast<double>(n_perm);
    r.p = static_cast<double>(ge) / static_cast<double>(n_perm);
  }
  r.p_add_one = (1.0 + static_cast<double>(ge)) / (1.0 + static_cast<double>(n_perm));
  return r;
}

AnchoringResult analyse(std::vector<CentreObservation> observations, const AnchoringConfig& cfg, unsigned threads) {
  AnchoringResult res;
  res.observations = std::move(observations);
  const auto& obs = res.observations;

  std::vector<double> peak_values;
  if (cfg.exogenous_peaks) {
    res.exogenous = true;
    peak_values = *cfg.exogenous_peaks;
    std::sort(peak_values.begin(), peak_values.end());
    for (double v : peak_values) {
      if (!(v > 0)) throw ConfigError("anchoring", fmt::format("exogenous peak {} is not positive", v));
      res.peaks.push_back({0, v, 0, 0});
    }
  } else {
    std::vector<double> high;
    for (const auto& o : obs) {
      if (o.tier == score::Tier::kHigh) high.push_back(o.centre_gbp);
    }
    if (high.empty()) throw NumericalError("anchoring", "no High-tier centres to extract peaks from");
    res.histogram = smoothed_histogram(high, cfg.peaks);
    res.peaks = detect_peaks(res.histogram, cfg.peaks);
    for (const auto& p : res.peaks) peak_values.push_back(p.position);
  }

  const std::size_t nw = cfg.windows_pct.size();
  res.tiers.resize(3);
  for (std::size_t t = 0; t < 3; ++t) {
    res.tiers[t].tier = t == 0 ? score::Tier::kLow : (t == 1 ? score::Tier::kModerate : score::Tier::kHigh);
    res.tiers[t].within.assign(nw, 0);
    res.tiers[t].proportion.assign(nw, 0.0);
  }
  for (const auto& o : obs) ++res.tiers[tier_index(o.tier)].n;

  if (peak_values.empty()) {
    res.no_peaks = true;
    return res;
  }

  for (double v : peak_values) {
    PeakProximity pp;
    pp.peak = v;
    for (auto& w : pp.within) w.assign(nw, 0);
    for (auto& w : pp.proportion) w.assign(nw, 0.0);
    res.per_peak.push_back(std::move(pp));
  }

  res.proximate.assign(nw, std::vector<bool>(obs.size(), false));
  std::vector<score::Tier> tiers;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto np = nearest_peak_distance(obs[i].centre_gbp, peak_values);
    res.nearest.push_back(np);
    tiers.push_back(obs[i].tier);
    const std::size_t ti = tier_index(obs[i].tier);
    ++res.per_peak[np.index].assigned[ti];
    for (std::size_t w = 0; w < nw; ++w) {
      if (within_window(np.pct_distance, cfg.windows_pct[w])) {
        res.proximate[w][i] = true;
        ++res.tiers[ti].within[w];
        ++res.per_peak[np.index].within[ti][w];
      }
    }
    if (obs[i].tier == score::Tier::kHigh) res.high_distances.push_back(np.pct_distance);
    if (obs[i].tier == score::Tier::kLow) res.low_distances.push_back(np.pct_distance);
  }
  for (auto& tp : res.tiers) {
    for (std::size_t w = 0; w < nw; ++w) {
      tp.proportion[w] = tp.n ? static_cast<double>(tp.within[w]) / static_cast<double>(tp.n) : 0.0;
    }
  }
  for (auto& pp : res.per_peak) {
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t n = res.tiers[t].n;
        pp.proportion[t][w] = n ? static_cast<double>(pp.within[t][w]) / static_cast<double>(n) : 0.0;
      }
    }
  }

  if (res.tiers[2].n > 0) {
    for (std::size_t w = 0; w < nw; ++w) {
      // std::vector<bool> has no contiguous storage to span over.
      const std::unique_ptr<bool[]> flags(new bool[obs.size()]);
      for (std::size_t i = 0; i < obs.size(); ++i) flags[i] = res.proximate[w][i];
      res.permutations.push_back(permutation_test(std::span<const bool>(flags.get(), obs.size()), tiers,
                                                  score::Tier::kHigh, cfg.n_perm, cfg.seed, threads));
    }
  }
  if (!res.high_distances.empty() && !res.low_distances.empty()) {
    res.ks = stats::ks_two_sample(res.high_distances, res.low_distances);
  }
  return res;
}

}  // namespace phi::anchoring
