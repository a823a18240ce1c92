#include "phi/gmm.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "phi/error.hpp"
#include "phi/rng.hpp"

namespace phi::gmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2 pi)
// Added to cluster masses so an emptied component cannot divide by zero.
constexpr double kMassFloor = 10.0 * std::numeric_limits<double>::epsilon();

double log_normal(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + d * d / variance);
}

struct Params {
  std::vector<double> w, mu, var;
};

// E-step: fills log responsibilities, returns mean log-likelihood.
double e_step(std::span<const double> x, const Params& p, std::vector<double>& log_resp) {
  const std::size_t k = p.w.size();
  const std::size_t n = x.size();
  log_resp.resize(n * k);
  std::vector<double> log_w(k);
  for (std::size_t j = 0; j < k; ++j) log_w[j] = std::log(p.w[j]);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &log_resp[i * k];
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = log_w[j] + log_normal(x[i], p.mu[j], p.var[j]);
      mx = std::max(mx, row[j]);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < k; ++j) row[j] -= lse;
    total += lse;
  }
  return total / static_cast<double>(n);
}

// Weighted parameter estimates from responsibilities (row-major n x k).
Params estimate(std::span<const double> x, const std::vector<double>& resp, std::size_t k, double reg) {
  const std::size_t n = x.size();
  Params p;
  p.w.assign(k, kMassFloor);
  p.mu.assign(k, 0.0);
  p.var.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double r = resp[i * k + j];
      p.w[j] += r;
      p.mu[j] += r * x[i];
    }
  }
  for (std::size_t j = 0; j < k; ++j) p.mu[j] /= p.w[j];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = x[i] - p.mu[j];
      p.var[j] += resp[i * k + j] * d * d;
    }
  }
  for (std::size_t j = 0; j < k; ++j) p.var[j] = p.var[j] / p.w[j] + reg;
  const double wsum = std::accumulate(p.w.begin(), p.w.end(), 0.0);
  for (auto& w : p.w) w /= wsum;
  return p;
}

std::size_t nearest(double v, const std::vector<double>& centres) {
  std::size_t best = 0;
  double bd = std::abs(v - centres[0]);
  for (std::size_t j = 1; j < centres.size(); ++j) {
    const double d = std::abs(v - centres[j]);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

std::vector<double> kmeanspp(std::span<const double> x, std::size_t k, CounterRng& rng) {
  const std::size_t n = x.size();
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<double> centres;
  centres.push_back(x[rng.below(n)]);
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = (x[i] - centres[0]) * (x[i] - centres[0]);
  double potential = std::accumulate(closest.begin(), closest.end(), 0.0);

  std::vector<double> cum(n);
  while (centres.size() < k) {
    std::partial_sum(closest.begin(), closest.end(), cum.begin());
    std::size_t best_idx = 0;
    double best_pot = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      std::size_t idx;
      if (potential > 0.0) {
        const double r = rng.uniform() * cum.back();
        idx = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
        idx = std::min(idx, n - 1);
      } else {
        idx = rng.below(n);
      }
      double pot = 0.0;
      for (std::size_t i = 0; i < n; ++i) pot += std::min(closest[i], (x[i] - x[idx]) * (x[i] - x[idx]));
      if (pot < best_pot) {
        best_pot = pot;
        best_idx = idx;
      }
    }
    const double c = x[best_idx];
    centres.push_back(c);
    for (std::size_t i = 0; i < n; ++i) closest[i] = std::min(closest[i], (x[i] - c) * (x[i] - c));
    potential = best_pot;
  }
  return centres;
}

// Moves the farthest points into empty clusters; returns true if anything moved.
bool relocate_empty(std::span<const double> x, std::vector<double>& centres, std::vector<int>& labels,
                    std::vector<std::size_t>& counts) {
  const std::size_t k = centres.size();
  std::vector<std::size_t> empty;
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) empty.push_back(j);
  }
  if (empty.empty()) return false;
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto dist = [&](std::size_t i) { return std::abs(x[i] - centres[static_cast<std::size_t>(labels[i])]); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist(a) > dist(b); });
  std::size_t cursor = 0;
  for (std::size_t j : empty) {
    while (cursor < order.size() && counts[static_cast<std::size_t>(labels[order[cursor]])] <= 1) ++cursor;
    if (cursor == order.size()) break;
    const std::size_t i = order[cursor++];
    --counts[static_cast<std::size_t>(labels[i])];
    labels[i] = static_cast<int>(j);
    ++counts[j];
    centres[j] = x[i];
  }
  return true;
}

MixtureModel to_model(const Params& p) {
  MixtureModel m;
  for (std::size_t j = 0; j < p.w.size(); ++j) m.components.push_back({p.w[j], p.mu[j], p.var[j]});
  std::stable_sort(m.components.begin(), m.components.end(),
                   [](const Component& a, const Component& b) { return a.mean < b.mean; });
  m.dominant = 0;
  for (std::size_t j = 1; j < m.components.size(); ++j) {
    if (m.components[j].weight > m.components[m.dominant].weight) m.dominant = j;
  }
  return m;
}

}  // namespace

double Component::sd() const { return std::sqrt(variance); }

int k_max(std::size_t n) { return std::max(1, std::min(4, static_cast<int>(n / 25))); }

InitParams kmeans_init(std::span<const double> sample, int k, std::uint64_t seed, double reg_covar, int max_iter,
                       std::uint64_t stream) {
  if (k < 1) throw NumericalError("gmm", "k-means needs k >= 1");
  const auto kk = static_cast<std::size_t>(k);
  const std::size_t n = sample.size();
  if (n < kk) throw NumericalError("gmm", fmt::format("cannot form {} clusters from {} points", k, n));

  InitParams out;
  out.labels.assign(n, 0);
  if (kk > 1) {
    CounterRng rng(seed, stream);
    std::vector<double> centres = kmeanspp(sample, kk, rng);

    double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : sample) var += (v - mean) * (v - mean);
    const double tol = 1e-4 * var / static_cast<double>(n);

    std::vector<std::size_t> counts(kk);
    for (int it = 0; it < max_iter; ++it) {
      out.iterations = it + 1;
      std::fill(counts.begin(), counts.end(), 0);
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const int l = static_cast<int>(nearest(sample[i], centres));
        changed |= (it == 0) || l != out.labels[i];
        out.labels[i] = l;
        ++counts[static_cast<std::size_t>(l)];
      }
      changed |= relocate_empty(sample, centres, out.labels, counts);
      std::vector<double> sums(kk, 0.0);
      for (std::size_t i = 0; i < n; ++i) sums[static_cast<std::size_t>(out.labels[i])] += sample[i];
      double shift = 0.0;
      for (std::size_t j = 0; j < kk; ++j) {
        const double c = sums[j] / static_cast<double>(counts[j]);
        shift += (c - centres[j]) * (c - centres[j]);
        centres[j] = c;
      }
      if (!changed || shift <= tol) break;
    }
    // Final assignment against the converged centres.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      out.labels[i] = static_cast<int>(nearest(sample[i], centres));
      ++counts[static_cast<std::size_t>(out.labels[i])];
    }
    relocate_empty(sample, centres, out.labels, counts);
  }

  std::vector<double> resp(n * kk, 0.0);
  for (std::size_t i = 0; i < n; ++i) resp[i * kk + static_cast<std::size_t>(out.labels[i])] = 1.0;
  Params p = estimate(sample, resp, kk, reg_covar);
  out.weights = std::move(p.w);
  out.means = std::move(p.mu);
  out.variances = std::move(p.var);
  return out;
}

MixtureModel em_fit(std::span<const double> sample, int k, const EmConfig& cfg, LikelihoodTrace* trace) {
  const std::size_t n = sample.size();
  const auto kk = static_cast<std::size_t>(k);
  if (n == 0) throw NumericalError("gmm", "cannot fit a mixture to an empty sample");

  MixtureModel best;
  double best_bound = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  std::vector<double> log_resp;
  std::vector<double> resp(n * kk);

  for (int init = 0; init < std::max(1, cfg.n_init); ++init) {
    InitParams ip = kmeans_init(sample, k, cfg.seed, cfg.reg_covar, cfg.kmeans_max_iter, static_cast<std::uint64_t>(init));
    Params p{ip.weights, ip.means, ip.variances};
    LikelihoodTrace local;
    double bound = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int iter = 0;
    for (iter = 1; iter <= cfg.max_iter; ++iter) {
      const double prev = bound;
      bound = e_step(sample, p, log_resp);
      if (!std::isfinite(bound)) {
        throw NumericalError("gmm", fmt::format("non-finite log-likelihood at EM iteration {} (k={})", iter, k));
      }
      local.push_back(bound);
      for (std::size_t i = 0; i < resp.size(); ++i) resp[i] = std::exp(log_resp[i]);
      p = estimate(sample, resp, kk, cfg.reg_covar);
      if (std::abs(bound - prev) < cfg.tol) {
        converged = true;
        break;
      }
    }
    if (!have_best || bound > best_bound) {
      best = to_model(p);
      best.n_iter = std::min(iter, cfg.max_iter);
      best.converged = converged;
      best_bound = bound;
      have_best = true;
      if (trace) *trace = std::move(local);
    }
  }
  best.loglik = log_likelihood(best, sample);
  if (!std::isfinite(best.loglik)) {
    throw NumericalError("gmm", fmt::format("non-finite final log-likelihood after {} iterations (k={})", best.n_iter, k));
  }
  best.bic = bic(best, n);
  return best;
}

double bic(const MixtureModel& model, std::size_t n) {
  const double params = 3.0 * static_cast<double>(model.k()) - 1.0;
  return -2.0 * model.loglik + params * std::log(static_cast<double>(n));
}

double log_likelihood(const MixtureModel& model, std::span<const double> sample) {
  Params p;
  for (const auto& c : model.components) {
    p.w.push_back(c.weight);
    p.mu.push_back(c.mean);
    p.var.push_back(c.variance);
  }
  std::vector<double> lr;
  return e_step(sample, p, lr) * static_cast<double>(sample.size());
}

std::vector<std::vector<double>> responsibilities(const MixtureModel& model, std::span<const double> sample) {
  Params p;
  for (const auto& c : model.components) {
    p.w.push_back(c.weight);
    p.mu.push_back(c.mean);
    p.var.push_back(c.variance);
  }
  std::vector<double> lr;
  e_step(sample, p, lr);
  const std::size_t k = model.k();
  std::vector<std::vector<double>> out(sample.size(), std::vector<double>(k));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) out[i][j] = std::exp(lr[i * k + j]);
  }
  return out;
}

MixtureModel prune(const MixtureModel& model, double threshold, std::vector<Component>* dropped) {
  MixtureModel out = model;
  out.components.clear();
  for (const auto& c : model.components) {
    if (c.weight >= threshold) {
      out.components.push_back(c);
    } else if (dropped) {
      dropped->push_back(c);
    }
  }
  // The heaviest component carries at least 1/k >= 0.25 of the mass.
  assert(!out.components.empty());
  if (out.components.empty()) out.components.push_back(model.components[model.dominant]);
  double total = 0.0;
  for (const auto& c : out.components) total += c.weight;
  for (auto& c : out.components) c.weight /= total;
  out.dominant = 0;
  for (std::size_t j = 1; j < out.components.size(); ++j) {
    if (out.components[j].weight > out.components[out.dominant].weight) out.dominant = j;
  }
  return out;
}

Selection select_and_prune(std::span<const double> sample, const EmConfig& cfg) {
  const int kmax = k_max(sample.size());
  Selection sel;
  bool have = false;
  for (int k = 1; k <= kmax; ++k) {
    if (sample.size() < static_cast<std::size_t>(k)) break;
    MixtureModel m = em_fit(sample, k, cfg);
    sel.candidates.push_back({k, m.bic, m.loglik, m.n_iter, m.converged});
    if (!have || m.bic < sel.selected.bic) {
      sel.selected = std::move(m);
      have = true;
    }
  }
  sel.model = prune(sel.selected, cfg.prune_threshold, &sel.pruned);
  return sel;
}

}  // namespace phi::gmm
