#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace phi::gmm {

/// EM hyperparameters. tol is the absolute change in mean per-sample
/// log-likelihood between successive iterations.
struct EmConfig {
  double tol = 1e-3;
  int max_iter = 100;
  int n_init = 1;
  std::uint64_t seed = 0;
  double reg_covar = 1e-6;  // added to every variance estimate
  int kmeans_max_iter = 300;
  double prune_threshold = 0.05;
};

struct Component {
  double weight = 0;
  double mean = 0;
  double variance = 0;
  double sd() const;
};

struct MixtureModel {
  std::vector<Component> components;  // ascending mean
  std::size_t dominant = 0;           // argmax weight; ties go to the lower mean
  double loglik = 0;                  // total log-likelihood of the fitted sample
  double bic = 0;
  int n_iter = 0;
  bool converged = true;

  std::size_t k() const { return components.size(); }
};

/// min(4, floor(n / 25)), never below 1.
int k_max(std::size_t n);

struct InitParams {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<int> labels;
  int iterations = 0;
};

/// Lloyd's k-means with k-means++ seeding drawn from (seed, stream), then
/// per-cluster occupancy, mean and variance (+ reg). Empty clusters are
/// re-seeded at the point farthest from its current centre.
/// Throws NumericalError when k < 1 or the sample has fewer than k points.
InitParams kmeans_init(std::span<const double> sample, int k, std::uint64_t seed, double reg_covar = 1e-6,
                       int max_iter = 300, std::uint64_t stream = 0);

/// Mean log-likelihood after each E-step, in iteration order.
using LikelihoodTrace = std::vector<double>;

/// EM for a k-component univariate mixture. Throws NumericalError (naming the
/// iteration) if the likelihood becomes non-finite. A run that exhausts
/// max_iter is returned with converged = false.
MixtureModel em_fit(std::span<const double> sample, int k, const EmConfig& cfg, LikelihoodTrace* trace = nullptr);

/// -2 loglik + (3k - 1) ln n.
double bic(const MixtureModel& model, std::size_t n);

double log_likelihood(const MixtureModel& model, std::span<const double> sample);

/// Posterior membership probabilities, one row per observation.
std::vector<std::vector<double>> responsibilities(const MixtureModel& model, std::span<const double> sample);

struct Candidate {
  int k = 0;
  double bic = 0;
  double loglik = 0;
  int n_iter = 0;
  bool converged = true;
};

struct Selection {
  MixtureModel model;                  // pruned, renormalised
  MixtureModel selected;               // BIC winner before pruning
  std::vector<Candidate> candidates;   // k = 1..k_max
  std::vector<Component> pruned;       // dropped for weight < threshold
};

/// Fits k = 1..k_max(n), keeps the lowest BIC (ties to the smaller k), then
/// drops components below cfg.prune_threshold and renormalises once.
Selection select_and_prune(std::span<const double> sample, const EmConfig& cfg);

/// Drops components with weight below threshold, renormalises and re-derives
/// the dominant index. Never empties the model.
MixtureModel prune(const MixtureModel& model, double threshold, std::vector<Component>* dropped = nullptr);

}  // namespace phi::gmm
