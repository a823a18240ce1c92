#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phi/anchoring.hpp"
#include "phi/config.hpp"
#include "phi/gmm.hpp"
#include "phi/harmonise.hpp"
#include "phi/ingest.hpp"
#include "phi/robust_stats.hpp"
#include "phi/score.hpp"

namespace phi::pipeline {

/// One analysed supplier.
struct SupplierResult {
  std::string id;  // pseudonym
  std::string canonical;
  std::vector<Money> amounts;  // cleaned payments in input order
  Money total_spend;
  std::string directorate;  // modal by row count, ties to the smaller name
  std::string subjective_detail;
  stats::QuantileSet quantiles;  // standardised units
  gmm::Selection fit;
  score::PhiScore score;
  double d_gbp = 0;  // dispersion recomputed in GBP units; diagnostic only
  double cv = 0;
  std::size_t cv_rank = 0;  // 1 = largest CV
};

struct SectoralRow {
  std::string directorate;
  std::size_t high = 0;
  std::size_t moderate = 0;
  std::size_t low = 0;
  std::size_t total = 0;
};

struct ContributionStat {
  std::string component;  // M, A, T or D
  double mean_log = 0;    // mean of ln X over the cohort
  double median_log = 0;
  double mean_pct = 0;    // mean share of ln PHI
  double median_pct = 0;
};

struct CvRow {
  std::string supplier;
  std::size_t phi_rank = 0;
  std::size_t cv_rank = 0;
  double cv = 0;
  score::PhiComponents components;
};

/// Pairwise Spearman correlations; NaN where a column is constant.
struct SpearmanMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rho;
  std::vector<std::vector<double>> p;
};

struct CohortSummary {
  std::size_t n_raw_names = 0;
  std::size_t n_canonical_suppliers = 0;  // clusters over every parsed name
  std::size_t n_clean_suppliers = 0;      // canonical suppliers with at least one clean row
  std::size_t n_rows_name_rejected = 0;   // clean rows whose name normalised to nothing
  std::size_t n_analytic_suppliers = 0;
  std::size_t n_analytic_records = 0;
  Money analytic_spend;
  double analytic_median = 0;  // GBP
  stats::GlobalScale scale;
  double top20_spend_share = 0;
  bool degenerate_cohort = false;
};

struct RunResult {
  ingest::ParseResult parsed;  // rows dropped after use; rejects kept
  ingest::CorpusStats corpus;
  harmonise::CanonicalMap names;
  std::map<std::string, std::size_t> raw_name_rows;  // over parsed rows
  CohortSummary cohort;
  std::vector<SupplierResult> suppliers;  // rank order (highest PHI first)
  std::vector<anchoring::CentreObservation> centres;
  std::optional<anchoring::AnchoringResult> anchoring;
  std::string anchoring_skipped;  // reason, when anchoring did not run
  std::vector<SectoralRow> sectoral;
  std::vector<ContributionStat> contributions;
  std::vector<CvRow> cv_table;
  std::optional<stats::Correlation> cv_phi;
  SpearmanMatrix component_spearman;      // PHI, M, A, T, D values
  SpearmanMatrix contribution_spearman;   // PHI and the four percentage shares
  std::vector<stats::LorenzPoint> lorenz;
  std::vector<std::string> warnings;
};

/// Ingest -> positive filter -> harmonise -> volume filter -> global scale ->
/// per-supplier fits (parallel over cfg.threads, results independent of it) ->
/// scores and tiers -> anchoring and cohort aggregates. Stage failures surface
/// as phi::Error with the stage name.
RunResult run_pipeline(const RunConfig& cfg);

/// Reads, filters and harmonises only; suppliers and later fields stay empty.
RunResult run_harmonisation(const RunConfig& cfg);

std::vector<SectoralRow> sectoral_aggregate(std::span<const SupplierResult> suppliers);
std::vector<ContributionStat> cohort_contribution_stats(std::span<const score::PhiScore> scores);

/// Top k suppliers by PHI rank with their CV ranks (suppliers must carry cv_rank).
std::vector<CvRow> cv_comparison(std::span<const SupplierResult> suppliers, std::size_t top_k);

/// Assigns cv and cv_rank (descending CV, ties to the smaller id).
void rank_by_cv(std::vector<SupplierResult>& suppliers, int ddof);

SpearmanMatrix spearman_matrix(std::vector<std::string> labels, const std::vector<std::vector<double>>& columns);

/// Post-prune components of every supplier mapped to GBP, in rank order.
std::vector<anchoring::CentreObservation> mixture_centres(std::span<const SupplierResult> suppliers,
                                                          const stats::GlobalScale& scale);

}  // namespace phi::pipeline
