#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phi/anchoring.hpp"
#include "phi/money.hpp"
#include "phi/score.hpp"

namespace phi::synth {

enum class Archetype { kUnimodal, kTieredMultimodal, kSeparatedBimodal, kHeavyTail, kHeaped };

std::string_view to_string(Archetype a);
std::optional<Archetype> parse_archetype(std::string_view s);

struct ModeSpec {
  double weight = 1;
  double mean_gbp = 0;
  double sd_gbp = 0;
};

struct SyntheticSpec {
  std::string name;  // canonical creditor name; the modal spelling in the corpus
  Archetype archetype = Archetype::kUnimodal;
  std::vector<ModeSpec> modes;
  std::size_t n_payments = 0;
  std::uint64_t seed = 0;
  std::string directorate = "Synthetic Directorate";
  std::string subjective_detail = "Services";
  // Heaped suppliers put round(heap_fraction * n) payments exactly on heap_gbp.
  double heap_fraction = 0;
  double heap_gbp = 0;
  // Heavy-tail suppliers draw this share of payments from a Pareto(xm, alpha).
  double pareto_fraction = 0;
  double pareto_xm = 0;
  double pareto_alpha = 0;
  // Alternative spellings used for a minority of rows, and extra credit notes.
  std::vector<std::string> name_variants;
  std::size_t n_nonpositive = 0;
  // Suppliers built as a rank-check pair share a pair id; role "separated" or "tiered".
  std::string pair_id;
  std::string pair_role;
};

/// Draws the supplier's positive payments. Component counts are allocated
/// exactly by largest remainder; each draw is an inverse-CDF normal truncated
/// below at 0.01 by resampling and rounded to the penny; the result is then
/// shuffled. A pure function of the spec.
std::vector<Money> sample_payments(const SyntheticSpec& spec);

/// Integer counts summing to n that best match the weights (largest remainder,
/// ties to the earlier component).
std::vector<std::size_t> allocate_counts(std::span<const double> weights, std::size_t n);

/// Case-study shapes: Supplier-A-like unimodal, B-like separated bimodal,
/// C-like tiered trimodal, D-like tiered quadrimodal and the max-PHI profile.
SyntheticSpec supplier_a_like(std::string name, std::size_t n, std::uint64_t seed);
SyntheticSpec supplier_b_like(std::string name, std::size_t n, std::uint64_t seed);
SyntheticSpec supplier_c_like(std::string name, std::size_t n, std::uint64_t seed);
SyntheticSpec supplier_d_like(std::string name, std::size_t n, std::uint64_t seed);
SyntheticSpec max_phi_like(std::string name, std::size_t n, std::uint64_t seed);
SyntheticSpec heavy_tail_like(std::string name, std::size_t n, std::uint64_t seed);
SyntheticSpec heaped_like(std::string name, std::size_t n, std::uint64_t seed);

/// Two-component mixture with the given separation in component sds.
SyntheticSpec separated_bimodal(std::string name, double separation, std::size_t n, std::uint64_t seed);

/// Two suppliers with identical shape up to a positive affine map (so M, A and
/// T agree) but with the separated one stretched so that D is far larger.
std::vector<SyntheticSpec> rank_pair(std::string_view pair_id, std::uint64_t seed);

struct CohortOptions {
  std::uint64_t seed = 0;
  std::size_t analytic_suppliers = 119;
  std::size_t low_volume_suppliers = 60;
  double volume_scale = 1.0;  // multiplies every supplier's payment count
};

/// Mixed-archetype cohort laid out over the directorate sizes of the case
/// study, with low-volume suppliers, spelling variants and credit notes.
std::vector<SyntheticSpec> default_cohort(const CohortOptions& opts);

/// Cohort whose corpus has close to target_rows rows in total.
std::vector<SyntheticSpec> performance_cohort(std::size_t target_rows, std::uint64_t seed);

/// Writes the corpus in the default ingest column layout. Rows are emitted
/// spec by spec in spec order.
void write_corpus_csv(std::span<const SyntheticSpec> specs, std::ostream& out);

/// Ground truth as JSON (specs, archetypes, pair roles, pseudonyms under salt).
void write_ground_truth(std::span<const SyntheticSpec> specs, std::string_view salt, std::ostream& out);

/// Writes corpus.csv and ground_truth.json into dir; returns the CSV path.
std::filesystem::path generate_cohort(std::span<const SyntheticSpec> specs, const std::filesystem::path& dir,
                                      std::string_view salt);

struct PairCheck {
  std::string pair_id;
  std::string separated;  // pseudonyms
  std::string tiered;
  double phi_separated = 0;
  double phi_tiered = 0;
  bool found = false;
  bool ok = false;
  std::string detail;  // full decomposition of both sides
};

/// For every rank pair in the specs, checks that the separated member scores
/// strictly higher than the tiered member.
std::vector<PairCheck> oracle_rank_check(std::span<const SyntheticSpec> specs, std::span<const score::PhiScore> scores,
                                         std::string_view salt);

/// Synthetic mixture centres for permutation calibration. A centre is
/// placed within +-window_pct of a uniformly chosen peak with the tier's
/// probability and otherwise uniformly in [lo, hi] outside every window.
struct CentreDesign {
  std::vector<double> peaks = {1150, 7450, 11050, 14350, 16550, 20750, 23450};
  double window_pct = 5;
  double lo = 300;
  double hi = 30000;
  std::size_t n_high = 150;
  std::size_t n_low = 950;
  double p_high = 0.5;
  double p_low = 0.25;
};

std::vector<anchoring::CentreObservation> synthetic_centres(const CentreDesign& design, std::uint64_t seed,
                                                            std::uint64_t stream = 0);

}  // namespace phi::synth
