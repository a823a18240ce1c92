#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phi::harmonise {

/// Whole-token alias applied to the trailing run of a name ("LTD" -> "LIMITED").
struct SuffixRule {
  std::string alias;
  std::string canonical;
  bool enabled = true;
};

/// LTD->LIMITED and CO->COMPANY enabled; ACADEMY->SCHOOL shipped disabled.
std::vector<SuffixRule> default_suffix_rules();

struct NameKey {
  std::string raw;
  std::string normalised;
  std::vector<std::string> tokens;
};

/// Uppercases ASCII letters, deletes apostrophes and full stops, turns other
/// punctuation into spaces, collapses whitespace and standardises trailing
/// suffix tokens. Bytes >= 0x80 are kept as word characters. Returns nullopt
/// when nothing survives.
std::optional<NameKey> try_normalise_name(std::string_view raw, std::span<const SuffixRule> rules);

/// As try_normalise_name but throws IngestError for an empty result.
NameKey normalise_name(std::string_view raw, std::span<const SuffixRule> rules);

/// Smoothed IDF over a document collection: ln((1 + N) / (1 + df)) + 1.
class IdfTable {
 public:
  IdfTable() = default;
  explicit IdfTable(std::span<const NameKey> documents);
  double weight(const std::string& token) const;
  std::size_t documents() const { return n_docs_; }

 private:
  std::unordered_map<std::string, double> idf_;
  std::size_t n_docs_ = 0;
};

struct MatchScores {
  double tfidf_cosine = 0;
  int token_set_ratio = 0;
  double jaccard = 0;
  double ensemble = 0;
};

struct MatchRule {
  double cosine_min = 0.76;
  int ratio_min = 77;
  double jaccard_min = 0.36;
  double ensemble_min = 0.66;  // strict
  // Ensemble = weighted mean of (cosine, ratio / 100, jaccard).
  double w_cosine = 1.0;
  double w_ratio = 1.0;
  double w_jaccard = 1.0;
  // Individual conditions can be switched off (used for monotonicity checks).
  bool use_cosine = true;
  bool use_ratio = true;
  bool use_jaccard = true;
  bool use_ensemble = true;

  bool matches(const MatchScores& s) const;
};

/// Similarity of two strings as 2 * LCS / (|a| + |b|), i.e. one minus the
/// normalised insert/delete edit distance. Two empty strings score 1.
double indel_ratio(std::string_view a, std::string_view b);

/// Token-set ratio on 0..100, rounded half up.
int token_set_ratio(std::span<const std::string> a, std::span<const std::string> b);

/// |A and B| / |A or B| over distinct tokens.
double jaccard(std::span<const std::string> a, std::span<const std::string> b);

double tfidf_cosine(std::span<const std::string> a, std::span<const std::string> b, const IdfTable& idf);

MatchScores score_pair(const NameKey& a, const NameKey& b, const IdfTable& idf, const MatchRule& rule = {});

struct NameFrequency {
  std::string raw;
  std::size_t rows = 0;
};

struct Cluster {
  std::vector<std::string> members;  // raw names, sorted
  std::string canonical;
  std::string pseudonym;
  std::size_t rows = 0;
};

struct MatchEdge {
  std::string a;  // normalised names, a < b
  std::string b;
  MatchScores scores;
};

struct HarmoniseConfig {
  std::vector<SuffixRule> suffixes = default_suffix_rules();
  MatchRule rule;
  std::string salt = "phi";
};

struct CanonicalMap {
  std::vector<Cluster> clusters;                  // sorted by canonical name
  std::map<std::string, std::size_t> cluster_of;  // raw name -> cluster index
  std::vector<std::string> unnormalisable;        // raw names with nothing left after normalisation
  std::vector<MatchEdge> edges;
  std::size_t pairs_scored = 0;

  const Cluster* find(const std::string& raw) const;
};

/// Connected components of the match graph over distinct normalised names.
/// Only pairs sharing a token are compared. The canonical name is the member
/// with the most rows, ties to the lexicographically smallest.
CanonicalMap build_canonical_map(std::span<const NameFrequency> names, const HarmoniseConfig& cfg);

/// "S-" + first 8 hex digits of HMAC-SHA256(salt, canonical [+ attempt tag]).
std::string pseudonym(std::string_view canonical, std::string_view salt, int attempt = 0);

}  // namespace phi::harmonise
