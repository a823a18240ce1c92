#include "phi/harmonise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "phi/error.hpp"

namespace phi::harmonise {

std::vector<SuffixRule> default_suffix_rules() {
  return {{"LTD", "LIMITED", true}, {"CO", "COMPANY", true}, {"ACADEMY", "SCHOOL", false}};
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> distinct_sorted(std::span<const std::string> tokens) {
  std::vector<std::string> v(tokens.begin(), tokens.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& t : v) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::size_t lcs_length(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (char ca : a) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = ca == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// round_half_up(100 * 2 * lcs / total) in exact integer arithmetic.
int scaled_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 100;
  const std::size_t lcs = lcs_length(a, b);
  return static_cast<int>((400 * lcs + total) / (2 * total));
}

// Sparse tf-idf vector keyed by sorted token.
struct TfIdfVector {
  std::vector<std::pair<std::string, double>> entries;
  double norm = 0;
};

TfIdfVector vectorise(std::span<const std::string> tokens, const IdfTable& idf) {
  std::map<std::string, double> tf;
  for (const auto& t : tokens) tf[t] += 1.0;
  TfIdfVector v;
  double ss = 0.0;
  for (const auto& [tok, count] : tf) {
    const double w = count * idf.weight(tok);
    v.entries.emplace_back(tok, w);
    ss += w * w;
  }
  v.norm = std::sqrt(ss);
  return v;
}

double cosine(const TfIdfVector& a, const TfIdfVector& b) {
  if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    const int c = a.entries[i].first.compare(b.entries[j].first);
    if (c == 0) {
      dot += a.entries[i++].second * b.entries[j++].second;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::clamp(dot / (a.norm * b.norm), 0.0, 1.0);
}

double jaccard_sorted(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    const int c = a[i].compare(b[j]);
    if (c == 0) {
      ++inter;
      ++i;
      ++j;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

int token_set_ratio_sorted(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::string> inter, only_a, only_b;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
  const std::string t0 = join(inter);
  auto extend = [&](const std::vector<std::string>& extra) {
    std::string s = t0;
    const std::string e = join(extra);
    if (!s.empty() && !e.empty()) s.push_back(' ');
    return s + e;
  };
  const std::string t1 = extend(only_a);
  const std::string t2 = extend(only_b);
  auto pair_ratio = [](const std::string& x, const std::string& y) {
    if (x.empty() || y.empty()) return 0;
    return scaled_ratio(x, y);
  };
  return std::max({pair_ratio(t0, t1), pair_ratio(t0, t2), pair_ratio(t1, t2)});
}

double ensemble_of(const MatchScores& s, const MatchRule& r) {
  const double wsum = r.w_cosine + r.w_ratio + r.w_jaccard;
  return (r.w_cosine * s.tfidf_cosine + r.w_ratio * (s.token_set_ratio / 100.0) + r.w_jaccard * s.jaccard) / wsum;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::optional<NameKey> try_normalise_name(std::string_view raw, std::span<const SuffixRule> rules) {
  std::string s;
  s.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto c = static_cast<unsigned char>(raw[i]);
    // U+2018 / U+2019 curly apostrophes are deleted like ASCII ones; U+00A0 is a space.
    if (c == 0xE2 && i + 2 < raw.size() && static_cast<unsigned char>(raw[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(raw[i + 2]) == 0x98 || static_cast<unsigned char>(raw[i + 2]) == 0x99)) {
      i += 2;
      continue;
    }
    if (c == 0xC2 && i + 1 < raw.size() && static_cast<unsigned char>(raw[i + 1]) == 0xA0) {
      s.push_back(' ');
      ++i;
      continue;
    }
    if (c == '\'' || c == '.') continue;
    if (c >= 0x80) {
      s.push_back(static_cast<char>(c));
    } else if (std::isalnum(c)) {
      s.push_back(static_cast<char>(std::toupper(c)));
    } else {
      s.push_back(' ');
    }
  }
  NameKey key;
  key.raw = std::string(raw);
  key.tokens = split_ws(s);
  if (key.tokens.empty()) return std::nullopt;

  for (std::size_t i = key.tokens.size(); i-- > 0;) {
    auto& tok = key.tokens[i];
    bool suffix = false;
    for (const auto& r : rules) {
      if (!r.enabled) continue;
      if (tok == r.alias) {
        tok = r.canonical;
        suffix = true;
        break;
      }
      if (tok == r.canonical) {
        suffix = true;
        break;
      }
    }
    if (!suffix) break;
  }
  key.normalised = join(key.tokens);
  return key;
}

NameKey normalise_name(std::string_view raw, std::span<const SuffixRule> rules) {
  auto k = try_normalise_name(raw, rules);
  if (!k) throw IngestError("harmonise", fmt::format("name '{}' is empty after normalisation", raw));
  return std::move(*k);
}

IdfTable::IdfTable(std::span<const NameKey> documents) : n_docs_(documents.size()) {
  std::map<std::string, std::size_t> df;
  for (const auto& d : documents) {
    for (const auto& t : distinct_sorted(d.tokens)) ++df[t];
  }
  const double n = static_cast<double>(n_docs_);
  for (const auto& [tok, count] : df) idf_[tok] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
}

double IdfTable::weight(const std::string& token) const {
  auto it = idf_.find(token);
  if (it != idf_.end()) return it->second;
  return std::log(1.0 + static_cast<double>(n_docs_)) + 1.0;
}

bool MatchRule::matches(const MatchScores& s) const {
  if (use_cosine && !(s.tfidf_cosine >= cosine_min)) return false;
  if (use_ratio && !(s.token_set_ratio >= ratio_min)) return false;
  if (use_jaccard && !(s.jaccard >= jaccard_min)) return false;
  if (use_ensemble && !(s.ensemble > ensemble_min)) return false;
  return true;
}

double indel_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(lcs_length(a, b)) / static_cast<double>(total);
}

int token_set_ratio(std::span<const std::string> a, std::span<const std::string> b) {
  return token_set_ratio_sorted(distinct_sorted(a), distinct_sorted(b));
}

double jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  return jaccard_sorted(distinct_sorted(a), distinct_sorted(b));
}

double tfidf_cosine(std::span<const std::string> a, std::span<const std::string> b, const IdfTable& idf) {
  return cosine(vectorise(a, idf), vectorise(b, idf));
}

MatchScores score_pair(const NameKey& a, const NameKey& b, const IdfTable& idf, const MatchRule& rule) {
  MatchScores s;
  s.tfidf_cosine = tfidf_cosine(a.tokens, b.tokens, idf);
  s.token_set_ratio = token_set_ratio(a.tokens, b.tokens);
  s.jaccard = jaccard(a.tokens, b.tokens);
  s.ensemble = ensemble_of(s, rule);
  return s;
}

const Cluster* CanonicalMap::find(const std::string& raw) const {
  auto it = cluster_of.find(raw);
  return it == cluster_of.end() ? nullptr : &clusters[it->second];
}

std::string pseudonym(std::string_view canonical, std::string_view salt, int attempt) {
  std::string msg(canonical);
  if (attempt > 0) msg += fmt::format("\x1f{}", attempt);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HMAC(EVP_sha256(), salt.data(), static_cast<int>(salt.size()), reinterpret_cast<const unsigned char*>(msg.data()),
       msg.size(), digest, &len);
  return fmt::format("S-{:02x}{:02x}{:02x}{:02x}", digest[0], digest[1], digest[2], digest[3]);
}

CanonicalMap build_canonical_map(std::span<const NameFrequency> names, const HarmoniseConfig& cfg) {
  CanonicalMap out;

  // Merge duplicate raw strings, then group raw names by normalised key.
  std::map<std::string, std::size_t> rows_by_raw;
  for (const auto& nf : names) rows_by_raw[nf.raw] += nf.rows;

  std::map<std::string, std::vector<std::string>> raws_by_norm;
  std::vector<NameKey> keys;
  for (const auto& [raw, rows] : rows_by_raw) {
    auto k = try_normalise_name(raw, cfg.suffixes);
    if (!k) {
      out.unnormalisable.push_back(raw);
      continue;
    }
    auto [it, fresh] = raws_by_norm.try_emplace(k->normalised);
    it->second.push_back(raw);
    if (fresh) keys.push_back(std::move(*k));
  }
  std::sort(keys.begin(), keys.end(), [](const NameKey& a, const NameKey& b) { return a.normalised < b.normalised; });

  const IdfTable idf(keys);
  const std::size_t n = keys.size();
  std::vector<std::vector<std::string>> token_sets(n);
  std::vector<TfIdfVector> vecs(n);
  std::map<std::string, std::vector<std::size_t>> postings;
  for (std::size_t i = 0; i < n; ++i) {
    token_sets[i] = distinct_sorted(keys[i].tokens);
    vecs[i] = vectorise(keys[i].tokens, idf);
    for (const auto& t : token_sets[i]) postings[t].push_back(i);
  }

  DisjointSets ds(n);
  const MatchRule& rule = cfg.rule;
  std::vector<std::size_t> seen(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> cands;
    for (const auto& t : token_sets[i]) {
      for (std::size_t j : postings[t]) {
        if (j > i && seen[j] != i) {
          seen[j] = i;
          cands.push_back(j);
        }
      }
    }
    std::sort(cands.begin(), cands.end());
    for (std::size_t j : cands) {
      ++out.pairs_scored;
      MatchScores s;
      s.jaccard = jaccard_sorted(token_sets[i], token_sets[j]);
      if (rule.use_jaccard && !(s.jaccard >= rule.jaccard_min)) continue;
      s.tfidf_cosine = cosine(vecs[i], vecs[j]);
      if (rule.use_cosine && !(s.tfidf_cosine >= rule.cosine_min)) continue;
      s.token_set_ratio = token_set_ratio_sorted(token_sets[i], token_sets[j]);
      s.ensemble = ensemble_of(s, rule);
      if (!rule.matches(s)) continue;
      ds.unite(i, j);
      out.edges.push_back({keys[i].normalised, keys[j].normalised, s});
    }
  }

  std::map<std::size_t, std::vector<std::string>> members_by_root;
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = members_by_root[ds.find(i)];
    const auto& raws = raws_by_norm[keys[i].normalised];
    m.insert(m.end(), raws.begin(), raws.end());
  }
  for (auto& [root, members] : members_by_root) {
    Cluster c;
    std::sort(members.begin(), members.end());
    c.members = std::move(members);
    std::size_t best_rows = 0;
    for (const auto& raw : c.members) {
      const std::size_t r = rows_by_raw[raw];
      c.rows += r;
      if (c.canonical.empty() || r > best_rows) {
        best_rows = r;
        c.canonical = raw;
      }
    }
    out.clusters.push_back(std::move(c));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.canonical < b.canonical; });

  std::set<std::string> used;
  for (std::size_t ci = 0; ci < out.clusters.size(); ++ci) {
    auto& c = out.clusters[ci];
    for (int attempt = 0;; ++attempt) {
      std::string p = pseudonym(c.canonical, cfg.salt, attempt);
      if (used.insert(p).second) {
        c.pseudonym = std::move(p);
        break;
      }
    }
    for (const auto& raw : c.members) out.cluster_of[raw] = ci;
  }
  return out;
}

}  // namespace phi::harmonise
