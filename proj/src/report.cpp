#include "phi/report.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "phi/csv.hpp"
#include "phi/error.hpp"

namespace phi::report {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string num(double v) {
  if (std::isnan(v)) return "NA";
  return fmt::format("{}", v);
}

namespace {

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string window_label(double w) { return fmt::format("{}", w); }

class Bundle {
 public:
  explicit Bundle(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("report", fmt::format("cannot create output directory {}: {}", dir_.string(), ec.message()));
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("report", fmt::format("cannot write {}", (dir_ / name).string()));
    out << content;
    if (!out) throw ConfigError("report", fmt::format("write failed for {}", (dir_ / name).string()));
    files_.emplace_back(name, sha256_hex(content));
  }

  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    csv::write_row(out, header);
    for (const auto& r : rows) csv::write_row(out, r);
    write(name, out.str());
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

json config_json(const RunConfig& cfg) {
  json j = json::object();
  std::istringstream in(canonical_echo(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

json inputs_json(const RunConfig& cfg) {
  json arr = json::array();
  for (const auto& p : cfg.inputs) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream data;
    data << in.rdbuf();
    arr.push_back({{"path", p.generic_string()}, {"bytes", data.str().size()}, {"sha256", sha256_hex(data.str())}});
  }
  return arr;
}

void write_manifest(Bundle& b, const RunConfig& cfg, const std::string& name, const std::string& command) {
  json j;
  j["tool"] = "phi";
  j["command"] = command;
  j["config_hash"] = config_hash(cfg);
  j["config"] = config_json(cfg);
  j["inputs"] = inputs_json(cfg);
  json files = json::array();
  for (const auto& [f, digest] : b.files()) files.push_back({{"file", f}, {"sha256", digest}});
  j["files"] = files;
  b.write_json(name, j);
}

json corpus_json(const pipeline::RunResult& run) {
  const auto& c = run.corpus;
  json j;
  j["n_rows_raw"] = c.n_rows_raw;
  j["n_rows_rejected"] = c.n_rows_rejected;
  j["n_rows_dropped_nonpositive"] = c.n_rows_dropped_nonpositive;
  j["n_rows_clean"] = c.n_rows_clean;
  j["n_raw_names"] = c.n_raw_names;
  j["n_unparsed_dates"] = c.n_unparsed_dates;
  j["n_duplicate_transaction_nos"] = c.n_duplicate_transaction_nos;
  j["total_spend_raw"] = c.total_spend_raw.str();
  j["total_spend"] = c.total_spend.str();
  j["min_amount"] = c.min_amount.str();
  j["max_amount"] = c.max_amount.str();
  j["median_amount"] = jnum(c.median_amount);
  const auto& h = run.cohort;
  j["n_canonical_suppliers"] = h.n_canonical_suppliers;
  j["n_clean_suppliers"] = h.n_clean_suppliers;
  j["n_rows_name_rejected"] = h.n_rows_name_rejected;
  j["harmonisation_pairs_scored"] = run.names.pairs_scored;
  j["harmonisation_match_edges"] = run.names.edges.size();
  if (!run.suppliers.empty()) {
    j["n_analytic_suppliers"] = h.n_analytic_suppliers;
    j["n_analytic_records"] = h.n_analytic_records;
    j["analytic_spend"] = h.analytic_spend.str();
    j["analytic_median_amount"] = jnum(h.analytic_median);
    j["global_median"] = jnum(h.scale.median);
    j["global_iqr"] = jnum(h.scale.iqr);
    j["top20_supplier_spend_share"] = jnum(h.top20_spend_share);
    j["degenerate_cohort"] = h.degenerate_cohort;
  }
  j["warnings"] = run.warnings;
  return j;
}

void harmonise_files(Bundle& b, const pipeline::RunResult& run) {
  b.write_json("corpus_stats.json", corpus_json(run));

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : run.parsed.rejects) rows.push_back({r.source, std::to_string(r.line), r.reason, r.raw});
  b.write_csv("rejects.csv", {"source", "line", "reason", "raw"}, rows);

  rows.clear();
  for (const auto& c : run.names.clusters) {
    for (const auto& raw : c.members) {
      const auto it = run.raw_name_rows.find(raw);
      rows.push_back({raw, c.canonical, c.pseudonym, std::to_string(c.members.size()),
                      std::to_string(it == run.raw_name_rows.end() ? 0 : it->second), std::to_string(c.rows)});
    }
  }
  for (const auto& raw : run.names.unnormalisable) {
    const auto it = run.raw_name_rows.find(raw);
    rows.push_back({raw, "", "", "0", std::to_string(it == run.raw_name_rows.end() ? 0 : it->second), "0"});
  }
  b.write_csv("harmonisation_audit.csv",
              {"raw_name", "canonical_name", "pseudonym", "cluster_size", "raw_rows", "cluster_rows"}, rows);

  rows.clear();
  for (const auto& e : run.names.edges) {
    rows.push_back({e.a, e.b, num(e.scores.tfidf_cosine), std::to_string(e.scores.token_set_ratio),
                    num(e.scores.jaccard), num(e.scores.ensemble)});
  }
  b.write_csv("harmonisation_edges.csv", {"name_a", "name_b", "tfidf_cosine", "token_set_ratio", "jaccard", "ensemble"},
              rows);
}

json supplier_json(const pipeline::SupplierResult& s) {
  const auto& c = s.score.components;
  json j;
  j["rank"] = s.score.rank;
  j["supplier"] = s.id;
  j["tier"] = score::to_string(s.score.tier);
  j["percentile"] = jnum(s.score.percentile);
  j["phi"] = jnum(c.phi);
  j["M"] = c.m;
  j["A"] = jnum(c.a);
  j["T"] = jnum(c.t);
  j["D"] = jnum(c.d);
  j["contributions"] = {{"defined", c.contributions.defined},
                        {"M", jnum(c.contributions.m)},
                        {"A", jnum(c.contributions.a)},
                        {"T", jnum(c.contributions.t)},
                        {"D", jnum(c.contributions.d)}};
  j["n_payments"] = s.amounts.size();
  j["total_spend"] = s.total_spend.str();
  j["directorate"] = s.directorate;
  j["subjective_detail"] = s.subjective_detail;
  j["cv"] = jnum(s.cv);
  j["cv_rank"] = s.cv_rank;
  j["D_gbp"] = jnum(s.d_gbp);
  j["converged"] = s.fit.selected.converged;
  return j;
}

json fit_json(const pipeline::SupplierResult& s, const stats::GlobalScale& scale) {
  json j;
  j["supplier"] = s.id;
  j["n"] = s.amounts.size();
  json cands = json::array();
  for (const auto& c : s.fit.candidates) {
    cands.push_back({{"k", c.k}, {"bic", jnum(c.bic)}, {"loglik", jnum(c.loglik)}, {"n_iter", c.n_iter},
                     {"converged", c.converged}});
  }
  j["candidates"] = cands;
  j["selected_k"] = s.fit.selected.k();
  j["k"] = s.fit.model.k();
  auto comp = [&](const gmm::Component& c) {
    return json{{"weight", jnum(c.weight)},      {"mean", jnum(c.mean)},
                {"sd", jnum(c.sd())},            {"mean_gbp", jnum(stats::to_gbp(c.mean, scale))},
                {"sd_gbp", jnum(c.sd() * scale.iqr)}};
  };
  json comps = json::array();
  for (const auto& c : s.fit.model.components) comps.push_back(comp(c));
  j["components"] = comps;
  j["dominant"] = s.fit.model.dominant;
  json pruned = json::array();
  for (const auto& c : s.fit.pruned) pruned.push_back(comp(c));
  j["pruned"] = pruned;
  j["quantiles"] = {{"q05", jnum(s.quantiles.q05)}, {"q25", jnum(s.quantiles.q25)}, {"q50", jnum(s.quantiles.q50)},
                    {"q75", jnum(s.quantiles.q75)}, {"q95", jnum(s.quantiles.q95)}};
  return j;
}

std::vector<std::vector<std::string>> matrix_rows(const pipeline::SpearmanMatrix& m) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    for (std::size_t j = 0; j < m.labels.size(); ++j) {
      rows.push_back({m.labels[i], m.labels[j], num(m.rho[i][j]), num(m.p[i][j])});
    }
  }
  return rows;
}

void anchoring_files(Bundle& b, const anchoring::AnchoringResult& a, const RunConfig& cfg) {
  const auto& ac = cfg.anchoring;
  json j;
  j["exogenous_peaks"] = a.exogenous;
  j["config"] = {{"bin_width", ac.peaks.bin_width},
                 {"range_min", ac.peaks.range_min},
                 {"range_max", ac.peaks.range_max},
                 {"sigma_bins", ac.peaks.sigma_bins},
                 {"truncate", ac.peaks.truncate},
                 {"prominence_frac", ac.peaks.prominence_frac},
                 {"min_position", ac.peaks.min_position},
                 {"windows_pct", ac.windows_pct},
                 {"n_perm", ac.n_perm},
                 {"seed", ac.seed},
                 {"p_add_one", ac.p_add_one}};
  j["n_centres"] = a.observations.size();
  j["histogram_excluded"] = a.histogram.excluded;
  json peaks = json::array();
  for (const auto& p : a.peaks) {
    peaks.push_back({{"position", p.position}, {"height", jnum(p.height)}, {"prominence", jnum(p.prominence)}});
  }
  j["peaks"] = peaks;
  j["no_peaks"] = a.no_peaks;

  json tiers = json::array();
  for (const auto& t : a.tiers) {
    json w = json::array();
    for (std::size_t i = 0; i < t.within.size(); ++i) {
      w.push_back({{"window_pct", ac.windows_pct[i]}, {"within", t.within[i]}, {"proportion", jnum(t.proportion[i])}});
    }
    tiers.push_back({{"tier", score::to_string(t.tier)}, {"n", t.n}, {"windows", w}});
  }
  j["tier_proximity"] = tiers;

  json perms = json::array();
  for (std::size_t i = 0; i < a.permutations.size(); ++i) {
    const auto& p = a.permutations[i];
    perms.push_back({{"window_pct", ac.windows_pct[i]},
                     {"target_tier", "High"},
                     {"observed", p.observed},
                     {"n_target", p.n_target},
                     {"n_total", p.n_total},
                     {"n_proximate", p.n_proximate},
                     {"perm_mean", jnum(p.perm_mean)},
                     {"p", jnum(ac.p_add_one ? p.p_add_one : p.p)},
                     {"p_definition", ac.p_add_one ? "(1 + count) / (1 + n_perm)" : "count / n_perm"},
                     {"p_raw", jnum(p.p)},
                     {"p_add_one", jnum(p.p_add_one)},
                     {"n_perm", p.n_perm},
                     {"seed", p.seed}});
  }
  j["permutation"] = perms;
  if (a.ks) {
    j["ks_high_vs_low"] = {{"statistic", jnum(a.ks->statistic)},
                           {"p", jnum(a.ks->p)},
                           {"n_high", a.high_distances.size()},
                           {"n_low", a.low_distances.size()},
                           {"moderate_excluded", true}};
  } else {
    j["ks_high_vs_low"] = nullptr;
  }
  b.write_json("anchoring.json", j);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < a.observations.size(); ++i) {
    const auto& o = a.observations[i];
    std::vector<std::string> r{o.supplier, num(o.centre_gbp), num(o.weight), num(o.phi),
                               std::string(score::to_string(o.tier))};
    if (i < a.nearest.size()) {
      r.push_back(num(a.nearest[i].peak));
      r.push_back(num(a.nearest[i].pct_distance));
      for (std::size_t w = 0; w < ac.windows_pct.size(); ++w) r.push_back(a.proximate[w][i] ? "1" : "0");
    } else {
      r.insert(r.end(), 2 + ac.windows_pct.size(), "NA");
    }
    rows.push_back(std::move(r));
  }
  std::vector<std::string> header{"supplier", "centre_gbp", "weight", "phi", "tier", "nearest_peak", "pct_distance"};
  for (double w : ac.windows_pct) header.push_back("within_" + window_label(w) + "pct");
  b.write_csv("anchoring_scatter.csv", header, rows);

  rows.clear();
  for (std::size_t i = 0; i < a.histogram.counts.size(); ++i) {
    rows.push_back({num(a.histogram.bin_centre(i)), num(a.histogram.counts[i]), num(a.histogram.density[i])});
  }
  b.write_csv("anchoring_histogram.csv", {"bin_centre", "count", "density"}, rows);

  rows.clear();
  for (const auto& pp : a.per_peak) {
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t w = 0; w < ac.windows_pct.size(); ++w) {
        rows.push_back({num(pp.peak), std::string(score::to_string(a.tiers[t].tier)), window_label(ac.windows_pct[w]),
                        std::to_string(pp.assigned[t]), std::to_string(pp.within[t][w]), num(pp.proportion[t][w])});
      }
    }
  }
  b.write_csv("anchoring_peak_props.csv", {"peak", "tier", "window_pct", "assigned", "within", "proportion_of_tier"},
              rows);

  for (std::size_t i = 0; i < a.permutations.size(); ++i) {
    const auto& p = a.permutations[i];
    std::map<std::size_t, std::size_t> freq;
    for (auto c : p.null_counts) ++freq[c];
    rows.clear();
    for (const auto& [count, f] : freq) rows.push_back({std::to_string(count), std::to_string(f)});
    b.write_csv("anchoring_null_" + window_label(ac.windows_pct[i]) + ".csv", {"high_proximate_count", "permutations"},
                rows);
  }

  rows.clear();
  for (std::size_t i = 0; i < a.nearest.size(); ++i) {
    rows.push_back({a.observations[i].supplier, std::string(score::to_string(a.observations[i].tier)),
                    num(a.nearest[i].pct_distance)});
  }
  b.write_csv("anchoring_distances.csv", {"supplier", "tier", "pct_distance"}, rows);

  rows.clear();
  for (const auto& [label, dist] :
       {std::pair<std::string, std::vector<double>>{"High", a.high_distances}, {"Low", a.low_distances}}) {
    std::vector<double> d = dist;
    std::sort(d.begin(), d.end());
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (i + 1 < d.size() && d[i + 1] == d[i]) continue;
      rows.push_back({label, num(d[i]), num(static_cast<double>(i + 1) / static_cast<double>(d.size()))});
    }
  }
  b.write_csv("anchoring_ecdf.csv", {"tier", "pct_distance", "ecdf"}, rows);
}

}  // namespace

void write_harmonise_bundle(const pipeline::RunResult& run, const RunConfig& cfg, const fs::path& dir) {
  Bundle b(dir);
  harmonise_files(b, run);
  write_manifest(b, cfg, "manifest.json", "harmonise");
}

std::vector<std::string> write_anchoring_bundle(const anchoring::AnchoringResult& a, const RunConfig& cfg,
                                                const fs::path& dir) {
  Bundle b(dir);
  anchoring_files(b, a, cfg);
  write_manifest(b, cfg, "anchoring_manifest.json", "anchoring");
  std::vector<std::string> names;
  for (const auto& [f, d] : b.files()) names.push_back(f);
  names.push_back("anchoring_manifest.json");
  return names;
}

void write_score_bundle(const pipeline::RunResult& run, const RunConfig& cfg, const fs::path& dir) {
  Bundle b(dir);
  harmonise_files(b, run);
  const auto& scale = run.cohort.scale;

  std::vector<std::vector<std::string>> rows;
  json scores = json::array();
  std::string fits;
  for (const auto& s : run.suppliers) {
    const auto& c = s.score.components;
    rows.push_back({std::to_string(s.score.rank), s.id, std::string(score::to_string(s.score.tier)),
                    num(s.score.percentile), num(c.phi), std::to_string(c.m), num(c.a), num(c.t), num(c.d),
                    num(c.contributions.m), num(c.contributions.a), num(c.contributions.t), num(c.contributions.d),
                    c.contributions.defined ? "1" : "0", std::to_string(s.amounts.size()), s.total_spend.str(),
                    s.directorate, num(s.cv), std::to_string(s.cv_rank), num(s.d_gbp)});
    scores.push_back(supplier_json(s));
    fits += fit_json(s, scale).dump() + "\n";
  }
  b.write_csv("scores.csv",
              {"rank", "supplier", "tier", "percentile", "phi", "M", "A", "T", "D", "contrib_M", "contrib_A",
               "contrib_T", "contrib_D", "contrib_defined", "n_payments", "total_spend", "directorate", "cv", "cv_rank",
               "D_gbp"},
              rows);
  b.write_json("scores.json", scores);
  b.write("fits.jsonl", fits);

  rows.clear();
  for (const auto& s : run.suppliers) {
    const auto& c = s.score.components;
    const double vals[] = {double(c.m), c.a, c.t, c.d};
    const double pct[] = {c.contributions.m, c.contributions.a, c.contributions.t, c.contributions.d};
    const char* names[] = {"M", "A", "T", "D"};
    for (int k = 0; k < 4; ++k) rows.push_back({s.id, names[k], num(vals[k]), num(std::log(vals[k])), num(pct[k])});
  }
  b.write_csv("decomposition.csv", {"supplier", "component", "value", "ln_value", "contribution_pct"}, rows);

  rows.clear();
  for (const auto& o : run.centres) {
    rows.push_back({o.supplier, num(o.centre_gbp), num(o.weight), std::string(score::to_string(o.tier)), num(o.phi)});
  }
  b.write_csv("centres.csv", {"supplier", "centre_gbp", "weight", "tier", "phi"}, rows);

  rows.clear();
  std::size_t th = 0, tm = 0, tl = 0, tt = 0;
  for (const auto& r : run.sectoral) {
    rows.push_back({r.directorate, std::to_string(r.high), std::to_string(r.low), std::to_string(r.moderate),
                    std::to_string(r.total)});
    th += r.high;
    tm += r.moderate;
    tl += r.low;
    tt += r.total;
  }
  rows.push_back({"Total", std::to_string(th), std::to_string(tl), std::to_string(tm), std::to_string(tt)});
  b.write_csv("sectoral.csv", {"directorate", "high", "low", "moderate", "total"}, rows);

  rows.clear();
  for (const auto& r : run.cv_table) {
    const auto& c = r.components;
    rows.push_back({r.supplier, std::to_string(r.phi_rank), std::to_string(r.cv_rank), num(r.cv), num(c.phi),
                    std::to_string(c.m), num(c.a), num(c.t), num(c.d), num(c.contributions.m), num(c.contributions.a),
                    num(c.contributions.t), num(c.contributions.d)});
  }
  b.write_csv("cv_comparison.csv",
              {"supplier", "phi_rank", "cv_rank", "cv", "phi", "M", "A", "T", "D", "contrib_M", "contrib_A",
               "contrib_T", "contrib_D"},
              rows);

  rows.clear();
  for (const auto& c : run.contributions) {
    rows.push_back({c.component, num(c.mean_log), num(c.median_log), num(c.mean_pct), num(c.median_pct)});
  }
  b.write_csv("cohort_contributions.csv", {"component", "mean_ln", "median_ln", "mean_pct", "median_pct"}, rows);
  b.write_csv("component_spearman.csv", {"var_a", "var_b", "rho", "p"}, matrix_rows(run.component_spearman));
  b.write_csv("contribution_spearman.csv", {"var_a", "var_b", "rho", "p"}, matrix_rows(run.contribution_spearman));

  rows.clear();
  for (const auto& p : run.lorenz) rows.push_back({num(p.supplier_share), num(p.spend_share)});
  b.write_csv("lorenz.csv", {"supplier_share", "spend_share"}, rows);

  rows.clear();
  for (const auto& s : run.suppliers) {
    rows.push_back({std::to_string(s.score.rank), s.id, num(s.score.components.phi),
                    num(std::log(s.score.components.phi)), num(s.score.percentile),
                    std::string(score::to_string(s.score.tier))});
  }
  b.write_csv("phi_distribution.csv", {"rank", "supplier", "phi", "ln_phi", "percentile", "tier"}, rows);

  rows.clear();
  for (const auto& s : run.suppliers) rows.push_back({s.id, std::to_string(s.amounts.size()), s.total_spend.str()});
  b.write_csv("payment_counts.csv", {"supplier", "n_payments", "total_spend"}, rows);

  // Pooled standardised amounts of the analytic cohort, 0.25-unit bins.
  constexpr double kLo = -2.0, kHi = 20.0, kStep = 0.25;
  const auto nbins = static_cast<std::size_t>((kHi - kLo) / kStep);
  std::vector<std::size_t> counts(nbins, 0);
  std::size_t under = 0, over = 0;
  for (const auto& s : run.suppliers) {
    for (auto m : s.amounts) {
      const double z = stats::robust_standardise(m, scale);
      if (z < kLo) {
        ++under;
      } else if (z >= kHi) {
        ++over;
      } else {
        ++counts[std::min(nbins - 1, static_cast<std::size_t>((z - kLo) / kStep))];
      }
    }
  }
  rows.clear();
  rows.push_back({"-inf", num(kLo), std::to_string(under)});
  for (std::size_t i = 0; i < nbins; ++i) {
    rows.push_back({num(kLo + kStep * static_cast<double>(i)), num(kLo + kStep * static_cast<double>(i + 1)),
                    std::to_string(counts[i])});
  }
  rows.push_back({num(kHi), "inf", std::to_string(over)});
  b.write_csv("standardised_histogram.csv", {"bin_lo", "bin_hi", "count"}, rows);

  if (run.anchoring) anchoring_files(b, *run.anchoring, cfg);
  b.write("report.txt", human_report(run, cfg));
  write_manifest(b, cfg, "manifest.json", "score");
}

std::vector<anchoring::CentreObservation> read_centres(const fs::path& score_dir) {
  const auto path = score_dir / "centres.csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("anchoring", fmt::format("cannot open {}; run `score` first", path.string()));
  csv::Reader reader(in, ',');
  auto header = reader.next();
  const std::vector<std::string> expected{"supplier", "centre_gbp", "weight", "tier", "phi"};
  if (!header || header->fields != expected) {
    throw IngestError("anchoring", fmt::format("{} does not have the expected header", path.string()));
  }
  std::vector<anchoring::CentreObservation> out;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != expected.size()) {
      throw IngestError("anchoring", fmt::format("{}:{}: expected 5 fields", path.string(), rec->line));
    }
    anchoring::CentreObservation o;
    o.supplier = rec->fields[0];
    try {
      std::size_t used = 0;
      o.centre_gbp = std::stod(rec->fields[1], &used);
      o.weight = std::stod(rec->fields[2]);
      o.phi = std::stod(rec->fields[4]);
    } catch (const std::exception&) {
      throw IngestError("anchoring", fmt::format("{}:{}: unparseable number", path.string(), rec->line));
    }
    const auto& t = rec->fields[3];
    if (t == "High") {
      o.tier = score::Tier::kHigh;
    } else if (t == "Moderate") {
      o.tier = score::Tier::kModerate;
    } else if (t == "Low") {
      o.tier = score::Tier::kLow;
    } else {
      throw IngestError("anchoring", fmt::format("{}:{}: unknown tier '{}'", path.string(), rec->line, t));
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::string human_report(const pipeline::RunResult& run, const RunConfig& cfg) {
  std::string out;
  auto line = [&](const std::string& s = {}) { out += s + "\n"; };
  line("Payment Heterogeneity Index report");
  line(fmt::format("config hash {}", config_hash(cfg)));
  line();
  line("Settings");
  std::istringstream echo(canonical_echo(cfg));
  for (std::string l; std::getline(echo, l);) line("  " + l);
  line();

  const auto& c = run.corpus;
  const auto& h = run.cohort;
  line("Corpus (corpus_stats.json)");
  line(fmt::format("  rows parsed {}, rejected {}, non-positive dropped {}, clean {}", c.n_rows_raw, c.n_rows_rejected,
                   c.n_rows_dropped_nonpositive, c.n_rows_clean));
  line(fmt::format("  total spend {} (clean {}), min {}, max {}, median {:.2f}", c.total_spend_raw.str(),
                   c.total_spend.str(), c.min_amount.str(), c.max_amount.str(), c.median_amount));
  line(fmt::format("  raw names {}, canonical suppliers {}, duplicate transaction numbers {}, unparsed dates {}",
                   c.n_raw_names, h.n_canonical_suppliers, c.n_duplicate_transaction_nos, c.n_unparsed_dates));
  line(fmt::format("  analytic cohort: {} suppliers, {} records, spend {}, median {:.2f}", h.n_analytic_suppliers,
                   h.n_analytic_records, h.analytic_spend.str(), h.analytic_median));
  line(fmt::format("  global median {:.2f}, IQR {:.2f}; top 20% of suppliers hold {:.1f}% of spend", h.scale.median,
                   h.scale.iqr, 100.0 * h.top20_spend_share));
  line();

  std::size_t nh = 0, nm = 0, nl = 0;
  for (const auto& s : run.suppliers) {
    (s.score.tier == score::Tier::kHigh ? nh : s.score.tier == score::Tier::kModerate ? nm : nl)++;
  }
  line(fmt::format("Tiers (scores.csv): High {}, Moderate {}, Low {}", nh, nm, nl));
  line();
  line(fmt::format("Top {} by PHI with CV rank (cv_comparison.csv)", run.cv_table.size()));
  line(fmt::format("  {:<12} {:>8} {:>4} {:>14} {:>14} {:>14} {:>16} {:>7} {:>7}", "supplier", "PHI", "M", "A", "T",
                   "D", "", "PHI rk", "CV rk"));
  for (const auto& r : run.cv_table) {
    const auto& k = r.components;
    line(fmt::format("  {:<12} {:>8.3f} {:>4} {:>6.3f} ({:>5.1f}%) {:>6.3f} ({:>5.1f}%) {:>6.3f} ({:>5.1f}%) M {:>5.1f}% {:>7} {:>7}",
                     r.supplier, k.phi, k.m, k.a, k.contributions.a, k.t, k.contributions.t, k.d, k.contributions.d,
                     k.contributions.m, r.phi_rank, r.cv_rank));
  }
  if (run.cv_phi) line(fmt::format("  Spearman(CV, PHI) = {:.3f}, p = {:.3g}", run.cv_phi->rho, run.cv_phi->p));
  line();

  line("Cohort log contributions (cohort_contributions.csv)");
  for (const auto& s : run.contributions) {
    line(fmt::format("  {}: mean ln {:.3f}, median ln {:.3f}, mean share {:.1f}%", s.component, s.mean_log,
                     s.median_log, s.mean_pct));
  }
  line();

  line("Tiers by directorate (sectoral.csv)");
  for (const auto& r : run.sectoral) {
    line(fmt::format("  {:<40} High {:>3}  Moderate {:>3}  Low {:>3}  Total {:>3}", r.directorate, r.high, r.moderate,
                     r.low, r.total));
  }
  line();

  line("Anchoring (anchoring.json)");
  if (!run.anchoring) {
    line("  not run: " + run.anchoring_skipped);
  } else {
    const auto& a = *run.anchoring;
    std::string peaks;
    for (const auto& p : a.peaks) peaks += fmt::format("{}{:.0f}", peaks.empty() ? "" : ", ", p.position);
    line(fmt::format("  peaks ({}): {}", a.exogenous ? "exogenous" : "from High-tier centres",
                     peaks.empty() ? "none" : peaks));
    for (std::size_t w = 0; w < a.permutations.size(); ++w) {
      const auto& p = a.permutations[w];
      const double shown = cfg.anchoring.p_add_one ? p.p_add_one : p.p;
      line(fmt::format("  +-{}%: High {}/{} ({:.1f}%), Low {:.1f}%, permuted mean {:.1f}, p = {:.4f}{} (seed {}, N = {})",
                       cfg.anchoring.windows_pct[w], p.observed, p.n_target,
                       100.0 * a.tiers[2].proportion[w], 100.0 * a.tiers[0].proportion[w], p.perm_mean, shown,
                       cfg.anchoring.p_add_one ? " [add-one]" : "", p.seed, p.n_perm));
    }
    if (a.ks) {
      line(fmt::format("  K-S High vs Low distance: D = {:.3f}, p = {:.3g} (n = {} vs {})", a.ks->statistic, a.ks->p,
                       a.high_distances.size(), a.low_distances.size()));
    }
  }
  if (!run.warnings.empty()) {
    line();
    line("Warnings");
    for (const auto& w : run.warnings) line("  " + w);
  }
  return out;
}

}  // namespace phi::report
