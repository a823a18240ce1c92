#include "phi/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "phi/error.hpp"

namespace phi::pipeline {

namespace {

struct Prepared {
  RunResult result;
  std::vector<ingest::RawRow> clean;
};

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return stats::quantile(v, 0.5);
}

Prepared prepare(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw ConfigError("config", "input.paths names no input file");
  Prepared prep;
  RunResult& res = prep.result;

  for (const auto& path : cfg.inputs) {
    auto part = ingest::parse_csv(path, cfg.parse);
    res.parsed.unparsed_dates += part.unparsed_dates;
    std::move(part.rows.begin(), part.rows.end(), std::back_inserter(res.parsed.rows));
    std::move(part.rejects.begin(), part.rejects.end(), std::back_inserter(res.parsed.rejects));
  }
  if (res.parsed.rows.empty()) {
    throw IngestError("ingest", fmt::format("no usable payment rows in {} input file(s) ({} rejected)",
                                            cfg.inputs.size(), res.parsed.rejects.size()));
  }

  auto filtered = ingest::filter_positive(res.parsed.rows);
  res.corpus = ingest::corpus_stats(res.parsed, filtered);

  for (const auto& r : res.parsed.rows) ++res.raw_name_rows[r.creditor_name];
  std::vector<harmonise::NameFrequency> names;
  for (const auto& [raw, rows] : res.raw_name_rows) names.push_back({raw, rows});
  res.names = harmonise::build_canonical_map(names, cfg.harmonise);
  res.cohort.n_raw_names = res.raw_name_rows.size();
  res.cohort.n_canonical_suppliers = res.names.clusters.size();

  res.parsed.rows.clear();
  res.parsed.rows.shrink_to_fit();
  prep.clean = std::move(filtered.kept);
  return prep;
}

std::string modal(const std::map<std::string, std::size_t>& counts) {
  std::string best;
  std::size_t best_n = 0;
  for (const auto& [k, n] : counts) {
    if (n > best_n) {
      best = k;
      best_n = n;
    }
  }
  return best;
}

double dispersion_gbp(const gmm::MixtureModel& m, const stats::GlobalScale& scale) {
  gmm::MixtureModel g = m;
  for (auto& c : g.components) {
    c.mean = stats::to_gbp(c.mean, scale);
    c.variance *= scale.iqr * scale.iqr;
  }
  return score::dispersion_component(g);
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          // Report the failure with the smallest index so the error does not
          // depend on scheduling.
          std::lock_guard lock(mu);
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> column_of(std::span<const SupplierResult> s, double (*get)(const SupplierResult&)) {
  std::vector<double> v;
  v.reserve(s.size());
  for (const auto& x : s) v.push_back(get(x));
  return v;
}

}  // namespace

RunResult run_harmonisation(const RunConfig& cfg) { return prepare(cfg).result; }

RunResult run_pipeline(const RunConfig& cfg) {
  Prepared prep = prepare(cfg);
  RunResult& res = prep.result;

  // Group clean rows by canonical supplier.
  struct Group {
    std::string canonical;
    std::vector<Money> amounts;
    std::map<std::string, std::size_t> directorates;
    std::map<std::string, std::size_t> details;
  };
  std::map<std::string, Group> groups;
  std::vector<Money> all_amounts;
  all_amounts.reserve(prep.clean.size());
  for (const auto& r : prep.clean) {
    const auto* cluster = res.names.find(r.creditor_name);
    if (!cluster) {
      ++res.cohort.n_rows_name_rejected;
      res.parsed.rejects.push_back({r.source, r.line, "creditor name has no letters or digits", r.creditor_name});
      continue;
    }
    auto& g = groups[cluster->pseudonym];
    g.canonical = cluster->canonical;
    g.amounts.push_back(r.net_amount);
    ++g.directorates[r.directorate];
    ++g.details[r.subjective_detail];
    all_amounts.push_back(r.net_amount);
  }
  prep.clean.clear();
  prep.clean.shrink_to_fit();
  res.cohort.n_clean_suppliers = groups.size();
  if (all_amounts.empty()) throw IngestError("ingest", "no positive payments left after cleaning");

  res.cohort.scale = stats::global_scale(all_amounts);
  if (!(res.cohort.scale.iqr > 0)) {
    throw ConfigError("standardise", "global interquartile range is zero; the corpus is degenerate");
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& [id, g] : groups) counts[id] = g.amounts.size();
  const auto selected = ingest::select_high_volume(counts, cfg.min_n);
  if (selected.empty()) {
    throw IngestError("select", fmt::format("no supplier has at least {} payments", cfg.min_n));
  }

  res.suppliers.resize(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    auto& g = groups[selected[i]];
    auto& s = res.suppliers[i];
    s.id = selected[i];
    s.canonical = g.canonical;
    s.amounts = std::move(g.amounts);
    for (auto m : s.amounts) s.total_spend += m;
    s.directorate = modal(g.directorates);
    s.subjective_detail = modal(g.details);
  }

  const auto scale = res.cohort.scale;
  parallel_for(res.suppliers.size(), cfg.threads, [&](std::size_t i) {
    auto& s = res.suppliers[i];
    std::vector<double> z;
    z.reserve(s.amounts.size());
    for (auto m : s.amounts) z.push_back(stats::robust_standardise(m, scale));
    try {
      s.fit = gmm::select_and_prune(z, cfg.em);
    } catch (const NumericalError& e) {
      throw NumericalError("fit", fmt::format("supplier {}: {}", s.id, e.what()));
    }
    s.quantiles = stats::quantile_set(z);
    s.score.supplier = s.id;
    s.score.components = score::compute_phi(s.fit.model, s.quantiles, cfg.eps);
    s.d_gbp = dispersion_gbp(s.fit.model, scale);
  });

  std::vector<double> phis;
  for (const auto& s : res.suppliers) phis.push_back(s.score.components.phi);
  const auto pct = score::percentile_ranks(phis);
  std::vector<score::PhiScore> scores;
  for (std::size_t i = 0; i < res.suppliers.size(); ++i) {
    res.suppliers[i].score.percentile = pct[i];
    scores.push_back(res.suppliers[i].score);
  }
  res.cohort.degenerate_cohort = !score::assign_tiers(scores, cfg.tiers);
  if (res.cohort.degenerate_cohort) {
    res.warnings.push_back(fmt::format("cohort of {} suppliers is below tiers.min_cohort = {}; every supplier is Low",
                                       scores.size(), cfg.tiers.min_cohort));
  }
  {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < scores.size(); ++i) pos[scores[i].supplier] = i;
    std::vector<SupplierResult> ordered(res.suppliers.size());
    for (auto& s : res.suppliers) {
      const std::size_t p = pos.at(s.id);
      s.score = scores[p];
      ordered[p] = std::move(s);
    }
    res.suppliers = std::move(ordered);
  }

  res.cohort.n_analytic_suppliers = res.suppliers.size();
  std::vector<double> analytic;
  std::vector<double> spend;
  for (const auto& s : res.suppliers) {
    res.cohort.n_analytic_records += s.amounts.size();
    res.cohort.analytic_spend += s.total_spend;
    for (auto m : s.amounts) analytic.push_back(m.to_double());
    spend.push_back(s.total_spend.to_double());
  }
  res.cohort.analytic_median = median_of(std::move(analytic));
  res.lorenz = stats::lorenz_points(spend);
  res.cohort.top20_spend_share = stats::top_share(res.lorenz, 0.2);

  rank_by_cv(res.suppliers, cfg.cv_ddof);
  res.cv_table = cv_comparison(res.suppliers, cfg.top_k);
  res.sectoral = sectoral_aggregate(res.suppliers);
  res.contributions = cohort_contribution_stats(scores);

  const auto phi_col = column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.phi; });
  if (res.suppliers.size() >= 3) {
    try {
      res.cv_phi = stats::spearman_rho(column_of(res.suppliers, [](const SupplierResult& s) { return s.cv; }), phi_col);
    } catch (const NumericalError& e) {
      res.warnings.push_back(fmt::format("CV vs PHI correlation undefined: {}", e.what()));
    }
  }
  res.component_spearman = spearman_matrix(
      {"PHI", "M", "A", "T", "D"},
      {phi_col, column_of(res.suppliers, [](const SupplierResult& s) { return double(s.score.components.m); }),
       column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.a; }),
       column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.t; }),
       column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.d; })});
  res.contribution_spearman = spearman_matrix(
      {"PHI", "M_pct", "A_pct", "T_pct", "D_pct"},
      {phi_col, column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.contributions.m; }),
       column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.contributions.a; }),
       column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.contributions.t; }),
       column_of(res.suppliers, [](const SupplierResult& s) { return s.score.components.contributions.d; })});

  res.centres = mixture_centres(res.suppliers, scale);
  if (cfg.anchoring_enabled) {
    const bool any_high = std::any_of(res.centres.begin(), res.centres.end(),
                                      [](const auto& c) { return c.tier == score::Tier::kHigh; });
    if (!any_high) {
      res.anchoring_skipped = "no High-tier suppliers";
    } else {
      res.anchoring = anchoring::analyse(res.centres, cfg.anchoring, cfg.threads);
      if (res.anchoring->no_peaks) res.warnings.push_back("anchoring found no peaks");
    }
  } else {
    res.anchoring_skipped = "disabled in config";
  }
  return res;
}

std::vector<SectoralRow> sectoral_aggregate(std::span<const SupplierResult> suppliers) {
  std::map<std::string, SectoralRow> rows;
  for (const auto& s : suppliers) {
    auto& r = rows[s.directorate];
    r.directorate = s.directorate;
    ++r.total;
    switch (s.score.tier) {
      case score::Tier::kHigh: ++r.high; break;
      case score::Tier::kModerate: ++r.moderate; break;
      case score::Tier::kLow: ++r.low; break;
    }
  }
  std::vector<SectoralRow> out;
  for (auto& [k, r] : rows) out.push_back(r);
  return out;
}

std::vector<ContributionStat> cohort_contribution_stats(std::span<const score::PhiScore> scores) {
  std::vector<ContributionStat> out;
  if (scores.empty()) return out;
  struct Getter {
    const char* name;
    double (*log_value)(const score::PhiComponents&);
    double (*pct)(const score::PhiComponents&);
  };
  static const Getter kGetters[] = {
      {"M", [](const score::PhiComponents& c) { return std::log(double(c.m)); },
       [](const score::PhiComponents& c) { return c.contributions.m; }},
      {"A", [](const score::PhiComponents& c) { return std::log(c.a); },
       [](const score::PhiComponents& c) { return c.contributions.a; }},
      {"T", [](const score::PhiComponents& c) { return std::log(c.t); },
       [](const score::PhiComponents& c) { return c.contributions.t; }},
      {"D", [](const score::PhiComponents& c) { return std::log(c.d); },
       [](const score::PhiComponents& c) { return c.contributions.d; }},
  };
  for (const auto& g : kGetters) {
    std::vector<double> logs, pcts;
    for (const auto& s : scores) {
      logs.push_back(g.log_value(s.components));
      pcts.push_back(g.pct(s.components));
    }
    ContributionStat st;
    st.component = g.name;
    const double n = static_cast<double>(scores.size());
    for (double v : logs) st.mean_log += v / n;
    for (double v : pcts) st.mean_pct += v / n;
    st.median_log = median_of(std::move(logs));
    st.median_pct = median_of(std::move(pcts));
    out.push_back(st);
  }
  return out;
}

void rank_by_cv(std::vector<SupplierResult>& suppliers, int ddof) {
  std::vector<std::size_t> idx(suppliers.size());
  for (std::size_t i = 0; i < suppliers.size(); ++i) {
    idx[i] = i;
    std::vector<double> raw;
    raw.reserve(suppliers[i].amounts.size());
    for (auto m : suppliers[i].amounts) raw.push_back(m.to_double());
    suppliers[i].cv = stats::coefficient_of_variation(raw, ddof);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (suppliers[a].cv != suppliers[b].cv) return suppliers[a].cv > suppliers[b].cv;
    return suppliers[a].id < suppliers[b].id;
  });
  for (std::size_t r = 0; r < idx.size(); ++r) suppliers[idx[r]].cv_rank = r + 1;
}

std::vector<CvRow> cv_comparison(std::span<const SupplierResult> suppliers, std::size_t top_k) {
  std::vector<const SupplierResult*> by_rank;
  for (const auto& s : suppliers) by_rank.push_back(&s);
  std::sort(by_rank.begin(), by_rank.end(), [](auto* a, auto* b) { return a->score.rank < b->score.rank; });
  std::vector<CvRow> out;
  for (std::size_t i = 0; i < by_rank.size() && i < top_k; ++i) {
    const auto& s = *by_rank[i];
    out.push_back({s.id, s.score.rank, s.cv_rank, s.cv, s.score.components});
  }
  return out;
}

SpearmanMatrix spearman_matrix(std::vector<std::string> labels, const std::vector<std::vector<double>>& columns) {
  SpearmanMatrix m;
  const std::size_t k = columns.size();
  m.labels = std::move(labels);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.rho.assign(k, std::vector<double>(k, nan));
  m.p.assign(k, std::vector<double>(k, nan));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      try {
        const auto c = stats::spearman_rho(columns[i], columns[j]);
        m.rho[i][j] = m.rho[j][i] = c.rho;
        m.p[i][j] = m.p[j][i] = c.p;
      } catch (const NumericalError&) {
        // Constant column or too few suppliers: left as NaN.
      }
    }
  }
  return m;
}

std::vector<anchoring::CentreObservation> mixture_centres(std::span<const SupplierResult> suppliers,
                                                          const stats::GlobalScale& scale) {
  std::vector<anchoring::CentreObservation> out;
  for (const auto& s : suppliers) {
    for (const auto& c : s.fit.model.components) {
      out.push_back({s.id, stats::to_gbp(c.mean, scale), s.score.tier, c.weight, s.score.components.phi});
    }
  }
  return out;
}

}  // namespace phi::pipeline
