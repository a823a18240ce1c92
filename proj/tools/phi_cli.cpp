#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "phi/config.hpp"
#include "phi/error.hpp"
#include "phi/pipeline.hpp"
#include "phi/report.hpp"
#include "phi/synthbench.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::string> inputs;
  std::string out;
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c, bool with_inputs, bool with_out) {
  app->add_option("-c,--config", c.config, "INI config file (defaults apply when omitted)");
  app->add_option("--set", c.sets, "override as section.key=value (repeatable)");
  if (with_inputs) app->add_option("-i,--input", c.inputs, "input CSV, replaces input.paths (repeatable)");
  if (with_out) app->add_option("-o,--out", c.out, "output directory, replaces output.dir");
  app->add_option("-j,--threads", c.threads, "worker threads, replaces run.threads");
}

phi::RunConfig build_config(const Common& c) {
  phi::RunConfig cfg = c.config.empty() ? phi::default_config(c.sets) : phi::load_config(c.config, c.sets);
  if (!c.inputs.empty()) {
    cfg.inputs.clear();
    for (const auto& p : c.inputs) cfg.inputs.push_back(fs::absolute(p).lexically_normal());
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.threads > 0) cfg.threads = c.threads;
  phi::validate(cfg);
  return cfg;
}

int cmd_score(const Common& c) {
  const auto cfg = build_config(c);
  const auto run = phi::pipeline::run_pipeline(cfg);
  phi::report::write_score_bundle(run, cfg, cfg.output_dir);
  std::cout << phi::report::human_report(run, cfg);
  std::cerr << fmt::format("wrote score bundle to {}\n", cfg.output_dir.string());
  return 0;
}

int cmd_harmonise(const Common& c) {
  const auto cfg = build_config(c);
  const auto run = phi::pipeline::run_harmonisation(cfg);
  phi::report::write_harmonise_bundle(run, cfg, cfg.output_dir);
  std::cout << fmt::format("{} raw names -> {} canonical suppliers ({} match edges, {} unnormalisable)\n",
                           run.cohort.n_raw_names, run.cohort.n_canonical_suppliers,
                           run.names.edges.size(), run.names.unnormalisable.size());
  std::cerr << fmt::format("wrote harmonisation audit to {}\n", cfg.output_dir.string());
  return 0;
}

int cmd_anchoring(const Common& c, const std::string& scores_dir) {
  auto cfg = build_config(c);
  const auto centres = phi::report::read_centres(scores_dir);
  const auto result = phi::anchoring::analyse(centres, cfg.anchoring, cfg.threads);
  const fs::path out = c.out.empty() ? fs::path(scores_dir) : cfg.output_dir;
  phi::report::write_anchoring_bundle(result, cfg, out);
  for (std::size_t w = 0; w < result.permutations.size(); ++w) {
    const auto& p = result.permutations[w];
    std::cout << fmt::format("window +-{}%: High within {}/{}, permuted mean {:.2f}, p = {}\n",
                             cfg.anchoring.windows_pct[w], p.observed, p.n_target, p.perm_mean,
                             phi::report::num(cfg.anchoring.p_add_one ? p.p_add_one : p.p));
  }
  if (result.ks) {
    std::cout << fmt::format("K-S High vs Low: D = {:.4f}, p = {:.4g}\n", result.ks->statistic, result.ks->p);
  }
  std::cerr << fmt::format("wrote anchoring outputs to {}\n", out.string());
  return 0;
}

int cmd_synth(const std::string& out, const std::string& preset, std::uint64_t seed, std::size_t rows,
              const std::string& salt) {
  std::vector<phi::synth::SyntheticSpec> specs;
  if (preset == "default") {
    phi::synth::CohortOptions opts;
    opts.seed = seed;
    specs = phi::synth::default_cohort(opts);
  } else if (preset == "perf") {
    specs = phi::synth::performance_cohort(rows, seed);
  } else if (preset == "pair") {
    specs = phi::synth::rank_pair("pair-0", seed);
  } else {
    throw phi::ConfigError("synth", fmt::format("unknown preset '{}' (default, perf, pair)", preset));
  }
  const auto csv = phi::synth::generate_cohort(specs, out, salt);
  std::cout << fmt::format("{} suppliers written to {}\n", specs.size(), csv.string());
  return 0;
}

int cmd_validate(const Common& c) {
  const auto cfg = build_config(c);
  std::cout << phi::canonical_echo(cfg);
  std::cout << fmt::format("config_hash = {}\n", phi::config_hash(cfg));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phi: payment heterogeneity scoring"};
  app.require_subcommand(1);

  Common score_opts, harm_opts, anch_opts, valid_opts;
  auto* score = app.add_subcommand("score", "run the full pipeline and write the report bundle");
  add_common(score, score_opts, true, true);
  auto* harm = app.add_subcommand("harmonise", "ingest and harmonise names only; write the audit");
  add_common(harm, harm_opts, true, true);
  auto* anch = app.add_subcommand("anchoring", "threshold anchoring on the centres of a previous score run");
  add_common(anch, anch_opts, false, true);
  std::string scores_dir;
  anch->add_option("-s,--scores", scores_dir, "output directory of a previous score run")->required();
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark cohort");
  std::string synth_out, preset = "default", salt = "phi";
  std::uint64_t seed = 0;
  std::size_t rows = 40000;
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  synth->add_option("--preset", preset, "default, perf or pair")->capture_default_str();
  synth->add_option("--seed", seed, "master seed")->capture_default_str();
  synth->add_option("--rows", rows, "target row count for the perf preset")->capture_default_str();
  synth->add_option("--salt", salt, "pseudonym salt for the ground truth")->capture_default_str();
  auto* valid = app.add_subcommand("validate-config", "check a config and print its canonical form and hash");
  add_common(valid, valid_opts, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*score) return cmd_score(score_opts);
    if (*harm) return cmd_harmonise(harm_opts);
    if (*anch) return cmd_anchoring(anch_opts, scores_dir);
    if (*synth) return cmd_synth(synth_out, preset, seed, rows, salt);
    if (*valid) return cmd_validate(valid_opts);
  } catch (const phi::Error& e) {
    std::cerr << fmt::format("phi: {} error in stage '{}': {}\n",
                             e.kind() == phi::ErrorKind::kConfig   ? "config"
                             : e.kind() == phi::ErrorKind::kIngest ? "ingest"
                                                                   : "numerical",
                             e.stage(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << fmt::format("phi: error: {}\n", e.what());
    return 1;
  }
  return 1;
}
