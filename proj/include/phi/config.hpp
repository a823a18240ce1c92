#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phi/anchoring.hpp"
#include "phi/gmm.hpp"
#include "phi/harmonise.hpp"
#include "phi/ingest.hpp"
#include "phi/score.hpp"

namespace phi {

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  ingest::ParseOptions parse;
  std::size_t min_n = 50;
  harmonise::HarmoniseConfig harmonise;
  gmm::EmConfig em;
  double eps = 1e-6;
  score::TierCuts tiers;
  bool anchoring_enabled = true;
  anchoring::AnchoringConfig anchoring;
  std::size_t top_k = 12;
  int cv_ddof = 0;
  std::filesystem::path output_dir = "phi_out";
  bool plot_images = false;
  unsigned threads = 1;
};

/// Reads an INI file (sections [input], [columns], [ingest], [harmonise], [em],
/// [phi], [tiers], [anchoring], [report], [output], [run]) and then applies
/// "section.key=value" overrides. Relative input and output paths in the file
/// resolve against the file's directory. Unknown keys and unparseable values
/// are ConfigErrors; the result is validated before it is returned.
RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Same as load_config for in-memory INI text; relative paths resolve against base_dir.
RunConfig parse_config(std::string_view ini_text, std::span<const std::string> overrides = {},
                       const std::filesystem::path& base_dir = {});

/// Defaults plus overrides, no file.
RunConfig default_config(std::span<const std::string> overrides = {});

/// Applies one "section.key=value" assignment. Throws ConfigError.
void apply_setting(RunConfig& cfg, std::string_view assignment, const std::filesystem::path& base_dir = {});

/// Throws ConfigError on out-of-range values.
void validate(const RunConfig& cfg);

/// Every key as "section.key = value", in a fixed order. Output location,
/// image flag and thread count are left out because they never change results.
std::string canonical_echo(const RunConfig& cfg);

/// Lower-case hex SHA-256 of canonical_echo.
std::string config_hash(const RunConfig& cfg);

std::string sha256_hex(std::string_view data);

}  // namespace phi
