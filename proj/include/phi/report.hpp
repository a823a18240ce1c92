#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "phi/anchoring.hpp"
#include "phi/config.hpp"
#include "phi/pipeline.hpp"

namespace phi::report {

/// Machine outputs carry full precision and no timestamps; the manifest lists
/// the config hash, input digests and a digest per written file.
void write_score_bundle(const pipeline::RunResult& run, const RunConfig& cfg, const std::filesystem::path& dir);

/// corpus_stats.json, rejects.csv, harmonisation_audit.csv and edges.
void write_harmonise_bundle(const pipeline::RunResult& run, const RunConfig& cfg, const std::filesystem::path& dir);

/// anchoring.json plus the plot-data CSVs. Returns the files written.
std::vector<std::string> write_anchoring_bundle(const anchoring::AnchoringResult& a, const RunConfig& cfg,
                                                const std::filesystem::path& dir);

/// Reads centres.csv from a previous score run. Throws IngestError.
std::vector<anchoring::CentreObservation> read_centres(const std::filesystem::path& score_dir);

/// Text summary; every figure in it also appears in a machine-readable file.
std::string human_report(const pipeline::RunResult& run, const RunConfig& cfg);

/// Shortest round-trip decimal for a double; "NA" for NaN.
std::string num(double v);

}  // namespace phi::report
