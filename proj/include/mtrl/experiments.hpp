#pragma once

#include <string>
#include <vector>

#include "mtrl/config.hpp"

namespace mtrl {

extern const char* kVersion;

struct NamedFile {
  std::string name;
  std::string bytes;
};

struct RunResult {
  std::vector<NamedFile> files;         // CSV / JSON / text outputs
  std::vector<std::string> deviations;  // parameter-schedule deviations
  std::vector<std::string> notes;       // one-line human summary
};

// Dispatches the configured experiment and renders every output file in
// memory. The same config always produces the same bytes. ConfigError means
// bad input; any other exception is a runtime failure.
RunResult run(const ExperimentConfig& cfg);

// Metadata document: config echo, version, stream-layout note, deviations,
// wall-clock seconds. Timing lives only here, never in CSVs.
std::string run_metadata_json(const ExperimentConfig& cfg,
                              const RunResult& result, double wall_seconds);

// Writes the result files plus metadata.json under cfg.out_dir.
void write_run_files(const ExperimentConfig& cfg, const RunResult& result,
                     double wall_seconds);

// Aggregates output CSVs into a printable summary: a per-episode (or per-T)
// mean/stderr table per input, then a summary block with final values,
// per-file log-log slopes, a cross-file slope when several inputs are given,
// and C(D) at delta = 1/sqrt(budget) when a sibling metadata.json names the
// instance. Lines starting with '#' are notes.
std::string report_text(const std::vector<std::string>& csv_paths);

// Least-squares slope of ln y against ln x over points with x, y > 0; NaN
// when fewer than two usable points remain.
double loglog_slope(const std::vector<std::pair<double, double>>& xy);

}  // namespace mtrl
