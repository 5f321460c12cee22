#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "surgeflow/series.hpp"
#include "surgeflow/simulation.hpp"

namespace surgeflow::io {

// CSV with header `hour,arrivals`; hours must be contiguous from 0 and
// arrivals non-negative. Errors name the offending line.
ArrivalSeries load_series(const std::filesystem::path& path);
void write_series_csv(const ArrivalSeries& series, const std::filesystem::path& path);

struct ExportOptions {
  bool event_log = false;
  bool assignments = false;
};

struct ExportResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

// Writes relocations.csv, distribution.csv, cost.csv, acuity.csv,
// utilization.csv and manifest.json (plus the optional audit CSVs) into
// out_dir. Existing files are replaced atomically.
ExportResult export_metrics(const sim::SimulationMetrics& metrics,
                            const std::vector<alloc::Hospital>& hospitals,
                            const std::string& scenario_hash,
                            const std::filesystem::path& out_dir,
                            const ExportOptions& options = {});

struct Manifest {
  std::vector<std::string> files;
  std::string scenario_hash;
  std::vector<std::string> warnings;
};

Manifest load_manifest(const std::filesystem::path& metrics_dir);

// Adds chart files / warnings to an existing manifest.json.
void append_to_manifest(const std::filesystem::path& metrics_dir,
                        const std::vector<std::string>& files,
                        const std::vector<std::string>& warnings);

// Assignment audit export: patient_id,hospital_id,cost,hour,acuity.
void write_assignments_csv(const std::vector<sim::AssignmentRecord>& records,
                           const std::filesystem::path& path);

// Minimal CSV reader used by the report command and tests.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace surgeflow::io
