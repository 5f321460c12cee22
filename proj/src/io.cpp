#include "surgeflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "surgeflow/errors.hpp"
#include "surgeflow/numfmt.hpp"
#include "surgeflow/rng.hpp"

namespace surgeflow::io {

namespace {

using nlohmann::json;

double parse_double(const std::string& text, std::size_t line_no, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("line " + std::to_string(line_no) + ": malformed " +
                          std::string(what) + " value '" + text + "'");
  }
}

// Write-then-rename so a re-export never leaves a half-written file behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << contents;
    if (!out.good()) throw std::runtime_error("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

ArrivalSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open arrivals file: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError("empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "hour,arrivals")
    throw ValidationError("line 1: expected header 'hour,arrivals'");

  ArrivalSeries series;
  long expected_hour = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 'hour,arrivals'");
    double hour = parse_double(line.substr(0, comma), line_no, "hour");
    double value = parse_double(line.substr(comma + 1), line_no, "arrivals");
    if (hour != static_cast<double>(expected_hour))
      throw ValidationError("line " + std::to_string(line_no) + ": gap in hour index, expected " +
                            std::to_string(expected_hour));
    if (value < 0.0 || !std::isfinite(value))
      throw ValidationError("line " + std::to_string(line_no) + ": negative arrivals");
    series.values.push_back(value);
    ++expected_hour;
  }
  if (series.values.empty()) throw ValidationError("empty input");
  return series;
}

void write_series_csv(const ArrivalSeries& series, const std::filesystem::path& path) {
  std::string out = "hour,arrivals\n";
  for (std::size_t h = 0; h < series.values.size(); ++h)
    out += std::to_string(h) + "," + fmt_double(series.values[h]) + "\n";
  write_file_atomic(path, out);
}

ArrivalSeries generate_synthetic(const SyntheticSpec& spec) {
  if (spec.days < 1) throw ValidationError("days must be at least 1");
  if (!(spec.base_low > 0.0) || spec.base_high < spec.base_low)
    throw ValidationError("need base_high >= base_low > 0");
  if (spec.noise_sd < 0.0) throw ValidationError("noise_sd must be non-negative");

  const double mid = 0.5 * (spec.base_low + spec.base_high);
  const double amp = 0.5 * (spec.base_high - spec.base_low);

  // Triangular bumps of half-width 2 h around each named hour, wrapping at
  // midnight; peak hours pull toward base_high, trough hours toward base_low.
  auto kernel = [](double dist) { return std::max(0.0, 1.0 - dist / 2.0); };
  auto circular_dist = [](int a, int b) {
    int d = std::abs(a - b) % 24;
    return static_cast<double>(std::min(d, 24 - d));
  };
  auto pull = [&](const std::set<int>& hours, int hour_of_day) {
    double strongest = 0.0;
    for (int q : hours) strongest = std::max(strongest, kernel(circular_dist(hour_of_day, q)));
    return strongest;
  };

  RngStream rng(spec.seed, Stream::Arrivals);
  ArrivalSeries series;
  series.values.reserve(static_cast<std::size_t>(spec.days) * 24);
  for (int day = 0; day < spec.days; ++day) {
    const bool weekend = day % 7 >= 5;
    const double scale = weekend ? spec.weekend_scale : 1.0;
    for (int hour = 0; hour < 24; ++hour) {
      double base = mid + amp * (pull(spec.peak_hours, hour) - pull(spec.trough_hours, hour));
      double value = base * scale + rng.next_normal(0.0, spec.noise_sd);
      series.values.push_back(std::max(0.0, value));
    }
  }
  return series;
}

namespace {

std::string relocations_csv(const sim::SimulationMetrics& m) {
  std::string out = "hour,count\n";
  for (std::size_t h = 0; h < m.relocations_per_hour.size(); ++h)
    out += std::to_string(h) + "," + std::to_string(m.relocations_per_hour[h]) + "\n";
  return out;
}

std::string distribution_csv(const sim::SimulationMetrics& m,
                             const std::vector<alloc::Hospital>& hospitals) {
  std::string out = "hospital,served\n";
  for (const alloc::Hospital& h : hospitals) {
    auto it = m.served_per_hospital.find(h.id);
    out += h.id + "," + std::to_string(it == m.served_per_hospital.end() ? 0 : it->second) + "\n";
  }
  return out;
}

std::string cost_csv(const sim::SimulationMetrics& m) {
  std::string out = "hour,cumulative_cost\n";
  for (std::size_t h = 0; h < m.cumulative_cost_series.size(); ++h)
    out += std::to_string(h) + "," + fmt_double(m.cumulative_cost_series[h]) + "\n";
  return out;
}

std::string acuity_csv(const sim::SimulationMetrics& m) {
  std::string out = "level,count\n";
  for (int level = 0; level < 3; ++level)
    out += std::string(alloc::to_string(static_cast<alloc::Acuity>(level))) + "," +
           std::to_string(m.acuity_counts_relocated[level]) + "\n";
  return out;
}

std::string utilization_csv(const sim::SimulationMetrics& m) {
  std::string out = "hour,hospital,utilization\n";
  for (std::size_t h = 0; h < m.utilization_series.size(); ++h)
    for (std::size_t i = 0; i < m.hospital_ids.size(); ++i)
      out += std::to_string(h) + "," + m.hospital_ids[i] + "," +
             fmt_double(m.utilization_series[h][i]) + "\n";
  return out;
}

std::string event_log_csv(const sim::SimulationMetrics& m) {
  std::string out = "time,event,patient_id,hospital_id,detail\n";
  for (const sim::EventRecord& e : m.event_log)
    out += fmt_double(e.time) + "," + e.event + "," +
           (e.patient_id < 0 ? std::string() : std::to_string(e.patient_id)) + "," +
           e.hospital_id + "," + e.detail + "\n";
  return out;
}

std::string assignments_csv_text(const std::vector<sim::AssignmentRecord>& records) {
  std::string out = "patient_id,hospital_id,cost,hour,acuity\n";
  for (const sim::AssignmentRecord& a : records)
    out += std::to_string(a.patient_id) + "," + a.hospital_id + "," + fmt_double(a.cost) +
           "," + fmt_double(a.hour) + "," + alloc::to_string(a.acuity) + "\n";
  return out;
}

json manifest_summary(const sim::SimulationMetrics& m,
                      const std::vector<alloc::Hospital>& hospitals) {
  json hs = json::array();
  for (const alloc::Hospital& h : hospitals) {
    auto it = m.served_per_hospital.find(h.id);
    const int served = it == m.served_per_hospital.end() ? 0 : it->second;
    hs.push_back({{"id", h.id},
                  {"capacity", h.capacity},
                  {"served", served},
                  {"utilization", alloc::utilization(h, served)}});
  }
  return {{"total_cost", m.total_cost()},
          {"overflow_count", m.overflow_count},
          {"hospitals", std::move(hs)}};
}

}  // namespace

ExportResult export_metrics(const sim::SimulationMetrics& metrics,
                            const std::vector<alloc::Hospital>& hospitals,
                            const std::string& scenario_hash,
                            const std::filesystem::path& out_dir,
                            const ExportOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory: " + out_dir.string());

  ExportResult result;
  auto emit = [&](const char* name, const std::string& contents) {
    write_file_atomic(out_dir / name, contents);
    result.files.push_back(name);
  };

  emit("relocations.csv", relocations_csv(metrics));
  emit("distribution.csv", distribution_csv(metrics, hospitals));
  emit("cost.csv", cost_csv(metrics));
  emit("acuity.csv", acuity_csv(metrics));
  emit("utilization.csv", utilization_csv(metrics));
  if (options.event_log) emit("event_log.csv", event_log_csv(metrics));
  if (options.assignments) emit("assignments.csv", assignments_csv_text(metrics.assignments));

  json manifest;
  std::vector<std::string> listed = result.files;
  listed.push_back("manifest.json");
  manifest["files"] = listed;
  manifest["scenario_hash"] = scenario_hash;
  manifest["warnings"] = result.warnings;
  manifest["summary"] = manifest_summary(metrics, hospitals);
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  result.files.push_back("manifest.json");
  return result;
}

Manifest load_manifest(const std::filesystem::path& metrics_dir) {
  const std::filesystem::path path = metrics_dir / "manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("manifest missing: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("malformed manifest: " + std::string(e.what()));
  }
  Manifest m;
  for (const json& f : doc.value("files", json::array())) m.files.push_back(f.get<std::string>());
  m.scenario_hash = doc.value("scenario_hash", "");
  for (const json& w : doc.value("warnings", json::array()))
    m.warnings.push_back(w.get<std::string>());
  return m;
}

void append_to_manifest(const std::filesystem::path& metrics_dir,
                        const std::vector<std::string>& files,
                        const std::vector<std::string>& warnings) {
  const std::filesystem::path path = metrics_dir / "manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("manifest missing: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("malformed manifest: " + std::string(e.what()));
  }
  in.close();
  for (const std::string& f : files) {
    auto& list = doc["files"];
    if (std::find(list.begin(), list.end(), json(f)) == list.end()) list.push_back(f);
  }
  for (const std::string& w : warnings) doc["warnings"].push_back(w);
  write_file_atomic(path, doc.dump(2) + "\n");
}

void write_assignments_csv(const std::vector<sim::AssignmentRecord>& records,
                           const std::filesystem::path& path) {
  write_file_atomic(path, assignments_csv_text(records));
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace surgeflow::io
