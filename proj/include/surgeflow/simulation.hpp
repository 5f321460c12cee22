#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "surgeflow/allocation.hpp"
#include "surgeflow/rng.hpp"
#include "surgeflow/series.hpp"
#include "surgeflow/synthetic.hpp"

namespace surgeflow::sim {

struct ArrivalSource {
  enum class Kind { Csv, Forecast, Synthetic };
  Kind kind = Kind::Synthetic;
  std::string path;          // for Csv / Forecast
  io::SyntheticSpec params;  // for Synthetic
};

struct ScenarioConfig {
  int horizon_hours = 24;
  double w_max_hours = 0.5;
  double service_mean_min = 10.0;
  double service_sd_min = 3.0;
  double discharge_rate = 0.10;
  // Probabilities for Low, Medium, High.
  std::array<double, 3> acuity_mix{0.474, 0.325, 0.201};
  bool deterministic_arrivals = false;
  std::uint64_t seed = 42;
  std::vector<alloc::Hospital> hospitals;  // first entry is the front line
  ArrivalSource arrival_source;
};

// Throws ValidationError naming the offending field.
void validate(const ScenarioConfig& config);

// Default five-hospital network: H1 front line, H2..H5 receivers with
// rising transfer costs.
std::vector<alloc::Hospital> default_hospitals();

struct AssignmentRecord {
  std::uint32_t patient_id = 0;
  std::string hospital_id;
  double cost = 0.0;
  double hour = 0.0;
  alloc::Acuity acuity = alloc::Acuity::Low;
};

struct EventRecord {
  double time = 0.0;
  std::string event;
  std::int64_t patient_id = -1;  // -1 when not patient-scoped
  std::string hospital_id;
  std::string detail;
};

struct RelocationAudit {
  std::uint32_t patient_id = 0;
  double time = 0.0;
  double wait_hours = 0.0;
  bool full_on_arrival = false;
  int occupancy_at_arrival = 0;
  int capacity = 0;
  bool placed = false;
  std::string hospital_id;
};

struct SimulationMetrics {
  std::vector<int> relocations_per_hour;       // placed + overflow, by flag hour
  std::map<std::string, int> served_per_hospital;
  std::vector<double> cumulative_cost_series;  // value at the end of each hour
  std::array<int, 3> acuity_counts_relocated{0, 0, 0};  // placed only
  std::vector<std::string> hospital_ids;       // column order below
  std::vector<std::vector<double>> utilization_series;  // [hour][hospital]
  int overflow_count = 0;
  std::vector<AssignmentRecord> assignments;
  std::vector<EventRecord> event_log;
  std::vector<RelocationAudit> relocation_audits;
  std::vector<alloc::PatientStatus> final_statuses;  // by patient id

  double total_cost() const;
};

// Arrival epochs within [hour_index, hour_index + 1): Poisson count at the
// given rate, uniform placement, sorted.
std::vector<double> generate_arrivals(double rate_per_hour, int hour_index,
                                      RngStream& rng);

// Normal(mean, sd) minutes, resampled until strictly positive.
double sample_service_time(double mean_min, double sd_min, RngStream& rng);

// Binomial(occupancy, rate) leavers; reduces occupancy and returns the count.
int hourly_discharge(alloc::Hospital& hospital, double rate, RngStream& rng);

// Runs the event loop over the horizon. The arrival series must cover at
// least horizon_hours entries.
SimulationMetrics run(const ScenarioConfig& config, const ArrivalSeries& arrivals);

struct SummaryRow {
  std::string section;
  std::string key;
  double value = 0.0;
};

// The four figure datasets (relocations, distribution, cost, acuity) as flat
// rows, plus per-hospital utilization and the max-min utilization spread.
std::vector<SummaryRow> summarize(const SimulationMetrics& metrics,
                                  const std::vector<alloc::Hospital>& hospitals);

}  // namespace surgeflow::sim
