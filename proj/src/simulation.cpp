#include "surgeflow/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <queue>
#include <span>

#include "surgeflow/errors.hpp"
#include "surgeflow/numfmt.hpp"
#include "surgeflow/queueing.hpp"

namespace surgeflow::sim {

namespace {

// Tie-break order at equal timestamps, then insertion order.
enum class EventType : int {
  ServiceComplete = 0,
  HourlyDischarge = 1,
  Arrival = 2,
  WaitThresholdBreach = 3,
};

struct Event {
  double time = 0.0;
  EventType type = EventType::Arrival;
  std::uint64_t seq = 0;
  std::uint32_t patient = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.type != b.type) return static_cast<int>(a.type) > static_cast<int>(b.type);
    return a.seq > b.seq;
  }
};

std::string field_error(const std::string& field, const std::string& why) {
  return field + ": " + why;
}

}  // namespace

void validate(const ScenarioConfig& config) {
  if (config.horizon_hours < 1)
    throw ValidationError(field_error("horizon_hours", "must be at least 1"));
  if (!(config.w_max_hours > 0.0))
    throw ValidationError(field_error("w_max_hours", "must be positive"));
  if (!(config.service_mean_min > 0.0))
    throw ValidationError(field_error("service_mean_min", "must be positive"));
  if (config.service_sd_min < 0.0)
    throw ValidationError(field_error("service_sd_min", "must be non-negative"));
  if (config.discharge_rate < 0.0 || config.discharge_rate > 1.0)
    throw ValidationError(field_error("discharge_rate", "must be in [0, 1]"));
  double mix_sum = 0.0;
  for (double p : config.acuity_mix) {
    if (p < 0.0) throw ValidationError(field_error("acuity_mix", "entries must be non-negative"));
    mix_sum += p;
  }
  if (std::abs(mix_sum - 1.0) > 1e-9)
    throw ValidationError(field_error("acuity_mix", "must sum to 1"));
  if (config.hospitals.size() < 2)
    throw ValidationError(field_error("hospitals", "need a front line and at least one receiver"));
  for (std::size_t i = 0; i < config.hospitals.size(); ++i) {
    const alloc::Hospital& h = config.hospitals[i];
    const std::string prefix = "hospitals[" + std::to_string(i) + "]";
    if (h.id.empty()) throw ValidationError(field_error(prefix + ".id", "must not be empty"));
    if (h.capacity < 1) throw ValidationError(field_error(prefix + ".capacity", "must be at least 1"));
    if (h.transfer_cost < 0.0)
      throw ValidationError(field_error(prefix + ".transfer_cost", "must be non-negative"));
    if (h.acuity_capabilities.empty())
      throw ValidationError(field_error(prefix + ".acuity_capabilities", "must not be empty"));
    if (h.occupancy < 0 || h.occupancy > h.capacity)
      throw ValidationError(field_error(prefix + ".initial_occupancy", "must be in [0, capacity]"));
    for (std::size_t k = 0; k < i; ++k)
      if (config.hospitals[k].id == h.id)
        throw ValidationError(field_error(prefix + ".id", "duplicate hospital id"));
  }
  if (config.arrival_source.kind != ArrivalSource::Kind::Synthetic) {
    if (config.arrival_source.path.empty())
      throw ValidationError(field_error("arrival_source.path", "must not be empty"));
  } else {
    const io::SyntheticSpec& s = config.arrival_source.params;
    if (s.days < 1)
      throw ValidationError(field_error("arrival_source.params.days", "must be at least 1"));
    if (!(s.base_low > 0.0) || s.base_high < s.base_low)
      throw ValidationError(
          field_error("arrival_source.params.base_low", "need base_high >= base_low > 0"));
    if (s.noise_sd < 0.0)
      throw ValidationError(field_error("arrival_source.params.noise_sd", "must be non-negative"));
    if (!(s.weekend_scale > 0.0))
      throw ValidationError(field_error("arrival_source.params.weekend_scale", "must be positive"));
  }
}

std::vector<alloc::Hospital> default_hospitals() {
  using alloc::Acuity;
  std::set<Acuity> all{Acuity::Low, Acuity::Medium, Acuity::High};
  return {
      {"H1", 60, 0.0, all, 0},
      {"H2", 40, 10.0, all, 0},
      {"H3", 30, 15.0, all, 0},
      {"H4", 30, 20.0, all, 0},
      {"H5", 30, 25.0, all, 0},
  };
}

double SimulationMetrics::total_cost() const {
  return cumulative_cost_series.empty() ? 0.0 : cumulative_cost_series.back();
}

std::vector<double> generate_arrivals(double rate_per_hour, int hour_index,
                                      RngStream& rng) {
  if (!(rate_per_hour >= 0.0) || !std::isfinite(rate_per_hour))
    throw ValidationError("negative rate");
  long count = rng.next_poisson(rate_per_hour);
  std::vector<double> times(static_cast<std::size_t>(count));
  for (double& t : times) t = hour_index + rng.next_double();
  std::sort(times.begin(), times.end());
  return times;
}

double sample_service_time(double mean_min, double sd_min, RngStream& rng) {
  if (!(mean_min > 0.0)) throw ValidationError("service mean must be positive");
  if (sd_min < 0.0) throw ValidationError("service sd must be non-negative");
  double draw;
  do {
    draw = rng.next_normal(mean_min, sd_min);
  } while (draw <= 0.0);
  return draw;
}

int hourly_discharge(alloc::Hospital& hospital, double rate, RngStream& rng) {
  if (rate < 0.0 || rate > 1.0) throw ValidationError("discharge rate must be in [0, 1]");
  int leaving = static_cast<int>(rng.next_binomial(hospital.occupancy, rate));
  hospital.occupancy -= leaving;
  return leaving;
}

namespace {

// Front-line flow: beds gate admission, a single triage channel serves the
// FIFO queue, and treated patients keep their bed until the hourly
// discharge pass. Waiting therefore happens in a bed, before triage.
class Engine {
 public:
  Engine(const ScenarioConfig& config, const ArrivalSeries& arrivals)
      : config_(config),
        hospitals_(config.hospitals),
        arrivals_rng_(config.seed, Stream::Arrivals),
        service_rng_(config.seed, Stream::Service),
        discharge_rng_(config.seed, Stream::Discharge),
        acuity_rng_(config.seed, Stream::Acuity) {
    validate(config);
    if (arrivals.values.size() < static_cast<std::size_t>(config.horizon_hours))
      throw ValidationError("arrival data shorter than horizon");
    front_background_ = hospitals_[0].occupancy;

    const int horizon = config.horizon_hours;
    metrics_.relocations_per_hour.assign(horizon, 0);
    metrics_.cumulative_cost_series.assign(horizon, 0.0);
    metrics_.utilization_series.assign(
        horizon, std::vector<double>(hospitals_.size(), 0.0));
    for (const alloc::Hospital& h : hospitals_) {
      metrics_.hospital_ids.push_back(h.id);
      metrics_.served_per_hospital[h.id] = 0;
    }
  }

  SimulationMetrics run(const ArrivalSeries& arrivals) {
    schedule_arrivals(arrivals);
    for (int t = 1; t <= config_.horizon_hours; ++t)
      push({static_cast<double>(t), EventType::HourlyDischarge, 0, 0});

    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      if (ev.time > static_cast<double>(config_.horizon_hours)) continue;
      dispatch(ev);
      check_invariants();
    }

    finalize();
    return std::move(metrics_);
  }

 private:
  struct PatientState {
    alloc::Patient core;
    int occupancy_at_arrival = 0;
  };

  alloc::Hospital& front() { return hospitals_[0]; }

  void push(Event ev) {
    ev.seq = next_seq_++;
    queue_.push(ev);
  }

  void log(double time, const char* event, std::int64_t patient,
           const std::string& hospital, std::string detail) {
    metrics_.event_log.push_back({time, event, patient, hospital, std::move(detail)});
  }

  void schedule_arrivals(const ArrivalSeries& arrivals) {
    for (int hour = 0; hour < config_.horizon_hours; ++hour) {
      const double rate = arrivals.values[static_cast<std::size_t>(hour)];
      if (rate < 0.0 || !std::isfinite(rate)) throw ValidationError("negative rate");
      std::vector<double> times;
      if (config_.deterministic_arrivals) {
        long count = std::lround(rate);
        for (long j = 0; j < count; ++j)
          times.push_back(hour + (j + 0.5) / static_cast<double>(count));
      } else {
        times = generate_arrivals(rate, hour, arrivals_rng_);
      }
      for (double t : times) {
        PatientState p;
        p.core.id = static_cast<std::uint32_t>(patients_.size());
        p.core.acuity = sample_acuity();
        p.core.arrival_hour = t;
        p.core.wait_start = t;
        patients_.push_back(std::move(p));
        push({t, EventType::Arrival, 0, patients_.back().core.id});
      }
    }
  }

  alloc::Acuity sample_acuity() {
    double u = acuity_rng_.next_double();
    if (u < config_.acuity_mix[0]) return alloc::Acuity::Low;
    if (u < config_.acuity_mix[0] + config_.acuity_mix[1]) return alloc::Acuity::Medium;
    return alloc::Acuity::High;
  }

  void dispatch(const Event& ev) {
    switch (ev.type) {
      case EventType::Arrival: on_arrival(ev); break;
      case EventType::ServiceComplete: on_service_complete(ev); break;
      case EventType::WaitThresholdBreach: on_breach(ev); break;
      case EventType::HourlyDischarge: on_hourly_discharge(ev); break;
    }
  }

  void on_arrival(const Event& ev) {
    PatientState& p = patients_[ev.patient];
    ++arrived_;
    p.occupancy_at_arrival = front().occupancy;
    log(ev.time, "arrival", ev.patient, front().id,
        "occ=" + std::to_string(front().occupancy) +
            ";cap=" + std::to_string(front().capacity) +
            ";acuity=" + alloc::to_string(p.core.acuity));

    queueing::RelocationPolicy policy{config_.w_max_hours};
    if (queueing::should_relocate(0.0, policy, front().occupancy, front().capacity)) {
      flag_for_relocation(ev.patient, ev.time, 0.0, /*full_on_arrival=*/true);
      return;
    }

    front().occupancy += 1;
    p.core.status = alloc::PatientStatus::Waiting;
    ++waiting_;
    waiting_queue_.push_back(ev.patient);
    push({ev.time + config_.w_max_hours, EventType::WaitThresholdBreach, 0, ev.patient});
    try_start_service(ev.time);
  }

  void try_start_service(double now) {
    if (in_triage_.has_value()) return;
    while (!waiting_queue_.empty()) {
      std::uint32_t id = waiting_queue_.front();
      waiting_queue_.pop_front();
      PatientState& p = patients_[id];
      if (p.core.status != alloc::PatientStatus::Waiting) continue;  // already flagged
      p.core.status = alloc::PatientStatus::InService;
      --waiting_;
      in_triage_ = id;
      double minutes = sample_service_time(config_.service_mean_min,
                                           config_.service_sd_min, service_rng_);
      push({now + minutes / 60.0, EventType::ServiceComplete, 0, id});
      log(now, "service_start", id, front().id, "");
      return;
    }
  }

  void on_service_complete(const Event& ev) {
    post_triage_.push_back(ev.patient);
    in_triage_.reset();
    metrics_.served_per_hospital[front().id] += 1;
    log(ev.time, "service_complete", ev.patient, front().id, "");
    try_start_service(ev.time);
  }

  void on_breach(const Event& ev) {
    PatientState& p = patients_[ev.patient];
    if (p.core.status != alloc::PatientStatus::Waiting) return;  // served in time
    // Still queued at the threshold: from here the wait is strictly past
    // w_max, so the patient leaves the front line.
    double wait = ev.time - p.core.wait_start;
    front().occupancy -= 1;
    --waiting_;
    flag_for_relocation(ev.patient, ev.time, wait, /*full_on_arrival=*/false);
  }

  void flag_for_relocation(std::uint32_t id, double now, double wait, bool full_on_arrival) {
    PatientState& p = patients_[id];
    // allocate_batch wants a vector; hand it the receiver tail and copy back.
    std::vector<alloc::Hospital> tail(hospitals_.begin() + 1, hospitals_.end());
    alloc::AllocationResult result = alloc::allocate_batch(
        std::span<const alloc::Patient>(&p.core, 1), tail);
    std::copy(tail.begin(), tail.end(), hospitals_.begin() + 1);

    RelocationAudit audit;
    audit.patient_id = id;
    audit.time = now;
    audit.wait_hours = wait;
    audit.full_on_arrival = full_on_arrival;
    audit.occupancy_at_arrival = p.occupancy_at_arrival;
    audit.capacity = front().capacity;

    const char* reason = full_on_arrival ? "capacity" : "breach";
    if (!result.assignments.empty()) {
      const alloc::Assignment& a = result.assignments.front();
      p.core.status = alloc::PatientStatus::Relocated;
      ++relocated_;
      metrics_.served_per_hospital[a.hospital_id] += 1;
      metrics_.acuity_counts_relocated[static_cast<int>(p.core.acuity)] += 1;
      metrics_.assignments.push_back({id, a.hospital_id, a.cost, now, p.core.acuity});
      audit.placed = true;
      audit.hospital_id = a.hospital_id;
      log(now, "relocated", id, a.hospital_id,
          "wait=" + fmt_double(wait) + ";reason=" + reason +
              ";cost=" + fmt_double(a.cost));
    } else {
      p.core.status = alloc::PatientStatus::Overflow;
      ++overflow_;
      metrics_.overflow_count += 1;
      log(now, "overflow", id, "",
          "wait=" + fmt_double(wait) + ";reason=" + reason);
    }
    metrics_.relocation_audits.push_back(std::move(audit));
  }

  void on_hourly_discharge(const Event& ev) {
    const int hour_slot = static_cast<int>(std::lround(ev.time)) - 1;
    for (std::size_t i = 0; i < hospitals_.size(); ++i) {
      int freed = 0;
      if (i == 0) {
        freed = discharge_front_line();
      } else {
        freed = hourly_discharge(hospitals_[i], config_.discharge_rate, discharge_rng_);
      }
      log(ev.time, "discharge", -1, hospitals_[i].id, "count=" + std::to_string(freed));
      if (hour_slot >= 0 && hour_slot < config_.horizon_hours)
        metrics_.utilization_series[hour_slot][i] = hospitals_[i].utilization_now();
    }
  }

  // Only patients done with triage (plus any background occupants) are
  // eligible to leave; queued and mid-triage patients stay.
  int discharge_front_line() {
    const long eligible = front_background_ + static_cast<long>(post_triage_.size());
    int leaving = static_cast<int>(
        discharge_rng_.next_binomial(eligible, config_.discharge_rate));
    int remaining = leaving;
    int from_background = std::min<int>(remaining, front_background_);
    front_background_ -= from_background;
    remaining -= from_background;
    while (remaining > 0) {
      std::uint32_t id = post_triage_.front();
      post_triage_.pop_front();
      patients_[id].core.status = alloc::PatientStatus::Discharged;
      ++discharged_;
      --remaining;
    }
    front().occupancy -= leaving;
    return leaving;
  }

  void check_invariants() const {
    for (const alloc::Hospital& h : hospitals_) {
      if (h.occupancy < 0 || h.occupancy > h.capacity)
        throw std::logic_error("capacity invariant violated at " + h.id);
    }
    const int in_triage = in_triage_.has_value() ? 1 : 0;
    const long front_tracked =
        waiting_ + in_triage + static_cast<long>(post_triage_.size());
    if (hospitals_[0].occupancy != front_background_ + front_tracked)
      throw std::logic_error("front-line occupancy does not match tracked patients");
    if (arrived_ != waiting_ + in_service_count() + discharged_ + relocated_ + overflow_)
      throw std::logic_error("conservation invariant violated");
  }

  long in_service_count() const {
    return (in_triage_.has_value() ? 1 : 0) + static_cast<long>(post_triage_.size());
  }

  void finalize() {
    const int horizon = config_.horizon_hours;
    double running = 0.0;
    // Bucket assignments by flag hour; the series snapshots each hour end.
    std::vector<double> per_hour(horizon, 0.0);
    for (const AssignmentRecord& a : metrics_.assignments) {
      int bucket = std::clamp(static_cast<int>(std::floor(a.hour)), 0, horizon - 1);
      metrics_.relocations_per_hour[bucket] += 1;
      per_hour[bucket] += a.cost;
    }
    for (int h = 0; h < horizon; ++h) {
      running += per_hour[h];
      metrics_.cumulative_cost_series[h] = running;
    }
    metrics_.final_statuses.reserve(patients_.size());
    for (const PatientState& p : patients_)
      metrics_.final_statuses.push_back(p.core.status);
  }

  ScenarioConfig config_;
  std::vector<alloc::Hospital> hospitals_;
  RngStream arrivals_rng_;
  RngStream service_rng_;
  RngStream discharge_rng_;
  RngStream acuity_rng_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t next_seq_ = 0;
  std::vector<PatientState> patients_;
  std::deque<std::uint32_t> waiting_queue_;
  std::deque<std::uint32_t> post_triage_;
  std::optional<std::uint32_t> in_triage_;
  int front_background_ = 0;

  long arrived_ = 0;
  long waiting_ = 0;
  long discharged_ = 0;
  long relocated_ = 0;
  long overflow_ = 0;

  SimulationMetrics metrics_;
};

}  // namespace

SimulationMetrics run(const ScenarioConfig& config, const ArrivalSeries& arrivals) {
  Engine engine(config, arrivals);
  return engine.run(arrivals);
}

std::vector<SummaryRow> summarize(const SimulationMetrics& metrics,
                                  const std::vector<alloc::Hospital>& hospitals) {
  std::vector<SummaryRow> rows;
  for (std::size_t h = 0; h < metrics.relocations_per_hour.size(); ++h)
    rows.push_back({"relocations", std::to_string(h),
                    static_cast<double>(metrics.relocations_per_hour[h])});

  long total_served = 0;
  for (const alloc::Hospital& h : hospitals) {
    auto it = metrics.served_per_hospital.find(h.id);
    const int served = it == metrics.served_per_hospital.end() ? 0 : it->second;
    total_served += served;
    rows.push_back({"distribution", h.id, static_cast<double>(served)});
  }

  for (std::size_t h = 0; h < metrics.cumulative_cost_series.size(); ++h)
    rows.push_back({"cost", std::to_string(h), metrics.cumulative_cost_series[h]});

  long total_relocated = 0;
  for (int level = 0; level < 3; ++level) {
    total_relocated += metrics.acuity_counts_relocated[level];
    rows.push_back({"acuity", alloc::to_string(static_cast<alloc::Acuity>(level)),
                    static_cast<double>(metrics.acuity_counts_relocated[level])});
  }

  // Equity spread covers the receiving hospitals; the front line is not an
  // allocation target.
  double util_min = 0.0, util_max = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < hospitals.size(); ++i) {
    const alloc::Hospital& h = hospitals[i];
    auto it = metrics.served_per_hospital.find(h.id);
    const int served = it == metrics.served_per_hospital.end() ? 0 : it->second;
    const double u = alloc::utilization(h, served);
    rows.push_back({"utilization", h.id, u});
    if (i == 0) continue;
    util_min = first ? u : std::min(util_min, u);
    util_max = first ? u : std::max(util_max, u);
    first = false;
  }

  rows.push_back({"summary", "total_served", static_cast<double>(total_served)});
  rows.push_back({"summary", "total_relocated", static_cast<double>(total_relocated)});
  rows.push_back({"summary", "total_cost", metrics.total_cost()});
  rows.push_back({"summary", "overflow", static_cast<double>(metrics.overflow_count)});
  rows.push_back({"summary", "utilization_spread", util_max - util_min});
  return rows;
}

}  // namespace surgeflow::sim
