#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace surgeflow::alloc {

enum class Acuity { Low, Medium, High };

const char* to_string(Acuity level);
std::optional<Acuity> acuity_from_string(const std::string& name);

struct Hospital {
  std::string id;
  int capacity = 0;
  double transfer_cost = 0.0;
  std::set<Acuity> acuity_capabilities{Acuity::Low, Acuity::Medium, Acuity::High};
  int occupancy = 0;

  bool can_treat(Acuity level) const { return acuity_capabilities.count(level) > 0; }
  int free_beds() const { return capacity - occupancy; }
  double utilization_now() const {
    return capacity > 0 ? static_cast<double>(occupancy) / capacity : 0.0;
  }
};

enum class PatientStatus { Waiting, InService, Discharged, Relocated, Overflow };

const char* to_string(PatientStatus status);

struct Patient {
  std::uint32_t id = 0;
  Acuity acuity = Acuity::Low;
  double arrival_hour = 0.0;
  double wait_start = 0.0;
  PatientStatus status = PatientStatus::Waiting;
};

struct Assignment {
  std::uint32_t patient_id = 0;
  std::string hospital_id;
  double cost = 0.0;
};

struct AllocationResult {
  std::vector<Assignment> assignments;
  std::vector<std::uint32_t> overflow;  // patients no receiver could take
};

// Places each flagged patient, in order, at the compatible receiving
// hospital with a free bed and the lowest transfer cost (ties: lowest
// current utilization, then lowest id). Occupancies update as patients are
// placed, so earlier patients constrain later ones.
AllocationResult allocate_batch(std::span<const Patient> patients,
                                std::vector<Hospital>& receivers);

double assignment_cost(std::span<const Assignment> assignments);

// served / capacity, the per-hospital equity metric.
double utilization(const Hospital& hospital, int served_count);

}  // namespace surgeflow::alloc
