#include "surgeflow/allocation.hpp"

#include <unordered_set>

#include "surgeflow/errors.hpp"

namespace surgeflow::alloc {

const char* to_string(Acuity level) {
  switch (level) {
    case Acuity::Low: return "Low";
    case Acuity::Medium: return "Medium";
    case Acuity::High: return "High";
  }
  return "?";
}

std::optional<Acuity> acuity_from_string(const std::string& name) {
  if (name == "Low") return Acuity::Low;
  if (name == "Medium") return Acuity::Medium;
  if (name == "High") return Acuity::High;
  return std::nullopt;
}

const char* to_string(PatientStatus status) {
  switch (status) {
    case PatientStatus::Waiting: return "Waiting";
    case PatientStatus::InService: return "InService";
    case PatientStatus::Discharged: return "Discharged";
    case PatientStatus::Relocated: return "Relocated";
    case PatientStatus::Overflow: return "Overflow";
  }
  return "?";
}

AllocationResult allocate_batch(std::span<const Patient> patients,
                                std::vector<Hospital>& receivers) {
  for (const Hospital& h : receivers) {
    if (h.occupancy < 0 || h.occupancy > h.capacity)
      throw ValidationError("inconsistent state: hospital " + h.id);
  }
  std::unordered_set<std::uint32_t> seen;
  for (const Patient& p : patients) {
    if (!seen.insert(p.id).second)
      throw ValidationError("duplicate patient id " + std::to_string(p.id));
  }

  AllocationResult result;
  for (const Patient& p : patients) {
    Hospital* best = nullptr;
    for (Hospital& h : receivers) {
      if (h.free_beds() <= 0 || !h.can_treat(p.acuity)) continue;
      if (best == nullptr) {
        best = &h;
        continue;
      }
      if (h.transfer_cost != best->transfer_cost) {
        if (h.transfer_cost < best->transfer_cost) best = &h;
      } else if (h.utilization_now() != best->utilization_now()) {
        if (h.utilization_now() < best->utilization_now()) best = &h;
      } else if (h.id < best->id) {
        best = &h;
      }
    }
    if (best == nullptr) {
      result.overflow.push_back(p.id);
      continue;
    }
    best->occupancy += 1;
    result.assignments.push_back({p.id, best->id, best->transfer_cost});
  }
  return result;
}

double assignment_cost(std::span<const Assignment> assignments) {
  double total = 0.0;
  for (const Assignment& a : assignments) total += a.cost;
  return total;
}

double utilization(const Hospital& hospital, int served_count) {
  if (hospital.capacity <= 0) throw ValidationError("capacity must be positive");
  return static_cast<double>(served_count) / hospital.capacity;
}

}  // namespace surgeflow::alloc
