#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "surgeflow/allocation.hpp"
#include "surgeflow/errors.hpp"
#include "surgeflow/rng.hpp"

using namespace surgeflow;
using namespace surgeflow::alloc;

namespace {

std::vector<Hospital> receivers_with_costs(std::vector<double> costs, int capacity = 30) {
  std::vector<Hospital> hs;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    Hospital h;
    h.id = "H" + std::to_string(i + 2);
    h.capacity = capacity;
    h.transfer_cost = costs[i];
    hs.push_back(std::move(h));
  }
  return hs;
}

Patient patient(std::uint32_t id, Acuity acuity) {
  Patient p;
  p.id = id;
  p.acuity = acuity;
  return p;
}

// Exhaustive minimum over all feasible assignment matrices, tracking
// capacity as it enumerates. Infinity when some patient cannot be placed.
double brute_force_min_cost(const std::vector<Patient>& patients,
                            std::vector<Hospital> hospitals, std::size_t next = 0) {
  if (next == patients.size()) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (Hospital& h : hospitals) {
    if (h.free_beds() <= 0 || !h.can_treat(patients[next].acuity)) continue;
    h.occupancy += 1;
    double rest = brute_force_min_cost(patients, hospitals, next + 1);
    h.occupancy -= 1;
    best = std::min(best, h.transfer_cost + rest);
  }
  return best;
}

struct RandomInstance {
  std::vector<Patient> patients;
  std::vector<Hospital> hospitals;
};

RandomInstance random_instance(RngStream& rng, bool ample_capacity) {
  RandomInstance inst;
  const int n_patients = 1 + static_cast<int>(rng.next_below(6));
  const int n_hospitals = 4;

  std::vector<double> costs{10, 15, 20, 25};
  rng.shuffle(costs);
  for (int i = 0; i < n_hospitals; ++i) {
    Hospital h;
    h.id = "H" + std::to_string(i + 2);
    h.capacity = ample_capacity ? n_patients + static_cast<int>(rng.next_below(4))
                                : 1 + static_cast<int>(rng.next_below(3));
    h.transfer_cost = costs[i];
    h.acuity_capabilities.clear();
    for (int level = 0; level < 3; ++level)
      if (rng.next_double() < 0.7) h.acuity_capabilities.insert(static_cast<Acuity>(level));
    if (h.acuity_capabilities.empty()) h.acuity_capabilities.insert(Acuity::Low);
    inst.hospitals.push_back(std::move(h));
  }
  for (int j = 0; j < n_patients; ++j) {
    Acuity a = static_cast<Acuity>(rng.next_below(3));
    inst.patients.push_back(patient(static_cast<std::uint32_t>(j), a));
  }
  if (ample_capacity) {
    // keep the instance feasible: every acuity level needs a capable receiver
    for (int level = 0; level < 3; ++level) {
      bool covered = false;
      for (const Hospital& h : inst.hospitals)
        covered |= h.can_treat(static_cast<Acuity>(level));
      if (!covered)
        inst.hospitals[rng.next_below(4)].acuity_capabilities.insert(
            static_cast<Acuity>(level));
    }
  }
  return inst;
}

}  // namespace

TEST_CASE("cheapest compatible hospital wins") {
  auto hs = receivers_with_costs({10, 15, 20, 25});
  std::vector<Patient> ps{patient(1, Acuity::Low)};
  AllocationResult result = allocate_batch(ps, hs);
  REQUIRE(result.assignments.size() == 1);
  CHECK(result.assignments[0].hospital_id == "H2");
  CHECK(result.assignments[0].cost == 10.0);
  CHECK(hs[0].occupancy == 1);
  // exhaustive check over the four feasible choices
  CHECK(brute_force_min_cost(ps, receivers_with_costs({10, 15, 20, 25})) == 10.0);
}

TEST_CASE("incompatible hospitals are skipped") {
  auto hs = receivers_with_costs({10, 15, 20, 25});
  hs[0].acuity_capabilities = {Acuity::Low, Acuity::Medium};
  std::vector<Patient> ps{patient(1, Acuity::High)};
  AllocationResult result = allocate_batch(ps, hs);
  REQUIRE(result.assignments.size() == 1);
  CHECK(result.assignments[0].hospital_id == "H3");
  CHECK(result.assignments[0].cost == 15.0);
  auto hs2 = receivers_with_costs({10, 15, 20, 25});
  hs2[0].acuity_capabilities = {Acuity::Low, Acuity::Medium};
  CHECK(brute_force_min_cost(ps, hs2) == 15.0);
}

TEST_CASE("no feasible hospital means overflow, not loss") {
  auto hs = receivers_with_costs({10, 15, 20, 25}, 1);
  for (Hospital& h : hs) h.occupancy = h.capacity;
  std::vector<Patient> ps{patient(1, Acuity::Low)};
  AllocationResult result = allocate_batch(ps, hs);
  CHECK(result.assignments.empty());
  REQUIRE(result.overflow.size() == 1);
  CHECK(result.overflow[0] == 1);
}

TEST_CASE("duplicate patient ids are rejected") {
  auto hs = receivers_with_costs({10, 15});
  std::vector<Patient> ps{patient(1, Acuity::Low), patient(1, Acuity::Low)};
  CHECK_THROWS_AS(allocate_batch(ps, hs), ValidationError);
}

TEST_CASE("inconsistent occupancy is rejected") {
  auto hs = receivers_with_costs({10, 15});
  hs[0].occupancy = hs[0].capacity + 1;
  std::vector<Patient> ps{patient(1, Acuity::Low)};
  CHECK_THROWS_AS(allocate_batch(ps, hs), ValidationError);
}

TEST_CASE("ties break toward the emptier hospital, then the lower id") {
  auto hs = receivers_with_costs({10, 10}, 10);
  hs[0].occupancy = 5;
  std::vector<Patient> ps{patient(1, Acuity::Low)};
  AllocationResult r = allocate_batch(ps, hs);
  CHECK(r.assignments[0].hospital_id == "H3");

  auto hs2 = receivers_with_costs({10, 10}, 10);
  std::vector<Patient> ps2{patient(2, Acuity::Low)};
  AllocationResult r2 = allocate_batch(ps2, hs2);
  CHECK(r2.assignments[0].hospital_id == "H2");
}

TEST_CASE("assignment_cost sums the network totals") {
  std::vector<Assignment> assignments;
  auto add = [&](int count, const char* id, double cost) {
    for (int i = 0; i < count; ++i)
      assignments.push_back({static_cast<std::uint32_t>(assignments.size()), id, cost});
  };
  add(188, "H2", 10.0);
  add(119, "H3", 15.0);
  add(117, "H4", 20.0);
  add(108, "H5", 25.0);
  CHECK(assignment_cost(assignments) == 8705.0);
  CHECK(assignment_cost({}) == 0.0);
  std::vector<Assignment> one{{1, "H5", 25.0}};
  CHECK(assignment_cost(one) == 25.0);
}

TEST_CASE("utilization is served over capacity") {
  Hospital h;
  h.id = "H2";
  h.capacity = 100;
  CHECK(utilization(h, 50) == doctest::Approx(0.5));
  CHECK(utilization(h, 0) == 0.0);
  h.capacity = 0;
  CHECK_THROWS_AS(utilization(h, 1), ValidationError);
}

TEST_CASE("allocation invariants hold on random instances") {
  RngStream rng(31337, 0);
  for (int trial = 0; trial < 150; ++trial) {
    RandomInstance inst = random_instance(rng, /*ample_capacity=*/false);
    std::vector<Hospital> before = inst.hospitals;
    std::vector<Hospital> live = inst.hospitals;
    AllocationResult result = allocate_batch(inst.patients, live);

    // completeness: every patient lands exactly once
    CHECK(result.assignments.size() + result.overflow.size() == inst.patients.size());

    // capacity and bookkeeping
    for (std::size_t i = 0; i < live.size(); ++i) {
      long received = 0;
      for (const Assignment& a : result.assignments)
        if (a.hospital_id == live[i].id) ++received;
      CHECK(live[i].occupancy == before[i].occupancy + received);
      CHECK(live[i].occupancy <= live[i].capacity);
    }

    // compatibility plus per-patient optimality, by replaying the sequence
    std::vector<Hospital> replay = before;
    std::size_t next_assignment = 0;
    for (const Patient& p : inst.patients) {
      bool overflowed = std::find(result.overflow.begin(), result.overflow.end(), p.id) !=
                        result.overflow.end();
      double cheapest = std::numeric_limits<double>::infinity();
      for (const Hospital& h : replay)
        if (h.free_beds() > 0 && h.can_treat(p.acuity))
          cheapest = std::min(cheapest, h.transfer_cost);
      if (overflowed) {
        CHECK(cheapest == std::numeric_limits<double>::infinity());
        continue;
      }
      REQUIRE(next_assignment < result.assignments.size());
      const Assignment& a = result.assignments[next_assignment++];
      CHECK(a.patient_id == p.id);
      for (Hospital& h : replay) {
        if (h.id != a.hospital_id) continue;
        CHECK(h.can_treat(p.acuity));
        CHECK(h.transfer_cost == a.cost);
        CHECK(a.cost == cheapest);
        h.occupancy += 1;
      }
    }
  }
}

TEST_CASE("greedy equals brute force when capacity is ample and costs distinct") {
  RngStream rng(90210, 0);
  for (int trial = 0; trial < 60; ++trial) {
    RandomInstance inst = random_instance(rng, /*ample_capacity=*/true);
    std::vector<Hospital> live = inst.hospitals;
    AllocationResult result = allocate_batch(inst.patients, live);
    CHECK(result.overflow.empty());
    CHECK(assignment_cost(result.assignments) ==
          doctest::Approx(brute_force_min_cost(inst.patients, inst.hospitals)));
  }
}
