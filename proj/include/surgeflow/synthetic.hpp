#pragma once

#include <cstdint>
#include <set>

#include "surgeflow/series.hpp"

namespace surgeflow::io {

// Hourly demand curve with daily troughs/peaks, a weekend damping factor
// and seeded Gaussian noise. Stands in for real arrival data.
struct SyntheticSpec {
  int days = 31;
  double base_low = 50.0;
  double base_high = 60.0;
  std::set<int> trough_hours{3, 4, 5};
  std::set<int> peak_hours{10, 16, 17};
  double weekend_scale = 0.9;
  double noise_sd = 1.0;
  std::uint64_t seed = 42;
};

ArrivalSeries generate_synthetic(const SyntheticSpec& spec);

}  // namespace surgeflow::io
