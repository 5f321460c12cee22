#pragma once

#include <vector>

namespace surgeflow {

// Hourly patient-arrival counts. values[i] is the count for hour
// start_hour + i; counts are real-valued so forecasts can feed back in.
struct ArrivalSeries {
  std::vector<double> values;
  int start_hour = 0;
};

}  // namespace surgeflow
