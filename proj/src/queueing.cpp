#include "surgeflow/queueing.hpp"

#include <cmath>

#include "surgeflow/errors.hpp"

namespace surgeflow::queueing {

double expected_wait(const QueueParams& params) {
  if (!(params.mu > 0.0)) throw ValidationError("invalid service rate");
  if (params.lambda < 0.0) throw ValidationError("invalid arrival rate");
  if (params.lambda >= params.mu) throw ValidationError("unstable queue");
  return params.lambda / (params.mu * (params.mu - params.lambda));
}

bool should_relocate(double wait_so_far_hours, const RelocationPolicy& policy,
                     int occupancy, int capacity) {
  if (wait_so_far_hours < 0.0) throw ValidationError("negative wait");
  if (occupancy < 0) throw ValidationError("negative occupancy");
  if (capacity < 1) throw ValidationError("capacity must be at least 1");
  return wait_so_far_hours > policy.w_max_hours || occupancy >= capacity;
}

}  // namespace surgeflow::queueing
