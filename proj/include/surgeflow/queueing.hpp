#pragma once

namespace surgeflow::queueing {

// M/M/1 rates, both in patients per hour.
struct QueueParams {
  double lambda = 0.0;
  double mu = 1.0;
};

struct RelocationPolicy {
  double w_max_hours = 0.5;
};

// Expected time in queue, Wq = lambda / (mu * (mu - lambda)), in hours.
// Requires a stable queue (lambda < mu).
double expected_wait(const QueueParams& params);

// A patient is flagged for relocation once their realized wait strictly
// exceeds the threshold, or the hospital has no free bed.
bool should_relocate(double wait_so_far_hours, const RelocationPolicy& policy,
                     int occupancy, int capacity);

}  // namespace surgeflow::queueing
