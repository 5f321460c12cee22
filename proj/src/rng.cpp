#include "surgeflow/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace surgeflow {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : base_(mix(mix(seed + kGolden) ^ (kGolden * (stream_id + 1)))) {}

std::uint64_t RngStream::next_u64() {
  return mix(base_ + (++counter_) * kGolden);
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
  // rejection to avoid modulo bias
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal(double mean, double sd) {
  if (have_spare_) {
    have_spare_ = false;
    return mean + sd * spare_;
  }
  // u1 in (0, 1] so the log is finite
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return mean + sd * r * std::cos(theta);
}

long RngStream::next_poisson(double rate) {
  if (rate < 0.0 || !std::isfinite(rate))
    throw std::invalid_argument("next_poisson: rate must be non-negative");
  if (rate == 0.0) return 0;
  // Knuth's product method underflows for large rates; split by halving,
  // Poisson(a + b) = Poisson(a) + Poisson(b).
  if (rate > 500.0) return next_poisson(rate / 2.0) + next_poisson(rate - rate / 2.0);
  const double limit = std::exp(-rate);
  long k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= next_double();
  } while (p > limit);
  return k - 1;
}

long RngStream::next_binomial(long n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw std::invalid_argument("next_binomial: need n >= 0 and p in [0,1]");
  long hits = 0;
  for (long i = 0; i < n; ++i)
    if (next_double() < p) ++hits;
  return hits;
}

}  // namespace surgeflow
