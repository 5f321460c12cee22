#pragma once

#include <cstdint>
#include <vector>

namespace surgeflow {

// Named sub-streams, one per independent random consumer. Fixed numeric ids
// keep every sequence reproducible from (seed, stream_id, index) alone.
enum class Stream : std::uint64_t {
  Arrivals = 0,
  Service = 1,
  Discharge = 2,
  Acuity = 3,
  TrainShuffle = 4,
  WeightInit = 5,
};

// Counter-based splitmix generator. Draw i of a stream is a bit-mix of
// (seed, stream_id, i), so streams never share state and any draw can be
// reproduced without replaying the ones before it.
class RngStream {
 public:
  RngStream(std::uint64_t seed, Stream stream)
      : RngStream(seed, static_cast<std::uint64_t>(stream)) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  std::uint64_t next_below(std::uint64_t bound);  // uniform in [0, bound)
  double next_double();                           // uniform in [0, 1)
  double next_normal(double mean, double sd);     // Box-Muller
  long next_poisson(double rate);
  long next_binomial(long n, double p);

  // Fisher-Yates, deterministic for a given stream position.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace surgeflow
