#ifndef GRADEQ_RNG_HPP
#define GRADEQ_RNG_HPP

#include <cmath>
#include <cstdint>

namespace gradeq {

/// Counter-based generator: draw i of stream s under seed k is
/// splitmix64_mix(k ^ mix(s)) applied to a strided counter. Output depends
/// only on (seed, stream, counter), so streams are reproducible across
/// platforms and safe to generate in parallel.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream * 0x9E3779B97F4A7C15ULL + 1))) {}

  // Independent substream (e.g. one per record field).
  CounterRng substream(std::uint64_t stream) const {
    CounterRng r(0);
    r.key_ = mix(key_ ^ mix(stream * 0xD1B54A32D192ED03ULL + 1));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() {
    return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on (0,1); the half-ulp offset keeps 0 out of log's domain.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Box-Muller; consumes two uniforms per call, no state carried over.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gradeq

#endif
