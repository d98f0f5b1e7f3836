#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace rot {

/// Mersenne Twister (std::mt19937_64), whose output sequence is fixed by the
/// standard. The distributions below are implemented here rather than taken
/// from <random>, whose algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi] (inclusive) by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::string state() const;
  void set_state(const std::string& s);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the independent stream for problem `index` of (task, difficulty)
/// under a base seed. Streams never depend on how work is split across workers.
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t task, std::uint64_t difficulty,
                                    std::uint64_t index) noexcept {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ task);
  h = mix64(h ^ difficulty);
  return mix64(h ^ index);
}

}  // namespace rot
