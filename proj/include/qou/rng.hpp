#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace qou {

/// splitmix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x);

/// Seed of an independent sub-run (e.g. one point of a parameter grid).
[[nodiscard]] std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index);

/// One random stream. Streams are a pure function of (master seed, index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}
  static Rng stream(std::uint64_t master, std::uint64_t index);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1).
  double uniform_open() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential() { return -std::log(uniform_open()); }
  std::uint64_t poisson(double mean);
  std::uint64_t bits() { return eng_(); }
  /// Independent child stream; advances this one.
  Rng split() { return Rng(eng_()); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Worker count: set_threads() if called, else QOU_THREADS, else hardware.
[[nodiscard]] unsigned thread_count();
void set_threads(unsigned n);

/// Runs body(i) for i in [0, n) on thread_count() workers. Bodies must only
/// write to their own slot so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qou
