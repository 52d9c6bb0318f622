// Seedable, splittable random streams.
//
// Every stream is a std::mt19937_64 seeded from a splitmix64 mix of a parent
// seed and a stream key. The variate transforms are written out here rather
// than taken from <random> distributions, whose output is implementation
// defined, so that a (seed, key) pair gives the same numbers on every
// toolchain.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace adrsim {

std::uint64_t splitmix64(std::uint64_t x);

/// Stable 64-bit FNV-1a hash.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Seed of the child stream `key` of `parent`.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key);

class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::mt19937_64& engine() { return engine_; }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n);
  double exponential(double mean);
  double normal(double mean, double stddev);
  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform01() < p); }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace adrsim
