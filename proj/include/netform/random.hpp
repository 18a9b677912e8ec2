#pragma once

// Portable random streams.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the standard.
// Seeding and stream splitting use SplitMix64. Distributions are computed
// here rather than with <random>'s distribution classes, whose algorithms
// are implementation-defined; this keeps golden files identical across
// standard libraries.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace netform {

inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-v1";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `index` under master seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0,1) from the top 53 bits.
constexpr double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index = 0) : engine_(derive_seed(seed, index)) {}

  /// [0,1)
  double uniform() { return unit_interval(engine_()); }
  /// (0,1), never 0 or 1.
  double open_uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log(open_uniform()) / rate; }

  /// Index k with probability proportional to cumulative[k] - cumulative[k-1];
  /// `cumulative` is a non-decreasing prefix-sum table ending at the total.
  std::size_t categorical(std::span<const double> cumulative) {
    const double target = uniform() * cumulative.back();
    std::size_t lo = 0;
    std::size_t hi = cumulative.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cumulative[mid] > target) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netform
