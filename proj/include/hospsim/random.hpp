#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hospsim {

/// Concerns that draw random numbers. Each (seed, concern, agent) triple owns
/// an independent engine, so the order in which agents are visited within a
/// phase never changes what any one of them draws.
enum class Substream : std::uint32_t {
  InitialValues = 1,
  Arrivals = 2,
};

/// Seeded 64-bit Mersenne Twister with platform-independent conversions to
/// real variates (std:: distributions are implementation-defined).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, Substream stream, std::uint32_t agent = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), agent};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  /// Integer on [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hospsim
