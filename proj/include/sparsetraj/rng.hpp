#pragma once

#include <cstdint>
#include <random>

namespace sparsetraj {

/// Random engine keyed by (seed, stream).
///
/// Each replicate owns its own stream, so results never depend on which
/// thread ran which replicate. The engine is a 64-bit Mersenne twister whose
/// state is expanded from the four 32-bit halves of seed and stream.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x5eed5eedU};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Uniform double in [0, 1).
  double uniform01() { return std::generate_canonical<double, 53>(engine_); }

  /// Standard normal draw.
  double normal() { return normal_(engine_); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Streams at or above this value are reserved for auxiliary draws
/// (trajectory endpoints, random directions) so they never collide with
/// replicate streams.
inline constexpr std::uint64_t kAuxStreamBase = std::uint64_t{1} << 62;

}  // namespace sparsetraj
