#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter), so results do not depend on evaluation order or
// thread count.

#include <cmath>
#include <cstdint>

#include "gph/torus.hpp"
#include "gph/types.hpp"

namespace gph {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ ^ splitmix64(counter));
  }
  /// Uniform in (0, 1).
  double uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Standard complex Gaussian (unit variance per real component).
  cplx complex_normal(std::uint64_t counter) const noexcept {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }

 private:
  std::uint64_t key_;
};

/// Sequential draws on top of CounterRng.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept : rng_(seed, stream) {}
  double uniform() noexcept { return rng_.uniform(counter_++); }
  cplx complex_normal() noexcept { return rng_.complex_normal(counter_++); }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

/// Complex Gaussian coefficients with envelope exp(-|n|^2 / (2 width^2)),
/// normalised to unit L^2 norm. Smooth in x for moderate width.
TorusField random_smooth_field(const ModeLattice& lattice, std::uint64_t seed,
                               std::uint64_t stream, double width = 1.0);

/// Independent complex Gaussian coefficients on the modes where the
/// Littlewood-Paley symbol of `dyadic` is nonzero, normalised to unit L^2 norm.
TorusField random_shell_field(const ModeLattice& lattice, int dyadic, std::uint64_t seed,
                              std::uint64_t stream);

}  // namespace gph
