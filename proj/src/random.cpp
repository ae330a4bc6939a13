#include "gph/random.hpp"

namespace gph {

TorusField random_smooth_field(const ModeLattice& lattice, std::uint64_t seed,
                               std::uint64_t stream, double width) {
  const CounterRng rng(seed, stream);
  TorusField f(lattice);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = rng.complex_normal(i) * std::exp(-lattice.norm_sq(i) / (2.0 * width * width));
  return normalized(f);
}

TorusField random_shell_field(const ModeLattice& lattice, int dyadic, std::uint64_t seed,
                              std::uint64_t stream) {
  const CounterRng rng(seed, stream);
  TorusField f(lattice);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (lp_multiplier(dyadic, std::sqrt(double(lattice.norm_sq(i)))) > 0.0)
      f[i] = rng.complex_normal(i);
  return normalized(f);
}

}  // namespace gph
