#pragma once

// Free Schroedinger group and the cubic NLS  i u_t + Lap u = lambda |u|^2 u
// on the truncated lattice (Galerkin truncation of the nonlinearity).

#include <span>
#include <vector>

#include "gph/torus.hpp"

namespace gph {

/// e^{it Lap} f: coefficient at n multiplied by e^{-it|n|^2}.
TorusField free_propagate(const TorusField& f, double t);

/// Lap f as a Fourier multiplier -|n|^2.
TorusField laplacian(const TorusField& f);

enum class Integrator { split_step_strang, integrating_factor_rk4 };

struct NlsParams {
  double lambda = 1.0;
  double dt = 1e-3;
  double t_final = 1.0;
  Integrator integrator = Integrator::split_step_strang;
  /// Abort once ||u||_{H^1} exceeds this multiple of its initial value.
  double blowup_factor = 1e3;

  /// Throws ConfigError on lambda not in {-1, 0, 1}, dt <= 0 or t_final < 0.
  void validate() const;
};

/// Values of S_t(phi) at the requested sample times (any order, negative times
/// allowed). Each leg from the previous sample is cut into equal steps no
/// longer than params.dt, so samples are hit exactly. Throws GuardError on
/// blow-up or non-convergence of the implicit substep.
std::vector<TorusField> nls_evolve(const TorusField& phi, const NlsParams& params,
                                   std::span<const double> sample_times);

/// Single step of length h (may be negative).
TorusField nls_step(const TorusField& u, double lambda, double h, Integrator integrator);

/// Uniform grid 0, t_final/steps, ..., t_final.
std::vector<double> uniform_times(double t_final, int steps);

struct Conserved {
  double mass = 0.0;
  double energy = 0.0;
};

/// mass = ||u||^2, energy = \int |grad u|^2 + (lambda/2) \int |u|^4.
Conserved conserved_quantities(const TorusField& u, double lambda);

}  // namespace gph
