#include "gph/nls.hpp"

#include <cmath>
#include <string>

#include "gph/errors.hpp"

namespace gph {

TorusField free_propagate(const TorusField& f, double t) {
  TorusField out = f;
  if (t == 0.0) return out;
  const ModeLattice& lat = f.lattice();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= std::polar(1.0, -t * lat.norm_sq(i));
  return out;
}

TorusField laplacian(const TorusField& f) {
  TorusField out = f;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= -double(f.lattice().norm_sq(i));
  return out;
}

void NlsParams::validate() const {
  if (lambda != 1.0 && lambda != -1.0 && lambda != 0.0)
    throw ConfigError("lambda must be +1, -1 (or 0 for the free flow)");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be >= 0");
  if (!(blowup_factor > 1.0)) throw ConfigError("blow-up factor must exceed 1");
}

namespace {

double max_abs_diff(const TorusField& a, const TorusField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const TorusField& a) {
  double m = 0.0;
  for (const auto& c : a.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

// Implicit midpoint for i u_t = lambda P(|u|^2 u). Conserves the truncated
// mass exactly since <m, P(|m|^2 m)> is real.
TorusField nonlinear_substep(const TorusField& u0, double lambda, double h) {
  if (lambda == 0.0) return u0;
  const cplx coef = -kI * h * lambda;
  TorusField u1 = u0 + coef * cubic_term(u0);
  const double scale = std::max(max_abs(u0), 1e-300);
  double last = INFINITY;
  for (int it = 0; it < 100; ++it) {
    TorusField mid = 0.5 * (u0 + u1);
    TorusField next = u0 + coef * cubic_term(mid);
    const double change = max_abs_diff(next, u1);
    u1 = std::move(next);
    if (change <= 4e-16 * scale) return u1;
    // Rounding-level stagnation.
    if (change <= 1e-13 * scale && change >= 0.5 * last) return u1;
    last = change;
  }
  throw GuardError("implicit nonlinear substep did not converge; reduce dt");
}

TorusField nonlinearity(const TorusField& u, double lambda) {
  return (-kI * lambda) * cubic_term(u);
}

TorusField lawson_rk4(const TorusField& u, double lambda, double h) {
  if (lambda == 0.0) return free_propagate(u, h);
  const TorusField k1 = h * nonlinearity(u, lambda);
  const TorusField uh = free_propagate(u, h / 2);
  const TorusField k1h = free_propagate(k1, h / 2);
  const TorusField k2 = h * nonlinearity(uh + 0.5 * k1h, lambda);
  const TorusField k3 = h * nonlinearity(uh + 0.5 * k2, lambda);
  const TorusField k4 = h * nonlinearity(free_propagate(u, h) + free_propagate(k3, h / 2), lambda);
  TorusField out = free_propagate(u, h);
  out += (1.0 / 6.0) * free_propagate(k1, h);
  out += (1.0 / 3.0) * free_propagate(k2 + k3, h / 2);
  out += (1.0 / 6.0) * k4;
  return out;
}

}  // namespace

TorusField nls_step(const TorusField& u, double lambda, double h, Integrator integrator) {
  if (integrator == Integrator::integrating_factor_rk4) return lawson_rk4(u, lambda, h);
  TorusField v = free_propagate(u, h / 2);
  v = nonlinear_substep(v, lambda, h);
  return free_propagate(v, h / 2);
}

std::vector<TorusField> nls_evolve(const TorusField& phi, const NlsParams& params,
                                   std::span<const double> sample_times) {
  params.validate();
  const double h1_initial = sobolev_norm(phi, 1.0);
  const double limit = params.blowup_factor * std::max(h1_initial, 1e-300);
  std::vector<TorusField> out;
  out.reserve(sample_times.size());
  TorusField u = phi;
  double now = 0.0;
  for (double target : sample_times) {
    if (!std::isfinite(target)) throw ConfigError("sample times must be finite");
    const double span = target - now;
    const long steps = span == 0.0 ? 0 : static_cast<long>(std::ceil(std::abs(span) / params.dt - 1e-9));
    const double h = steps > 0 ? span / double(steps) : 0.0;
    for (long s = 0; s < steps; ++s) {
      u = nls_step(u, params.lambda, h, params.integrator);
      const double h1 = sobolev_norm(u, 1.0);
      if (!std::isfinite(h1) || h1 > limit)
        throw GuardError("H^1 norm exceeded " + std::to_string(params.blowup_factor) +
                         " times its initial value at t=" + std::to_string(now + (s + 1) * h));
    }
    now = target;
    out.push_back(u);
  }
  return out;
}

std::vector<double> uniform_times(double t_final, int steps) {
  if (steps < 1) throw ConfigError("need at least one time step");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) t[std::size_t(i)] = t_final * i / steps;
  return t;
}

Conserved conserved_quantities(const TorusField& u, double lambda) {
  Conserved c;
  const double l2 = l2_norm(u);
  c.mass = l2 * l2;
  double grad = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) grad += u.lattice().norm_sq(i) * std::norm(u[i]);
  grad /= kCellVolume;
  const double quartic = lambda == 0.0 ? 0.0 : lp_integral(u, 4, u.lattice().padded_grid());
  c.energy = grad + 0.5 * lambda * quartic;
  return c;
}

}  // namespace gph
