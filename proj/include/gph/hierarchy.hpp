#pragma once

// Numerical checks of the GP hierarchy on candidate trajectories: differential
// residual, mild (Duhamel) defect, de Finetti mixtures and growth bounds.
// The checks are templates over the density-matrix type so they run on both
// DensityMatrix and SeparableDensityMatrix.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gph/collision.hpp"
#include "gph/density_matrix.hpp"
#include "gph/errors.hpp"
#include "gph/nls.hpp"
#include "gph/separable.hpp"

namespace gph {

struct Atom {
  double weight;
  TorusField phi;
};

/// Finite atomic probability measure on the unit ball of L^2.
struct AtomicDeFinettiMeasure {
  std::vector<Atom> atoms;
  /// Throws ConfigError unless weights are >= 0 and sum to 1 (within 1e-12)
  /// and every ||phi_i|| <= 1 (within 1e-12).
  void validate() const;
};

/// Density matrices of orders 1..K+1 at each sample time.
template <class Dm>
struct HierarchyTrajectory {
  std::vector<double> times;
  std::vector<std::vector<Dm>> states;
  double lambda = 1.0;
};

using SeparableTrajectory = HierarchyTrajectory<SeparableDensityMatrix>;
using DenseTrajectory = HierarchyTrajectory<DensityMatrix>;

/// sum_i p_i |S_t phi_i><S_t phi_i|^{tensor k} at the given times, orders 1..max_order.
SeparableTrajectory definetti_trajectory(const AtomicDeFinettiMeasure& mu, const NlsParams& params,
                                         std::span<const double> times, int max_order);
SeparableTrajectory factorized_trajectory(const TorusField& phi, const NlsParams& params,
                                          std::span<const double> times, int max_order);
SeparableDensityMatrix definetti_evolve(const AtomicDeFinettiMeasure& mu, double t, int k,
                                        const NlsParams& params);
/// gamma(t) = U(t) gamma_0 for every order.
template <class Dm>
HierarchyTrajectory<Dm> free_trajectory(const std::vector<Dm>& initial, std::span<const double> times) {
  HierarchyTrajectory<Dm> tr;
  tr.times.assign(times.begin(), times.end());
  tr.lambda = 0.0;
  for (double t : times) {
    std::vector<Dm> row;
    for (const auto& g : initial) row.push_back(free_evolve(g, t));
    tr.states.push_back(std::move(row));
  }
  return tr;
}

namespace detail {
/// Uniform spacing of the grid; throws ConfigError if not uniform.
double uniform_step(std::span<const double> times);
void check_order(std::size_t available, int k, const char* what);
}  // namespace detail

struct TimedValue {
  double t;
  double value;
};

/// HS norm of  i d/dt gamma^(k) + (Lap - Lap') gamma^(k) - lambda B_{k+1} gamma^(k+1)
/// at every interior sample, with central differences in time.
template <class Dm>
std::vector<TimedValue> gp_residual(const HierarchyTrajectory<Dm>& tr, int k) {
  if (tr.times.size() < 3) throw ConfigError("gp_residual needs at least 3 time samples");
  const double h = detail::uniform_step(tr.times);
  std::vector<TimedValue> out;
  for (std::size_t i = 1; i + 1 < tr.times.size(); ++i) {
    detail::check_order(tr.states[i].size(), k + 1, "gp_residual");
    const auto& now = tr.states[i];
    Dm r = cplx(0.0, 0.5 / h) * (tr.states[i + 1][std::size_t(k - 1)] - tr.states[i - 1][std::size_t(k - 1)]);
    r += laplacian_commutator(now[std::size_t(k - 1)]);
    if (tr.lambda != 0.0) r -= cplx(tr.lambda) * full_collision(now[std::size_t(k)]);
    out.push_back({tr.times[i], hs_norm(r)});
  }
  return out;
}

enum class Quadrature { trapezoid, simpson };

/// HS norm of gamma^(k)(t) - U(t) gamma^(k)(0) + i lambda \int_0^t U(t-s) B gamma^(k+1)(s) ds
/// at t = times[index], with the integral over `subintervals` equal pieces
/// whose nodes must be sample times. times[0] must be 0.
template <class Dm>
double duhamel_defect(const HierarchyTrajectory<Dm>& tr, int k, std::size_t index, int subintervals,
                      Quadrature rule = Quadrature::simpson) {
  if (tr.times.empty() || tr.times.front() != 0.0) throw ConfigError("trajectory must start at t=0");
  if (index >= tr.times.size()) throw ConfigError("time index out of range");
  const auto& at = tr.states[index];
  detail::check_order(at.size(), k + 1, "duhamel_defect");
  const double t = tr.times[index];
  Dm d = at[std::size_t(k - 1)] - free_evolve(tr.states[0][std::size_t(k - 1)], t);
  if (index == 0 || tr.lambda == 0.0) return hs_norm(d);
  if (subintervals < 1 || index % std::size_t(subintervals) != 0)
    throw ConfigError("quadrature nodes must fall on sample times (index " + std::to_string(index) +
                      " not divisible by " + std::to_string(subintervals) + ")");
  if (rule == Quadrature::simpson && subintervals % 2 != 0)
    throw ConfigError("Simpson's rule needs an even number of subintervals");
  detail::uniform_step(std::span(tr.times).first(index + 1));
  const std::size_t stride = index / std::size_t(subintervals);
  const double h = t / subintervals;
  for (int j = 0; j <= subintervals; ++j) {
    double w = h;
    if (rule == Quadrature::trapezoid) {
      if (j == 0 || j == subintervals) w = h / 2;
    } else {
      w = (j == 0 || j == subintervals) ? h / 3 : (j % 2 ? 4 * h / 3 : 2 * h / 3);
    }
    const std::size_t s = std::size_t(j) * stride;
    detail::check_order(tr.states[s].size(), k + 1, "duhamel_defect");
    d += cplx(0.0, tr.lambda * w) * free_evolve(full_collision(tr.states[s][std::size_t(k)]), t - tr.times[s]);
  }
  return hs_norm(d);
}

struct GrowthReport {
  std::vector<double> values;  ///< Tr |S^{(k,alpha)} gamma^(k)|, k = 1..K
  double minimal_bound = 0.0;  ///< max_k values_k^{1/(2k)}
  bool holds = false;          ///< all values <= bound_guess^{2k}
};

template <class Dm>
GrowthReport growth_bound_check(const std::vector<Dm>& seq, double alpha, double bound_guess) {
  if (alpha < 0.0) throw ConfigError("growth bound needs alpha >= 0");
  GrowthReport r;
  r.holds = true;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (seq[i].order() != k) throw ShapeError("hierarchy orders must be consecutive from 1");
    const double v = trace_norm(sobolev_weight(seq[i], alpha));
    r.values.push_back(v);
    r.minimal_bound = std::max(r.minimal_bound, std::pow(v, 1.0 / (2 * k)));
    if (v > std::pow(bound_guess, 2 * k) * (1 + 1e-12)) r.holds = false;
  }
  return r;
}

/// Sum over slots j of |psi~><u| - |u><psi~| in slot j, u^{tensor} elsewhere,
/// psi~ = P(|u|^2 u): the right-hand side of the hierarchy on factorized states.
SeparableDensityMatrix factorized_collision_term(const TorusField& u, int k);

}  // namespace gph
