#include "gph/hierarchy.hpp"

namespace gph {

void AtomicDeFinettiMeasure::validate() const {
  if (atoms.empty()) throw ConfigError("de Finetti measure needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0)) throw ConfigError("atom weights must be nonnegative");
    if (l2_norm(a.phi) > 1.0 + 1e-12) throw ConfigError("atoms must lie in the unit ball of L^2");
    if (!(a.phi.lattice() == atoms.front().phi.lattice())) throw ShapeError("atoms on different lattices");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("atom weights must sum to 1");
}

SeparableTrajectory definetti_trajectory(const AtomicDeFinettiMeasure& mu, const NlsParams& params,
                                         std::span<const double> times, int max_order) {
  mu.validate();
  if (max_order < 1) throw ConfigError("hierarchy order must be >= 1");
  SeparableTrajectory tr;
  tr.times.assign(times.begin(), times.end());
  tr.lambda = params.lambda;
  const ModeLattice& lat = mu.atoms.front().phi.lattice();
  std::vector<std::vector<TorusField>> paths;
  for (const auto& a : mu.atoms) paths.push_back(nls_evolve(a.phi, params, times));
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<SeparableDensityMatrix> row;
    std::vector<FieldPtr> fields;
    for (const auto& p : paths) fields.push_back(share(p[i]));
    for (int k = 1; k <= max_order; ++k) {
      SeparableDensityMatrix g(lat, k);
      for (std::size_t a = 0; a < fields.size(); ++a)
        g.add(mu.atoms[a].weight,
              ProductState(std::size_t(k), LowRankKernel::rank_one(fields[a], fields[a])));
      row.push_back(std::move(g));
    }
    tr.states.push_back(std::move(row));
  }
  return tr;
}

SeparableTrajectory factorized_trajectory(const TorusField& phi, const NlsParams& params,
                                          std::span<const double> times, int max_order) {
  AtomicDeFinettiMeasure mu{{{1.0, phi}}};
  if (l2_norm(phi) > 1.0 + 1e-12) {
    // Factorized trajectories are not restricted to the unit ball.
    SeparableTrajectory tr;
    tr.times.assign(times.begin(), times.end());
    tr.lambda = params.lambda;
    for (const auto& u : nls_evolve(phi, params, times)) {
      std::vector<SeparableDensityMatrix> row;
      for (int k = 1; k <= max_order; ++k) row.push_back(SeparableDensityMatrix::factorized(u, k));
      tr.states.push_back(std::move(row));
    }
    return tr;
  }
  return definetti_trajectory(mu, params, times, max_order);
}

SeparableDensityMatrix definetti_evolve(const AtomicDeFinettiMeasure& mu, double t, int k,
                                        const NlsParams& params) {
  const double ts[1] = {t};
  auto tr = definetti_trajectory(mu, params, ts, k);
  return tr.states[0][std::size_t(k - 1)];
}

namespace detail {

double uniform_step(std::span<const double> times) {
  if (times.size() < 2) return 0.0;
  const double h = (times.back() - times.front()) / double(times.size() - 1);
  if (!(h > 0.0)) throw ConfigError("sample times must increase");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[i - 1] - h) > 1e-9 * h) throw ConfigError("sample times must be uniform");
  return h;
}

void check_order(std::size_t available, int k, const char* what) {
  if (k < 1 || available < std::size_t(k))
    throw ConfigError(std::string(what) + " needs orders up to " + std::to_string(k));
}

}  // namespace detail

SeparableDensityMatrix factorized_collision_term(const TorusField& u, int k) {
  const FieldPtr up = share(u);
  const FieldPtr pt = share(psi_tilde(u));
  LowRankKernel comm(u.lattice());
  comm.add(1.0, pt, up);
  comm.add(-1.0, up, pt);
  const LowRankKernel plain = LowRankKernel::rank_one(up, up);
  SeparableDensityMatrix out(u.lattice(), k);
  for (int j = 0; j < k; ++j) {
    ProductState s(std::size_t(k), plain);
    s[std::size_t(j)] = comm;
    out.add(1.0, std::move(s));
  }
  return out;
}

}  // namespace gph
