#include <doctest.h>

#include <cmath>

#include "gph/errors.hpp"
#include "gph/nls.hpp"
#include "gph/random.hpp"

using namespace gph;

namespace {
double max_diff(const TorusField& a, const TorusField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
}  // namespace

TEST_CASE("free propagator") {
  const auto lat = make_lattice(4);
  const TorusField f = random_smooth_field(lat, 3, 0, 2.0);
  CHECK(free_propagate(f, 0.0) == f);
  const TorusField e1 = TorusField::plane_wave(lat, {1, 0, 0});
  const TorusField p = free_propagate(e1, 0.7);
  CHECK(std::abs(p[lat.index({1, 0, 0})] - kCellVolume * std::polar(1.0, -0.7)) < 1e-12);
  for (double s : {0.0, 1.0})
    CHECK(sobolev_norm(free_propagate(f, 2.3), s) == doctest::Approx(sobolev_norm(f, s)).epsilon(1e-14));
  CHECK(max_diff(free_propagate(free_propagate(f, 0.3), 0.4), free_propagate(f, 0.7)) < 1e-12);
}

TEST_CASE("constant solution has the closed-form phase") {
  const auto lat = make_lattice(2);
  const TorusField phi = TorusField::constant(lat, std::pow(kTwoPi, -1.5));
  for (double lambda : {1.0, -1.0}) {
    NlsParams p;
    p.lambda = lambda;
    const std::vector<double> ts{0.25, 0.5, 1.0};
    const auto traj = nls_evolve(phi, p, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const TorusField exact = std::polar(1.0, -lambda * ts[i] / kCellVolume) * phi;
      CHECK(max_diff(traj[i], exact) / kCellVolume < 1e-10);
    }
  }
}

TEST_CASE("single mode keeps constant modulus") {
  const auto lat = make_lattice(2);
  const TorusField phi = TorusField::plane_wave(lat, {1, -1, 0}, 0.3);
  NlsParams p;
  const std::vector<double> ts{0.2, 0.6};
  for (const auto& u : nls_evolve(phi, p, ts)) {
    const GridField g = to_grid(u);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(std::abs(g[i]) - 0.3) < 1e-12);
  }
}

TEST_CASE("conservation for random data") {
  const auto lat = make_lattice(4);
  const TorusField phi = random_smooth_field(lat, 42, 0);
  NlsParams p;
  const auto ts = uniform_times(1.0, 10);
  const auto traj = nls_evolve(phi, p, ts);
  const Conserved c0 = conserved_quantities(phi, 1.0);
  for (const auto& u : traj) {
    const Conserved c = conserved_quantities(u, 1.0);
    CHECK(std::abs(c.mass - c0.mass) < 1e-12);
    CHECK(std::abs(c.energy - c0.energy) < 1e-6);
  }
}

TEST_CASE("conserved quantity examples") {
  const auto lat = make_lattice(2);
  const double a = std::pow(kTwoPi, -1.5);
  CHECK(conserved_quantities(TorusField::constant(lat, a), 1.0).mass == doctest::Approx(1.0));
  const Conserved z = conserved_quantities(TorusField(lat), 1.0);
  CHECK(z.mass == 0.0);
  CHECK(z.energy == 0.0);
  const Conserved e = conserved_quantities(TorusField::plane_wave(lat, {1, 0, 0}, a), 0.0);
  CHECK(e.mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.energy == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("time reversal and second-order convergence") {
  const auto lat = make_lattice(4);
  const TorusField phi = random_smooth_field(lat, 9, 0);
  NlsParams p;
  p.dt = 1e-2;
  const std::vector<double> fwd{0.5}, bwd{-0.5};
  const TorusField a = nls_evolve(phi.conj(), p, fwd)[0].conj();
  const TorusField b = nls_evolve(phi, p, bwd)[0];
  CHECK(max_diff(a, b) < 1e-12 * kCellVolume);

  p.integrator = Integrator::integrating_factor_rk4;
  p.dt = 1e-3;
  const TorusField ref = nls_evolve(phi, p, fwd)[0];
  p.integrator = Integrator::split_step_strang;
  double prev = 0;
  for (double dt : {0.1, 0.05, 0.025}) {
    p.dt = dt;
    const double err = max_diff(nls_evolve(phi, p, fwd)[0], ref);
    if (prev > 0) CHECK(prev / err >= 3.5);
    prev = err;
  }
}

TEST_CASE("parameter validation and blow-up guard") {
  NlsParams p;
  p.lambda = 2;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.lambda = -1;
  p.dt = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  const auto lat = make_lattice(1);
  const TorusField big = TorusField::constant(lat, 1.0);
  p.dt = 1e-3;
  p.blowup_factor = 1.0000001;
  const TorusField bumpy = big + TorusField::plane_wave(lat, {1, 0, 0}, 0.5);
  const std::vector<double> ts{1.0};
  CHECK_THROWS_AS(nls_evolve(bumpy, p, ts), GuardError);
}
