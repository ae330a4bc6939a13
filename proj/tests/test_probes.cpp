#include <doctest.h>

#include <cmath>

#include "gph/errors.hpp"
#include "gph/nls.hpp"
#include "gph/probes.hpp"
#include "gph/random.hpp"

using namespace gph;

namespace {

TorusField half_space_field(const ModeLattice& lat, std::uint64_t stream, bool positive) {
  const CounterRng rng(4, stream);
  TorusField f(lat);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int nx = lat.mode(i)[0];
    if (positive ? nx >= 1 : nx <= 0) f[i] = rng.complex_normal(i);
  }
  return normalized(f);
}

}  // namespace

TEST_CASE("Gauss-Legendre rule") {
  std::vector<double> t, w;
  gauss_legendre({0.0, 1.0}, {64, 3}, t, w);
  REQUIRE(t.size() == 192);
  double i0 = 0, i5 = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    i0 += w[k];
    i5 += w[k] * std::pow(t[k], 5);
  }
  CHECK(i0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(i5 == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK_THROWS_AS(gauss_legendre({1.0, 0.0}, {}, t, w), ConfigError);
}

TEST_CASE("trilinear probe closed forms") {
  const auto lat = make_lattice(2);
  const cplx c(0.3, 0.1);
  const TorusField k = TorusField::constant(lat, c);
  const TimeInterval I{0.0, 1.0};
  const double expect = std::pow(std::abs(c), 3) * std::pow(kTwoPi, 1.5);
  CHECK(trilinear_lhs(k, k, k, {1, 1, 1}, I, {}) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(trilinear_rhs(k, k, k, {1, 1, 1}, 0.1) == doctest::Approx(std::pow(std::abs(c), 3) * std::pow(kTwoPi, 4.5)).epsilon(1e-12));
  const TorusField p = TorusField::plane_wave(lat, {1, 0, 0}, 0.5);
  CHECK(trilinear_lhs(p, p, p, {1, 1, 1}, I, {}) == doctest::Approx(0.125 * std::pow(kTwoPi, 1.5)).epsilon(1e-12));

  const auto big = make_lattice(4);
  const TorusField f1 = random_shell_field(big, 2, 9, 0), f2 = random_shell_field(big, 1, 9, 1),
                   f3 = random_shell_field(big, 1, 9, 2);
  const double r = trilinear_lhs(f1, f2, f3, {2, 1, 1}, I, {}) / trilinear_rhs(f1, f2, f3, {2, 1, 1}, 0.05);
  const TorusField f1x2 = 2.0 * f1;
  const double r2 = trilinear_lhs(f1x2, f2, f3, {2, 1, 1}, I, {}) / trilinear_rhs(f1x2, f2, f3, {2, 1, 1}, 0.05);
  CHECK(r2 == doctest::Approx(r).epsilon(1e-12));
  CHECK(trilinear_lhs(f1x2, f2, f3, {2, 1, 1}, I, {}) ==
        doctest::Approx(2 * trilinear_lhs(f1, f2, f3, {2, 1, 1}, I, {})).epsilon(1e-12));

  // Time translation of the interval equals pre-evolving the data.
  const double shifted = trilinear_lhs(f1, f2, f3, {2, 1, 1}, {0.25, 0.75}, {});
  const double moved = trilinear_lhs(free_propagate(f1, 0.25), free_propagate(f2, 0.25), free_propagate(f3, 0.25),
                                     {2, 1, 1}, {0.0, 0.5}, {});
  CHECK(shifted == doctest::Approx(moved).epsilon(1e-10));

  // rhs is nonincreasing in delta when max(N3/N1, 1/N2) < 1.
  const TorusField g1 = random_shell_field(big, 2, 10, 0), g2 = random_shell_field(big, 2, 10, 1),
                   g3 = random_shell_field(big, 1, 10, 2);
  double prev = trilinear_rhs(g1, g2, g3, {2, 2, 1}, 0.0);
  for (double d : {0.01, 0.1, 0.5, 1.0}) {
    const double cur = trilinear_rhs(g1, g2, g3, {2, 2, 1}, d);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("spacetime norms two ways") {
  const auto lat = make_lattice(3);
  const TorusField a = random_h1_field(lat, 5, 0), b = random_h1_field(lat, 5, 1), c = random_h1_field(lat, 5, 2);
  const SpacetimeFactor fs[3] = {{&a, false}, {&b, true}, {&c, false}};
  for (double s : {0.0, 0.5, 1.0}) {
    const double x = spacetime_product_norm(fs, s, {0.0, 1.0}, {16, 2});
    const double y = spacetime_product_norm_stacked(fs, s, {0.0, 1.0}, {16, 2});
    CHECK(std::abs(x - y) <= 1e-10 * x);
  }
  const auto q = check_quadrature(fs, {0.0, 1.0}, {64, 1});
  CHECK(q.frequency_span == 3 * 27);
  CHECK(q.resolved);
}

TEST_CASE("multilinear probe") {
  const auto lat = make_lattice(2);
  const TorusField p1 = TorusField::plane_wave(lat, {1, 0, 0}, 0.7), p2 = TorusField::plane_wave(lat, {0, 1, 0}, 0.4),
                   p3 = TorusField::plane_wave(lat, {0, 0, -1}, 0.2);
  const TimeInterval I{0.0, 0.5};
  CHECK(multilinear_lhs(p1, p2, p3, 0.0, I, {}) ==
        doctest::Approx(0.7 * 0.4 * 0.2 * std::pow(kTwoPi, 1.5) * std::sqrt(0.5)).epsilon(1e-12));
  // Output frequency (1,-1,-1) has |m| = sqrt 3.
  CHECK(multilinear_lhs(p1, p2, p3, 1.0, I, {}) ==
        doctest::Approx(std::sqrt(3.0) * 0.7 * 0.4 * 0.2 * std::pow(kTwoPi, 1.5) * std::sqrt(0.5)).epsilon(1e-12));

  const auto big = make_lattice(3);
  const TorusField f1 = half_space_field(big, 0, true), f2 = half_space_field(big, 1, false),
                   f3 = half_space_field(big, 2, true);
  CHECK(multilinear_lhs(f1, f2, f3, 1.0, {0, 1}, {}) >= multilinear_lhs(f1, f2, f3, 0.0, {0, 1}, {}));

  MultilinearConfig cfg;
  cfg.cutoff = 3;
  cfg.samples = 8;
  const ProbeReport r = multilinear_probe(cfg);
  CHECK(r.samples.size() == 8);
  CHECK(r.max_ratio >= r.max_ratio_half);
  for (const auto& s : r.samples) CHECK(s.ratio > 0.0);
  cfg.s = 1.5;
  CHECK_THROWS_AS(multilinear_probe(cfg), ConfigError);
}

TEST_CASE("Sobolev probe") {
  const auto lat = make_lattice(4);
  const TorusField k = TorusField::constant(lat, {0.2, -0.4});
  CHECK(std::abs(sobolev_ratio(k) - 1.0 / kTwoPi) < 1e-12);
  const TorusField f = random_h1_field(lat, 3, 3);
  CHECK(sobolev_ratio(3.5 * f) == doctest::Approx(sobolev_ratio(f)).epsilon(1e-12));
  SobolevConfig cfg;
  cfg.cutoff = 4;
  cfg.samples = 20;
  const ProbeReport a = sobolev_probe(cfg);
  const ProbeReport b = sobolev_probe(cfg);
  CHECK(a.max_ratio == b.max_ratio);
}

TEST_CASE("trilinear sweep report") {
  TrilinearConfig cfg;
  cfg.cutoff = 4;
  cfg.sweep = {{1, 1, 1}, {2, 1, 1}};
  cfg.samples = 4;
  cfg.quadrature = {16, 1};
  const ProbeReport r = trilinear_probe(cfg);
  CHECK(r.samples.size() == 2 * 4 * cfg.delta_grid.size());
  CHECK(r.sweep.size() == 2 * cfg.delta_grid.size());
  CHECK(r.growth_slopes.size() == cfg.delta_grid.size());
  CHECK((r.trend == "consistent" || r.trend == "inconsistent"));
  cfg.sweep = {{4, 1, 1}};
  CHECK_THROWS_AS(trilinear_probe(cfg), ConfigError);
  cfg.sweep = {{1, 2, 1}};
  CHECK_THROWS_AS(trilinear_probe(cfg), ConfigError);
  cfg.sweep = {{3, 1, 1}};
  CHECK_THROWS_AS(trilinear_probe(cfg), ConfigError);
}
