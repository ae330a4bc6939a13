#include <doctest.h>

#include <cmath>
#include <random>

#include "gph/errors.hpp"
#include "gph/torus.hpp"

using namespace gph;

namespace {

TorusField random_field(const ModeLattice& lat, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  TorusField f(lat);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {nd(gen), nd(gen)};
  return f;
}

// Direct evaluation of (2pi)^-3 sum f_hat(n) e^{i n.x}, used as an oracle.
cplx evaluate(const TorusField& f, double x, double y, double z) {
  cplx acc{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode n = f.lattice().mode(i);
    acc += f[i] * std::exp(kI * (n[0] * x + n[1] * y + n[2] * z));
  }
  return acc / kCellVolume;
}

}  // namespace

TEST_CASE("lattice sizes and ordering") {
  CHECK(make_lattice(1).size() == 27);
  CHECK(make_lattice(2).size() == 125);
  CHECK(make_lattice(8).size() == 4913);
  CHECK_THROWS_AS(make_lattice(0), ConfigError);
  CHECK_THROWS_AS(make_lattice(65), ConfigError);
  const auto lat = make_lattice(3);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const Mode n = lat.mode(i);
    CHECK(lat.index(n) == i);
    CHECK(lat.index({-n[0], -n[1], -n[2]}) == lat.negated(i));
  }
  CHECK(lat.find({4, 0, 0}) == -1);
}

TEST_CASE("plane waves and constants transform to single coefficients") {
  const auto lat = make_lattice(2);
  GridField g(lat.padded_grid());
  const double h = kTwoPi / g.points();
  for (int a = 0; a < g.points(); ++a)
    for (int b = 0; b < g.points(); ++b)
      for (int c = 0; c < g.points(); ++c)
        g[(std::size_t(a) * g.points() + b) * g.points() + c] = std::exp(kI * (a * h));
  const TorusField f = to_modes(g, lat);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const cplx expect = lat.mode(i) == Mode{1, 0, 0} ? cplx(kCellVolume) : cplx{};
    CHECK(std::abs(f[i] - expect) < 1e-10);
  }
  const TorusField one = to_modes(to_grid(TorusField::constant(lat, 1.0)), lat);
  CHECK(std::abs(one[lat.index({0, 0, 0})] - kCellVolume) < 1e-10);
}

TEST_CASE("grid values match direct summation and round trip is exact") {
  const auto lat = make_lattice(3);
  const TorusField f = random_field(lat, 7);
  const GridField g = to_grid(f, 9);
  const double h = kTwoPi / 9;
  for (int j : {0, 5, 17, 400}) {
    const int a = j / 81, b = (j / 9) % 9, c = j % 9;
    CHECK(std::abs(g[j] - evaluate(f, a * h, b * h, c * h)) < 1e-12);
  }
  for (int pts : {7, 14, 20}) {
    const TorusField back = to_modes(to_grid(f, pts), lat);
    double err = 0, scale = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      err = std::max(err, std::abs(back[i] - f[i]));
      scale = std::max(scale, std::abs(f[i]));
    }
    CHECK(err / scale < 1e-12);
  }
  CHECK_THROWS_AS(to_grid(f, 6), ShapeError);
  CHECK_THROWS_AS(TorusField(lat, std::vector<cplx>(3)), ShapeError);
}

TEST_CASE("Plancherel") {
  const auto lat = make_lattice(4);
  const TorusField f = random_field(lat, 11);
  const double grid = lp_integral(f, 2);
  const double l2 = l2_norm(f);
  CHECK(std::abs(grid - l2 * l2) / (l2 * l2) < 1e-12);
}

TEST_CASE("triple product matches brute-force convolution") {
  const auto lat = make_lattice(1);
  const TorusField a = random_field(lat, 1), b = random_field(lat, 2), c = random_field(lat, 3);
  const TorusField p = triple_product(a, b, c);
  const TorusField bc = b.conj();
  for (std::size_t out = 0; out < lat.size(); ++out) {
    const Mode n = lat.mode(out);
    cplx acc{};
    for (std::size_t i = 0; i < lat.size(); ++i)
      for (std::size_t j = 0; j < lat.size(); ++j) {
        const Mode m1 = lat.mode(i), m2 = lat.mode(j);
        const Mode m3{n[0] - m1[0] - m2[0], n[1] - m1[1] - m2[1], n[2] - m1[2] - m2[2]};
        const long k = lat.find(m3);
        if (k >= 0) acc += a[i] * bc[j] * c[std::size_t(k)];
      }
    CHECK(std::abs(p[out] - acc / (kCellVolume * kCellVolume)) < 1e-9 * std::abs(acc) / 3e3 + 1e-9);
  }
}

TEST_CASE("Littlewood-Paley projections") {
  const auto lat = make_lattice(8);
  CHECK(max_dyadic(lat) == 16);
  const TorusField zero_mode = TorusField::plane_wave(lat, {0, 0, 0});
  CHECK(lp_project(zero_mode, 1) == zero_mode);
  const TorusField four = TorusField::plane_wave(lat, {4, 0, 0});
  CHECK(l2_norm(lp_project(four, 1)) == 0.0);
  CHECK_THROWS_AS(lp_project(four, 3), ConfigError);
  CHECK_THROWS_AS(lp_project(four, 32), ConfigError);
  double worst = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double xi = std::sqrt(double(lat.norm_sq(i)));
    double sum = 0;
    for (int n = 1; n <= max_dyadic(lat); n *= 2) sum += lp_multiplier(n, xi);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  CHECK(worst < 1e-12);
  for (double r = 0; r < 3; r += 0.01) {
    CHECK(smooth_cutoff(r) >= 0.0);
    CHECK(smooth_cutoff(r) <= 1.0);
    CHECK(smooth_cutoff(r + 0.01) <= smooth_cutoff(r));
  }
}

TEST_CASE("Sobolev norms") {
  const auto lat = make_lattice(3);
  const TorusField e1 = TorusField::plane_wave(lat, {1, 0, 0});
  CHECK(sobolev_norm(e1, 1) == doctest::Approx(std::sqrt(2.0) * l2_norm(e1)).epsilon(1e-14));
  const TorusField f = random_field(lat, 5);
  CHECK(sobolev_norm(f, 0) == doctest::Approx(l2_norm(f)).epsilon(1e-14));
  double prev = 0;
  for (double s = -1; s <= 2; s += 0.25) {
    const double v = sobolev_norm(f, s);
    CHECK(v >= prev);
    prev = v;
  }
  TorusField bad = f;
  bad[3] = cplx(std::nan(""), 0);
  CHECK_THROWS_AS(sobolev_norm(bad, 1), NumericError);
  CHECK_THROWS_AS(sobolev_norm(f, INFINITY), NumericError);
}
