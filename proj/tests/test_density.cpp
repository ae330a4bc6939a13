#include <doctest.h>

#include <cmath>

#include "gph/collision.hpp"
#include "gph/density_matrix.hpp"
#include "gph/errors.hpp"
#include "gph/nls.hpp"
#include "gph/random.hpp"

using namespace gph;

namespace {

DensityMatrix random_hermitian(const ModeLattice& lat, int k, std::uint64_t seed) {
  DensityMatrix g(lat, k);
  RngStream rng(seed, 0);
  for (Eigen::Index c = 0; c < g.dim(); ++c)
    for (Eigen::Index r = 0; r < g.dim(); ++r) g.coeffs()(r, c) = rng.complex_normal();
  g.coeffs() = 0.5 * (g.coeffs() + g.coeffs().adjoint()).eval();
  return g;
}

DensityMatrix symmetrize(const DensityMatrix& g) {
  if (g.order() != 2) return g;
  const int sw[2] = {1, 0};
  return 0.5 * (g + permute_slots(g, sw));
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("factorized states") {
  const auto lat = make_lattice(1);
  const TorusField phi = random_smooth_field(lat, 1, 0);
  const DensityMatrix g1 = factorized_state(phi, 1);
  CHECK(std::abs(trace(g1) - 1.0) < 1e-13);
  CHECK(trace_norm(g1) == doctest::Approx(1.0).epsilon(1e-12));
  const DensityMatrix g2 = factorized_state(phi, 2);
  const Eigen::VectorXd ev = operator_eigenvalues(g2);
  CHECK(ev(ev.size() - 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev.head(ev.size() - 1).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(hermiticity_defect(g2) < 1e-12);
  CHECK(symmetry_defect(g2) < 1e-12);
  const DensityMatrix pw = factorized_state(TorusField::plane_wave(lat, {1, 0, 0}), 2);
  CHECK((pw.coeffs().array().abs() > 0).count() == 1);
}

TEST_CASE("partial trace") {
  const auto lat = make_lattice(1);
  const TorusField phi = 0.7 * random_smooth_field(lat, 2, 0);
  const double n2 = std::pow(l2_norm(phi), 2);
  const DensityMatrix p = partial_trace(factorized_state(phi, 2), 1);
  CHECK(max_abs(p.coeffs() - n2 * factorized_state(phi, 1).coeffs()) < 1e-12 * max_abs(p.coeffs()));
  const DensityMatrix h = random_hermitian(lat, 2, 5);
  // Independent double contraction.
  cplx direct{};
  for (Eigen::Index i = 0; i < h.dim(); ++i) direct += h.coeffs()(i, i);
  direct /= kCellVolume * kCellVolume;
  CHECK(std::abs(trace(partial_trace(h, 1)) - direct) < 1e-12 * std::abs(direct) + 1e-15);
  CHECK_THROWS_AS(partial_trace(h, 2), ConfigError);
  const TorusField u = random_smooth_field(lat, 3, 0);
  CHECK(max_abs(partial_trace(factorized_state(u, 2), 1).coeffs() - factorized_state(u, 1).coeffs()) <
        1e-12 * kCellVolume);
}

TEST_CASE("trace norm examples") {
  const auto lat = make_lattice(1);
  const TorusField a = normalized(TorusField::plane_wave(lat, {0, 1, 0}));
  const TorusField b = normalized(TorusField::plane_wave(lat, {1, 1, 0}));
  const DensityMatrix mix = 0.3 * outer(a, a) + 0.7 * outer(b, b);
  CHECK(std::abs(trace(mix) - 1.0) < 1e-13);
  CHECK(trace_norm(mix) == doctest::Approx(1.0).epsilon(1e-12));
  const DensityMatrix h = random_hermitian(lat, 1, 4);
  CHECK(std::abs(trace(-1.0 * h) + trace(h)) < 1e-14);
  CHECK(trace_norm(-1.0 * h) == doctest::Approx(trace_norm(h)).epsilon(1e-12));
  CHECK(trace_norm(h) >= std::abs(trace(h)));
}

TEST_CASE("Sobolev weights and free evolution") {
  const auto lat = make_lattice(1);
  const DensityMatrix h = random_hermitian(lat, 2, 7);
  CHECK(max_abs(sobolev_weight(h, 0).coeffs() - h.coeffs()) == 0.0);
  CHECK(max_abs(sobolev_weight(sobolev_weight(h, 0.4), 0.7).coeffs() - sobolev_weight(h, 1.1).coeffs()) <
        1e-12 * max_abs(sobolev_weight(h, 1.1).coeffs()));
  const TorusField phi = random_smooth_field(lat, 8, 0);
  for (int k = 1; k <= 2; ++k)
    CHECK(trace_norm(sobolev_weight(factorized_state(phi, k), 1.0)) ==
          doctest::Approx(std::pow(sobolev_norm(phi, 1.0), 2 * k)).epsilon(1e-10));
  CHECK(max_abs(free_evolve(h, 0).coeffs() - h.coeffs()) == 0.0);
  const TorusField pt = free_propagate(phi, 0.37);
  CHECK(max_abs(free_evolve(outer(phi, phi), 0.37).coeffs() - outer(pt, pt).coeffs()) < 1e-12 * kCellVolume);
  CHECK(trace_norm(free_evolve(h, 1.3)) == doctest::Approx(trace_norm(h)).epsilon(1e-10));
  CHECK(max_abs(free_evolve(sobolev_weight(h, 1), 0.2).coeffs() - sobolev_weight(free_evolve(h, 0.2), 1).coeffs()) <
        1e-12 * max_abs(sobolev_weight(h, 1).coeffs()));
  CHECK(hermiticity_defect(free_evolve(sobolev_weight(symmetrize(h), 1), 0.5)) < 1e-10);
  CHECK(symmetry_defect(free_evolve(sobolev_weight(symmetrize(h), 1), 0.5)) < 1e-10);
}

TEST_CASE("budget guard") {
  CHECK_THROWS_AS(DensityMatrix(make_lattice(4), 2), BudgetError);
  CHECK_THROWS_AS(DensityMatrix(make_lattice(1), 0), ConfigError);
}

TEST_CASE("hierarchy metrics") {
  const auto lat = make_lattice(1);
  const TorusField phi = random_smooth_field(lat, 9, 0);
  HierarchySequence g{factorized_state(phi, 1), factorized_state(phi, 2)};
  const HierarchyMetrics same = hierarchy_metrics(g, g);
  CHECK(same.h_minus == 0.0);
  CHECK(same.eta[0] == 0.0);
  CHECK(same.eta[1] == 0.0);
  HierarchySequence z{DensityMatrix(lat, 1), DensityMatrix(lat, 2)};
  HierarchySequence one = z;
  one[1].coeffs()(3, 5) = std::pow(kCellVolume, 2);
  CHECK(hierarchy_metrics(one, z).h_minus == doctest::Approx(0.25).epsilon(1e-14));
  const auto fam = eta_test_family(lat, 2);
  CHECK(fam.size() == 32);
  const HierarchyMetrics m = hierarchy_metrics(g, z);
  for (int k = 1; k <= 2; ++k) {
    const double tn = trace_norm(g[std::size_t(k - 1)]);
    double bound = 0;
    for (int l = 1; l <= 32; ++l) bound += std::ldexp(tn, -l);
    CHECK(m.eta[std::size_t(k - 1)] <= bound);
    CHECK(m.eta[std::size_t(k - 1)] > 0.0);
  }
  HierarchySequence bad{factorized_state(phi, 2)};
  CHECK_THROWS_AS(validate_sequence(bad), ShapeError);
}

TEST_CASE("collision agrees with a direct Fourier-sum oracle") {
  const auto lat = make_lattice(1);
  const DensityMatrix g = random_hermitian(lat, 2, 11);
  const DensityMatrix b = collision_apply(g, 1);
  const std::size_t L = lat.size();
  for (std::size_t p = 0; p < L; p += 5)
    for (std::size_t pp = 0; pp < L; pp += 3) {
      const Mode P = lat.mode(p), PP = lat.mode(pp);
      cplx acc{};
      for (std::size_t q = 0; q < L; ++q)
        for (std::size_t qp = 0; qp < L; ++qp) {
          const Mode Q = lat.mode(q), QP = lat.mode(qp);
          const long n = lat.find({P[0] - Q[0] + QP[0], P[1] - Q[1] + QP[1], P[2] - Q[2] + QP[2]});
          if (n >= 0) acc += g.coeffs()(Eigen::Index(std::size_t(n) * L + q), Eigen::Index(pp * L + qp));
          const long np = lat.find({PP[0] + Q[0] - QP[0], PP[1] + Q[1] - QP[1], PP[2] + Q[2] - QP[2]});
          if (np >= 0) acc -= g.coeffs()(Eigen::Index(p * L + q), Eigen::Index(std::size_t(np) * L + qp));
        }
      CHECK(std::abs(b.coeffs()(Eigen::Index(p), Eigen::Index(pp)) - acc / (kCellVolume * kCellVolume)) < 1e-13);
    }
  CHECK(std::abs(trace(b)) < 1e-10);
  CHECK(max_abs(b.coeffs() + b.coeffs().adjoint()) < 1e-12);
  CHECK_THROWS_AS(collision_apply(g, 2), ConfigError);
}

TEST_CASE("collision on factorized states gives the commutator kernel") {
  const auto lat = make_lattice(1);
  const TorusField phi = random_smooth_field(lat, 12, 0);
  const DensityMatrix b = collision_apply(factorized_state(phi, 2), 1);
  const DensityMatrix expect = commutator_kernel(phi);
  CHECK(max_abs(b.coeffs() - expect.coeffs()) < 1e-12 * max_abs(expect.coeffs()));
  const TorusField c = TorusField::constant(lat, 0.3);
  CHECK(max_abs(collision_apply(factorized_state(c, 2), 1).coeffs()) < 1e-16);
  CHECK(max_abs(full_collision(DensityMatrix(lat, 2)).coeffs()) == 0.0);
  CHECK(max_abs(full_collision(factorized_state(phi, 2)).coeffs() - b.coeffs()) == 0.0);
}
