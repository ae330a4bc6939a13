#include "gph/torus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "gph/errors.hpp"

namespace gph {

using detail::wrap;

ModeLattice::ModeLattice(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 1 || cutoff > kMaxCutoff)
    throw ConfigError("mode cutoff M must lie in [1, 64], got " + std::to_string(cutoff));
}

double ModeLattice::bracket(std::size_t index) const noexcept {
  return std::sqrt(1.0 + norm_sq(index));
}

ModeLattice make_lattice(int cutoff) { return ModeLattice(cutoff); }

TorusField::TorusField(const ModeLattice& lattice)
    : lattice_(lattice), coeffs_(lattice.size(), cplx{}) {}

TorusField::TorusField(const ModeLattice& lattice, std::vector<cplx> coeffs)
    : lattice_(lattice), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != lattice_.size())
    throw ShapeError("coefficient vector has " + std::to_string(coeffs_.size()) +
                     " entries, lattice has " + std::to_string(lattice_.size()));
}

TorusField TorusField::plane_wave(const ModeLattice& lattice, const Mode& n, cplx amplitude) {
  if (!lattice.contains(n)) throw ShapeError("plane wave mode outside the lattice");
  TorusField f(lattice);
  f[lattice.index(n)] = amplitude * kCellVolume;
  return f;
}

TorusField TorusField::constant(const ModeLattice& lattice, cplx c) {
  return plane_wave(lattice, {0, 0, 0}, c);
}

TorusField& TorusField::operator+=(const TorusField& other) {
  if (!(lattice_ == other.lattice_)) throw ShapeError("lattice mismatch in field sum");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

TorusField& TorusField::operator-=(const TorusField& other) {
  if (!(lattice_ == other.lattice_)) throw ShapeError("lattice mismatch in field difference");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

TorusField& TorusField::operator*=(cplx s) noexcept {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

TorusField TorusField::conj() const {
  TorusField out(lattice_);
  const std::size_t n = coeffs_.size();
  for (std::size_t i = 0; i < n; ++i) out.coeffs_[i] = std::conj(coeffs_[n - 1 - i]);
  return out;
}

TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
TorusField operator*(cplx s, TorusField a) { return a *= s; }

cplx inner_product(const TorusField& f, const TorusField& g) {
  if (!(f.lattice() == g.lattice())) throw ShapeError("lattice mismatch in inner product");
  cplx acc{};
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::conj(f[i]) * g[i];
  return acc / kCellVolume;
}

double l2_norm(const TorusField& f) {
  double acc = 0.0;
  for (const auto& c : f.coeffs()) acc += std::norm(c);
  return std::sqrt(acc / kCellVolume);
}

TorusField normalized(const TorusField& f) {
  const double n = l2_norm(f);
  if (!std::isfinite(n)) throw NumericError("non-finite field cannot be normalised");
  if (n == 0.0) throw NumericError("zero field cannot be normalised");
  return (1.0 / n) * f;
}

GridField::GridField(int points) : points_(points) {
  if (points < 1) throw ShapeError("grid must have at least one point per axis");
  const auto p = static_cast<std::size_t>(points);
  values_.assign(p * p * p, cplx{});
}

double GridField::cell_measure() const noexcept {
  const double h = kTwoPi / points_;
  return h * h * h;
}

namespace {

void check_resolves(int points, const ModeLattice& lattice) {
  if (points < lattice.side())
    throw ShapeError("grid of " + std::to_string(points) +
                     " points cannot resolve cutoff M=" + std::to_string(lattice.cutoff()));
}

std::size_t grid_index(const Mode& n, int points) {
  const auto p = static_cast<std::size_t>(points);
  return (static_cast<std::size_t>(wrap(n[0], points)) * p +
          static_cast<std::size_t>(wrap(n[1], points))) *
             p +
         static_cast<std::size_t>(wrap(n[2], points));
}

}  // namespace

GridField to_grid(const TorusField& f, int points) {
  const ModeLattice& lat = f.lattice();
  if (points == 0) points = lat.padded_grid();
  check_resolves(points, lat);
  GridField g(points);
  auto v = g.values();
  for (std::size_t i = 0; i < f.size(); ++i) v[grid_index(lat.mode(i), points)] = f[i];
  detail::fft3(points).backward(v);
  for (auto& x : v) x /= kCellVolume;
  return g;
}

TorusField to_modes(const GridField& g, const ModeLattice& lattice) {
  check_resolves(g.points(), lattice);
  std::vector<cplx> work(g.values().begin(), g.values().end());
  detail::fft3(g.points()).forward(work);
  const double w = g.cell_measure();
  TorusField f(lattice);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = w * work[grid_index(lattice.mode(i), g.points())];
  return f;
}

TorusField triple_product(const TorusField& a, const TorusField& b, const TorusField& c) {
  if (!(a.lattice() == b.lattice()) || !(a.lattice() == c.lattice()))
    throw ShapeError("lattice mismatch in triple product");
  const int pts = a.lattice().padded_grid();
  GridField ga = to_grid(a, pts);
  const GridField gb = to_grid(b, pts);
  const GridField gc = to_grid(c, pts);
  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = ga[i] * std::conj(gb[i]) * gc[i];
  return to_modes(ga, a.lattice());
}

TorusField cubic_term(const TorusField& f) {
  const int pts = f.lattice().padded_grid();
  GridField g = to_grid(f, pts);
  for (auto& x : g.values()) x *= std::norm(x);
  return to_modes(g, f.lattice());
}

TorusField multiply_by_grid(const TorusField& a, const GridField& g) {
  if (g.points() != a.lattice().padded_grid())
    throw ShapeError("multiplier must live on the padded grid");
  GridField ga = to_grid(a, g.points());
  for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= g[i];
  return to_modes(ga, a.lattice());
}

double lp_integral(const TorusField& f, int p, int points) {
  if (p < 1) throw ConfigError("L^p exponent must be >= 1");
  if (points == 0) points = p * f.lattice().cutoff() + 1;
  points = std::max(points, f.lattice().side());
  const GridField g = to_grid(f, points);
  double acc = 0.0;
  for (const auto& x : g.values()) {
    const double m = std::abs(x);
    acc += p == 2 ? m * m : std::pow(m, p);
  }
  if (!std::isfinite(acc)) throw NumericError("non-finite value in L^p integral");
  return acc * g.cell_measure();
}

double lp_norm(const TorusField& f, int p) {
  return std::pow(lp_integral(f, p), 1.0 / p);
}

namespace {
double bump_edge(double s) noexcept { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
}  // namespace

double smooth_cutoff(double r) noexcept {
  r = std::abs(r);
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = bump_edge(2.0 - r);
  const double b = bump_edge(r - 1.0);
  return a / (a + b);
}

bool is_dyadic(int n) noexcept { return n >= 1 && (n & (n - 1)) == 0; }

int max_dyadic(const ModeLattice& lattice) noexcept {
  const double need = std::sqrt(3.0) * lattice.cutoff();
  int n = 1;
  while (n < need) n *= 2;
  return n;
}

double lp_multiplier(int dyadic, double xi_norm) {
  if (!is_dyadic(dyadic)) throw ConfigError("Littlewood-Paley index must be a power of two");
  if (dyadic == 1) return smooth_cutoff(xi_norm);
  return smooth_cutoff(xi_norm / dyadic) - smooth_cutoff(2.0 * xi_norm / dyadic);
}

TorusField lp_project(const TorusField& f, int dyadic) {
  if (!is_dyadic(dyadic)) throw ConfigError("Littlewood-Paley index must be a power of two");
  if (dyadic > max_dyadic(f.lattice()))
    throw ConfigError("Littlewood-Paley index " + std::to_string(dyadic) +
                      " exceeds the lattice resolution");
  TorusField out(f.lattice());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = lp_multiplier(dyadic, std::sqrt(double(f.lattice().norm_sq(i))));
    out[i] = m * f[i];
  }
  return out;
}

double sobolev_norm(const TorusField& f, double s) {
  if (!std::isfinite(s)) throw NumericError("Sobolev index must be finite");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::norm(f[i]);
    if (std::isnan(a)) throw NumericError("NaN coefficient in Sobolev norm");
    acc += a * std::pow(1.0 + f.lattice().norm_sq(i), s);
  }
  return std::sqrt(acc / kCellVolume);
}

}  // namespace gph
