#pragma once

// Truncated Fourier representation of functions on the periodic cell
// [0, 2 pi]^3.
//
// Coefficient convention: f_hat(n) = \int f(x) e^{-i <x, n>} dx, with no
// (2 pi)^{-3} prefactor; the inverse carries it:
//   f(x) = (2 pi)^{-3} sum_n f_hat(n) e^{i <x, n>}.
// With this convention ||f||_{L^2}^2 = (2 pi)^{-3} sum_n |f_hat(n)|^2.

#include <array>
#include <cstdlib>
#include <cstddef>
#include <span>
#include <vector>

#include "gph/types.hpp"

namespace gph {

using Mode = std::array<int, 3>;

/// The cube {n in Z^3 : |n|_inf <= M} with a lexicographic enumeration
/// (first component slowest). The enumeration is symmetric: the index of
/// -n is size() - 1 - index(n).
class ModeLattice {
 public:
  static constexpr int kOrderingVersion = 1;
  static constexpr int kMaxCutoff = 64;

  /// Throws ConfigError unless 1 <= cutoff <= 64.
  explicit ModeLattice(int cutoff);

  int cutoff() const noexcept { return cutoff_; }
  int side() const noexcept { return 2 * cutoff_ + 1; }
  std::size_t size() const noexcept {
    const auto s = static_cast<std::size_t>(side());
    return s * s * s;
  }
  /// Collocation points per axis for alias-free cubic products.
  int padded_grid() const noexcept { return 2 * side(); }

  Mode mode(std::size_t index) const noexcept {
    const auto s = static_cast<std::size_t>(side());
    return {static_cast<int>(index / (s * s)) - cutoff_,
            static_cast<int>((index / s) % s) - cutoff_,
            static_cast<int>(index % s) - cutoff_};
  }

  bool contains(const Mode& n) const noexcept {
    return std::abs(n[0]) <= cutoff_ && std::abs(n[1]) <= cutoff_ &&
           std::abs(n[2]) <= cutoff_;
  }

  /// Index of n; n must satisfy contains(n).
  std::size_t index(const Mode& n) const noexcept {
    const auto s = static_cast<std::size_t>(side());
    return (static_cast<std::size_t>(n[0] + cutoff_) * s +
            static_cast<std::size_t>(n[1] + cutoff_)) *
               s +
           static_cast<std::size_t>(n[2] + cutoff_);
  }

  /// Index of n, or -1 when n lies outside the lattice.
  long find(const Mode& n) const noexcept {
    return contains(n) ? static_cast<long>(index(n)) : -1;
  }

  std::size_t negated(std::size_t index) const noexcept { return size() - 1 - index; }

  /// |n|^2 for the mode at index.
  int norm_sq(std::size_t index) const noexcept {
    const Mode n = mode(index);
    return n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
  }

  /// Japanese bracket <n> = sqrt(1 + |n|^2).
  double bracket(std::size_t index) const noexcept;

  friend bool operator==(const ModeLattice& a, const ModeLattice& b) noexcept {
    return a.cutoff_ == b.cutoff_;
  }

 private:
  int cutoff_;
};

/// Convenience wrapper matching the `make_lattice` operation.
ModeLattice make_lattice(int cutoff);

/// One-particle field stored as Fourier coefficients on a ModeLattice.
class TorusField {
 public:
  explicit TorusField(const ModeLattice& lattice);
  /// Throws ShapeError if coeffs.size() != lattice.size().
  TorusField(const ModeLattice& lattice, std::vector<cplx> coeffs);

  /// amplitude * e^{i <x, n>}.
  static TorusField plane_wave(const ModeLattice& lattice, const Mode& n,
                               cplx amplitude = 1.0);
  /// The constant function c.
  static TorusField constant(const ModeLattice& lattice, cplx c);

  const ModeLattice& lattice() const noexcept { return lattice_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  std::span<cplx> coeffs() noexcept { return coeffs_; }
  const std::vector<cplx>& data() const noexcept { return coeffs_; }
  cplx operator[](std::size_t i) const noexcept { return coeffs_[i]; }
  cplx& operator[](std::size_t i) noexcept { return coeffs_[i]; }

  TorusField& operator+=(const TorusField& other);
  TorusField& operator-=(const TorusField& other);
  TorusField& operator*=(cplx s) noexcept;

  /// Complex conjugate function: coefficients conj(f_hat(-n)).
  TorusField conj() const;

  friend bool operator==(const TorusField& a, const TorusField& b) noexcept {
    return a.lattice_ == b.lattice_ && a.coeffs_ == b.coeffs_;
  }

 private:
  ModeLattice lattice_;
  std::vector<cplx> coeffs_;
};

TorusField operator+(TorusField a, const TorusField& b);
TorusField operator-(TorusField a, const TorusField& b);
TorusField operator*(cplx s, TorusField a);

/// <f, g> = \int conj(f) g dx.
cplx inner_product(const TorusField& f, const TorusField& g);
double l2_norm(const TorusField& f);
/// Returns f / ||f||_{L^2}. Throws NumericError for the zero field.
TorusField normalized(const TorusField& f);

/// Values on a uniform grid x_j = 2 pi j / points per axis, row-major with the
/// first axis slowest.
class GridField {
 public:
  explicit GridField(int points);
  int points() const noexcept { return points_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  cplx operator[](std::size_t i) const noexcept { return values_[i]; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }
  /// Cell measure (2 pi / points)^3 of one grid point.
  double cell_measure() const noexcept;

 private:
  int points_;
  std::vector<cplx> values_;
};

/// Evaluates f on a grid. points == 0 selects the padded grid 2(2M+1).
/// Throws ShapeError if points < 2M+1.
GridField to_grid(const TorusField& f, int points = 0);
/// Fourier coefficients of grid data, truncated to the lattice. Exact when the
/// data is band-limited to |n|_inf <= K with K + M < points.
/// Throws ShapeError if points < 2M+1.
TorusField to_modes(const GridField& g, const ModeLattice& lattice);

/// Galerkin-truncated product P_M(a * conj(b) * c), alias-free.
TorusField triple_product(const TorusField& a, const TorusField& b, const TorusField& c);
/// P_M(|f|^2 f).
TorusField cubic_term(const TorusField& f);
/// P_M(a * g) where g is given on the padded grid of a's lattice and is
/// band-limited to |n|_inf <= 2M.
TorusField multiply_by_grid(const TorusField& a, const GridField& g);

/// \int |f|^p dx evaluated by quadrature on a grid with `points` per axis
/// (exact for even p when points > p M).
double lp_integral(const TorusField& f, int p, int points = 0);
/// ||f||_{L^p}.
double lp_norm(const TorusField& f, int p);

/// Smooth even cutoff: 1 on [0,1], 0 on [2, inf), C-infinity in between.
double smooth_cutoff(double r) noexcept;
bool is_dyadic(int n) noexcept;
/// Largest dyadic N accepted by lp_project on this lattice: the smallest
/// dyadic integer >= sqrt(3) M, so that sum_{N <= max} Phi_N == 1 on the lattice.
int max_dyadic(const ModeLattice& lattice) noexcept;
/// Littlewood-Paley symbol Phi_N(xi) at Euclidean frequency |xi|.
double lp_multiplier(int dyadic, double xi_norm);
/// (P_N f)^(xi) = Phi_N(xi) f_hat(xi). Throws ConfigError for non-dyadic N
/// or N > max_dyadic.
TorusField lp_project(const TorusField& f, int dyadic);

/// (sum_n |f_hat(n)|^2 <n>^{2s})^{1/2}, normalised so that s = 0 gives the
/// L^2 norm. Throws NumericError on NaN coefficients or non-finite s.
double sobolev_norm(const TorusField& f, double s);

}  // namespace gph
