#pragma once

// Monte-Carlo probes of the dispersive estimates behind the uniqueness
// argument: the trilinear bound for dyadic frequency-localized free waves,
// the H^s product bound, and the L^6 <= H^1 embedding. Probes report ratios;
// a bounded ratio is evidence, never a proof.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gph/torus.hpp"

namespace gph {

struct TimeInterval {
  double a = 0.0;
  double b = 1.0;
};

/// Composite Gauss-Legendre rule: `panels` equal panels of `nodes` points.
struct TimeQuadrature {
  int nodes = 64;
  int panels = 1;
  void validate() const;
};

/// Nodes and weights of the composite rule on [a, b].
void gauss_legendre(const TimeInterval& interval, const TimeQuadrature& q, std::vector<double>& t,
                    std::vector<double>& w);

struct SpacetimeFactor {
  const TorusField* field;
  bool conjugate = false;
};

/// || |grad|^s prod_i (e^{it Lap} f_i or its conjugate) ||_{L^2(I x Lambda)}
/// by time quadrature of spatial norms. The product is formed on an alias-free
/// grid, so for s > 0 the multiplier |n|^s (|0|^s = 0) acts on exact
/// coefficients.
double spacetime_product_norm(std::span<const SpacetimeFactor> factors, double s, const TimeInterval& interval,
                              const TimeQuadrature& q);
/// Same quantity as the Frobenius norm of the stacked (time x space) array of
/// weighted samples. Used as a cross-check.
double spacetime_product_norm_stacked(std::span<const SpacetimeFactor> factors, double s,
                                      const TimeInterval& interval, const TimeQuadrature& q);

/// Largest angular frequency difference of the integrand |product|^2 in time,
/// and whether the quadrature has at least one node per half-period of it.
struct QuadratureCheck {
  double frequency_span = 0.0;
  bool resolved = false;
};
QuadratureCheck check_quadrature(std::span<const SpacetimeFactor> factors, const TimeInterval& interval,
                                 const TimeQuadrature& q);

struct ProbeSample {
  std::array<int, 3> dyadics{0, 0, 0};
  double s = 0.0;
  double delta = 0.0;
  std::uint64_t index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Max ratio of one sweep point for one delta, over the first half and all samples.
struct SweepPoint {
  std::array<int, 3> dyadics{0, 0, 0};
  double delta = 0.0;
  double max_ratio_half = 0.0;
  double max_ratio = 0.0;
};

struct ProbeReport {
  std::vector<ProbeSample> samples;
  std::vector<SweepPoint> sweep;
  double max_ratio = 0.0;
  double max_ratio_half = 0.0;      ///< over the first half of the samples
  double fitted_constant = 0.0;     ///< max ratio at fitted_delta
  double fitted_delta = 0.0;        ///< largest delta without a growth trend (NaN if none)
  std::vector<double> growth_slopes;  ///< per delta: log-log slope of max ratio along the sweep
  std::vector<bool> growth_flags;
  bool quadrature_resolved = true;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::string trend;  ///< "consistent" or "inconsistent"
};

struct TrilinearConfig {
  int cutoff = 16;
  std::vector<std::array<int, 3>> sweep{{1, 1, 1}, {2, 1, 1}, {4, 1, 1}, {8, 1, 1}};
  int samples = 50;
  TimeInterval interval;
  TimeQuadrature quadrature;
  std::vector<double> delta_grid{0.0, 0.01, 0.05, 0.1, 0.25, 0.5};
  double growth_tolerance = 0.1;  ///< slope above which a trend counts as growth
  std::uint64_t seed = 1;
  void validate() const;
};

/// lhs = || P_{N1} e^{itLap} f1 * P_{N2} e^{itLap} f2 * P_{N3} e^{itLap} f3 ||_{L^2(I x Lambda)},
/// rhs = N2 N3 max(N3/N1, 1/N2)^delta prod ||P_{Ni} fi||, f_i random in the
/// support shell of Phi_{Ni}. Sample index i draws from streams 3i, 3i+1, 3i+2.
ProbeReport trilinear_probe(const TrilinearConfig& cfg);
/// One sample of the trilinear probe for explicit fields.
double trilinear_lhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, std::array<int, 3> dyadics,
                     const TimeInterval& interval, const TimeQuadrature& q);
double trilinear_rhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, std::array<int, 3> dyadics,
                     double delta);

struct MultilinearConfig {
  int cutoff = 8;
  double s = 1.0;
  int samples = 100;
  TimeInterval interval;
  TimeQuadrature quadrature;
  std::uint64_t seed = 1;
  void validate() const;
};

/// lhs = || |grad|^s (e^{itLap}f1 conj(e^{itLap}f2) e^{itLap}f3) ||_{L^2(I x Lambda)},
/// rhs = min over the three placements of H^s on one factor and H^1 on the others.
ProbeReport multilinear_probe(const MultilinearConfig& cfg);
double multilinear_lhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, double s,
                       const TimeInterval& interval, const TimeQuadrature& q);
double multilinear_rhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, double s);

struct SobolevConfig {
  int cutoff = 16;
  int samples = 1000;
  std::uint64_t seed = 1;
  void validate() const;
};

/// ratio = ||phi||_{L^6} / ||phi||_{H^1}; rhs column holds ||phi||_{H^1}, lhs
/// ||phi||_{L^6}. The cubic bound || |phi|^2 phi ||_{L^2} <= C ||phi||_{H^1}^3 has
/// ratio equal to the cube of this one.
ProbeReport sobolev_probe(const SobolevConfig& cfg);
double sobolev_ratio(const TorusField& phi);

/// Complex Gaussian coefficients on the whole lattice, normalized in H^1.
TorusField random_h1_field(const ModeLattice& lattice, std::uint64_t seed, std::uint64_t stream);

}  // namespace gph
