#include "gph/probes.hpp"

#include <gsl/gsl_integration.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "fft.hpp"
#include "gph/errors.hpp"
#include "gph/nls.hpp"
#include "gph/random.hpp"

namespace gph {

void TimeQuadrature::validate() const {
  if (nodes < 1 || panels < 1) throw ConfigError("time quadrature needs nodes >= 1 and panels >= 1");
}

void gauss_legendre(const TimeInterval& interval, const TimeQuadrature& q, std::vector<double>& t,
                    std::vector<double>& w) {
  q.validate();
  if (!(interval.b > interval.a)) throw ConfigError("time interval must have b > a");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(std::size_t(q.nodes)), &gsl_integration_glfixed_table_free);
  if (!table) throw NumericError("could not build the Gauss-Legendre table");
  t.clear();
  w.clear();
  const double h = (interval.b - interval.a) / q.panels;
  for (int p = 0; p < q.panels; ++p)
    for (int i = 0; i < q.nodes; ++i) {
      double x = 0, wi = 0;
      gsl_integration_glfixed_point(interval.a + p * h, interval.a + (p + 1) * h, std::size_t(i), &x, &wi,
                                    table.get());
      t.push_back(x);
      w.push_back(wi);
    }
}

namespace {

bool smooth235(int n) {
  for (int p : {2, 3, 5})
    while (n % p == 0) n /= p;
  return n == 1;
}

int good_size(int n) {
  while (!smooth235(n)) ++n;
  return n;
}

struct Support {
  std::vector<std::size_t> grid_index;
  std::vector<cplx> coeff;
  std::vector<int> norm_sq;
  int bandwidth = 0;
  int min_sq = 0, max_sq = 0;
};

Support support_of(const TorusField& f) {
  Support s;
  const ModeLattice& lat = f.lattice();
  s.min_sq = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == cplx(0.0)) continue;
    const Mode n = lat.mode(i);
    s.bandwidth = std::max({s.bandwidth, std::abs(n[0]), std::abs(n[1]), std::abs(n[2])});
    s.min_sq = std::min(s.min_sq, lat.norm_sq(i));
    s.max_sq = std::max(s.max_sq, lat.norm_sq(i));
  }
  if (s.min_sq > s.max_sq) s.min_sq = s.max_sq = 0;
  return s;
}

// Evaluates the product at each quadrature node and hands the weighted row of
// samples (grid values for s = 0, weighted Fourier coefficients otherwise)
// to `sink`; each row's squared norm is the node's contribution.
void spacetime_rows(std::span<const SpacetimeFactor> factors, double s, const TimeInterval& interval,
                    const TimeQuadrature& q, const std::function<void(std::span<const cplx>)>& sink) {
  if (factors.empty()) throw ConfigError("spacetime product needs at least one factor");
  if (!(s >= 0.0)) throw ConfigError("derivative order s must be >= 0");
  const ModeLattice& lat = factors.front().field->lattice();
  std::vector<Support> sup;
  int band = 0;
  for (const auto& f : factors) {
    if (!(f.field->lattice() == lat)) throw ShapeError("spacetime factors on different lattices");
    sup.push_back(support_of(*f.field));
    band += sup.back().bandwidth;
  }
  const int pts = good_size(2 * band + 2);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const TorusField& f = *factors[k].field;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] == cplx(0.0)) continue;
      const Mode n = lat.mode(i);
      sup[k].grid_index.push_back(
          (std::size_t(detail::wrap(n[0], pts)) * std::size_t(pts) + std::size_t(detail::wrap(n[1], pts))) *
              std::size_t(pts) +
          std::size_t(detail::wrap(n[2], pts)));
      sup[k].coeff.push_back(f[i]);
      sup[k].norm_sq.push_back(lat.norm_sq(i));
    }
  }
  const auto& fft = detail::fft3(pts);
  const std::size_t total = std::size_t(pts) * std::size_t(pts) * std::size_t(pts);
  const double cell = std::pow(kTwoPi / pts, 3);
  std::vector<double> weight_s;
  if (s > 0.0) {
    weight_s.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      int m[3] = {int(i / (std::size_t(pts) * std::size_t(pts))), int((i / std::size_t(pts)) % std::size_t(pts)),
                  int(i % std::size_t(pts))};
      double n2 = 0;
      for (int& c : m) {
        if (c > pts / 2) c -= pts;
        n2 += double(c) * c;
      }
      weight_s[i] = n2 == 0.0 ? 0.0 : std::pow(n2, s / 2);
    }
  }
  std::vector<double> nodes, weights;
  gauss_legendre(interval, q, nodes, weights);
  std::vector<cplx> prod(total), work(total);
  for (std::size_t node = 0; node < nodes.size(); ++node) {
    const double t = nodes[node];
    std::fill(prod.begin(), prod.end(), cplx(1.0));
    for (std::size_t k = 0; k < factors.size(); ++k) {
      std::fill(work.begin(), work.end(), cplx(0.0));
      for (std::size_t m = 0; m < sup[k].coeff.size(); ++m)
        work[sup[k].grid_index[m]] = sup[k].coeff[m] * std::polar(1.0 / kCellVolume, -t * sup[k].norm_sq[m]);
      fft.backward(work);
      if (factors[k].conjugate)
        for (std::size_t i = 0; i < total; ++i) prod[i] *= std::conj(work[i]);
      else
        for (std::size_t i = 0; i < total; ++i) prod[i] *= work[i];
    }
    if (s == 0.0) {
      const double scale = std::sqrt(weights[node] * cell);
      for (auto& x : prod) x *= scale;
    } else {
      fft.forward(prod);
      const double scale = std::sqrt(weights[node] / kCellVolume) * cell;
      for (std::size_t i = 0; i < total; ++i) prod[i] *= scale * weight_s[i];
    }
    sink(prod);
  }
}

}  // namespace

double spacetime_product_norm(std::span<const SpacetimeFactor> factors, double s, const TimeInterval& interval,
                              const TimeQuadrature& q) {
  double acc = 0.0;
  spacetime_rows(factors, s, interval, q, [&](std::span<const cplx> row) {
    double r = 0.0;
    for (const auto& x : row) r += std::norm(x);
    acc += r;
  });
  if (!std::isfinite(acc)) throw NumericError("non-finite spacetime norm");
  return std::sqrt(acc);
}

double spacetime_product_norm_stacked(std::span<const SpacetimeFactor> factors, double s,
                                      const TimeInterval& interval, const TimeQuadrature& q) {
  std::vector<cplx> stacked;
  Eigen::Index cols = 0;
  spacetime_rows(factors, s, interval, q, [&](std::span<const cplx> row) {
    cols = Eigen::Index(row.size());
    stacked.insert(stacked.end(), row.begin(), row.end());
  });
  const Eigen::Map<const Eigen::MatrixXcd> m(stacked.data(), cols, Eigen::Index(stacked.size()) / cols);
  return m.norm();
}

QuadratureCheck check_quadrature(std::span<const SpacetimeFactor> factors, const TimeInterval& interval,
                                 const TimeQuadrature& q) {
  q.validate();
  QuadratureCheck c;
  for (const auto& f : factors) {
    const Support s = support_of(*f.field);
    c.frequency_span += s.max_sq - s.min_sq;
  }
  const double h = (interval.b - interval.a) / q.panels;
  c.resolved = c.frequency_span * h <= 2.0 * (q.nodes - 10);
  return c;
}

namespace {

void check_interval(const TimeInterval& i) {
  if (!(i.a >= 0.0 && i.b <= 1.0 && i.b > i.a)) throw ConfigError("probe interval must satisfy 0 <= a < b <= 1");
}

void check_dyadics(const std::array<int, 3>& n, int cutoff) {
  for (int x : n)
    if (!is_dyadic(x)) throw ConfigError("probe frequencies must be dyadic");
  if (!(n[0] >= n[1] && n[1] >= n[2])) throw ConfigError("probe frequencies must satisfy N1 >= N2 >= N3");
  if (2 * n[0] - 1 > cutoff)
    throw ConfigError("dyadic N=" + std::to_string(n[0]) + " is not resolved at cutoff " + std::to_string(cutoff));
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace

void TrilinearConfig::validate() const {
  make_lattice(cutoff);
  if (sweep.empty()) throw ConfigError("trilinear sweep is empty");
  for (const auto& n : sweep) check_dyadics(n, cutoff);
  if (samples < 2) throw ConfigError("need at least 2 samples");
  check_interval(interval);
  quadrature.validate();
  if (delta_grid.empty()) throw ConfigError("delta grid is empty");
  for (double d : delta_grid)
    if (!(d >= 0.0)) throw ConfigError("delta must be >= 0");
}

double trilinear_lhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, std::array<int, 3> n,
                     const TimeInterval& interval, const TimeQuadrature& q) {
  const TorusField g1 = lp_project(f1, n[0]), g2 = lp_project(f2, n[1]), g3 = lp_project(f3, n[2]);
  const SpacetimeFactor fs[3] = {{&g1}, {&g2}, {&g3}};
  return spacetime_product_norm(fs, 0.0, interval, q);
}

double trilinear_rhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, std::array<int, 3> n,
                     double delta) {
  const double n1 = n[0], n2 = n[1], n3 = n[2];
  return n2 * n3 * std::pow(std::max(n3 / n1, 1.0 / n2), delta) * l2_norm(lp_project(f1, n[0])) *
         l2_norm(lp_project(f2, n[1])) * l2_norm(lp_project(f3, n[2]));
}

ProbeReport trilinear_probe(const TrilinearConfig& cfg) {
  cfg.validate();
  const ModeLattice lat = make_lattice(cfg.cutoff);
  ProbeReport rep;
  rep.seed = cfg.seed;
  rep.n_samples = std::size_t(cfg.samples);
  const std::size_t nd = cfg.delta_grid.size();
  std::vector<std::vector<double>> maxima(nd);
  std::vector<double> xs;
  for (std::size_t p = 0; p < cfg.sweep.size(); ++p) {
    const auto n = cfg.sweep[p];
    std::vector<double> best(nd, 0.0), best_half(nd, 0.0);
    for (int i = 0; i < cfg.samples; ++i) {
      const std::uint64_t base = (std::uint64_t(p) << 32) + 3 * std::uint64_t(i);
      const TorusField f1 = random_shell_field(lat, n[0], cfg.seed, base);
      const TorusField f2 = random_shell_field(lat, n[1], cfg.seed, base + 1);
      const TorusField f3 = random_shell_field(lat, n[2], cfg.seed, base + 2);
      const TorusField g1 = lp_project(f1, n[0]), g2 = lp_project(f2, n[1]), g3 = lp_project(f3, n[2]);
      const SpacetimeFactor fs[3] = {{&g1}, {&g2}, {&g3}};
      if (i == 0 && !check_quadrature(fs, cfg.interval, cfg.quadrature).resolved) rep.quadrature_resolved = false;
      const double lhs = spacetime_product_norm(fs, 0.0, cfg.interval, cfg.quadrature);
      for (std::size_t d = 0; d < nd; ++d) {
        const double rhs = trilinear_rhs(f1, f2, f3, n, cfg.delta_grid[d]);
        const double ratio = lhs / rhs;
        rep.samples.push_back({n, 0.0, cfg.delta_grid[d], std::uint64_t(i), lhs, rhs, ratio});
        best[d] = std::max(best[d], ratio);
        if (i < cfg.samples / 2) best_half[d] = std::max(best_half[d], ratio);
      }
    }
    for (std::size_t d = 0; d < nd; ++d) {
      rep.sweep.push_back({n, cfg.delta_grid[d], best_half[d], best[d]});
      maxima[d].push_back(std::log(best[d]));
    }
    xs.push_back(std::log(double(n[0]) * n[1] * n[2]));
  }
  rep.fitted_delta = std::numeric_limits<double>::quiet_NaN();
  std::size_t chosen = 0;
  for (std::size_t d = 0; d < nd; ++d) {
    const double slope = log_slope(xs, maxima[d]);
    rep.growth_slopes.push_back(slope);
    rep.growth_flags.push_back(slope > cfg.growth_tolerance);
    if (slope <= cfg.growth_tolerance && !(cfg.delta_grid[d] <= rep.fitted_delta)) {
      rep.fitted_delta = cfg.delta_grid[d];
      chosen = d;
    }
  }
  rep.trend = std::isnan(rep.fitted_delta) ? "inconsistent" : "consistent";
  for (const auto& sp : rep.sweep)
    if (sp.delta == cfg.delta_grid[chosen]) {
      rep.max_ratio = std::max(rep.max_ratio, sp.max_ratio);
      rep.max_ratio_half = std::max(rep.max_ratio_half, sp.max_ratio_half);
    }
  rep.fitted_constant = rep.max_ratio;
  return rep;
}

void MultilinearConfig::validate() const {
  make_lattice(cutoff);
  if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("multilinear probe needs s in [0, 1]");
  if (samples < 2) throw ConfigError("need at least 2 samples");
  check_interval(interval);
  quadrature.validate();
}

double multilinear_lhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, double s,
                       const TimeInterval& interval, const TimeQuadrature& q) {
  const SpacetimeFactor fs[3] = {{&f1, false}, {&f2, true}, {&f3, false}};
  return spacetime_product_norm(fs, s, interval, q);
}

double multilinear_rhs(const TorusField& f1, const TorusField& f2, const TorusField& f3, double s) {
  const double a[3] = {sobolev_norm(f1, s), sobolev_norm(f2, s), sobolev_norm(f3, s)};
  const double b[3] = {sobolev_norm(f1, 1.0), sobolev_norm(f2, 1.0), sobolev_norm(f3, 1.0)};
  return std::min({a[0] * b[1] * b[2], b[0] * a[1] * b[2], b[0] * b[1] * a[2]});
}

ProbeReport multilinear_probe(const MultilinearConfig& cfg) {
  cfg.validate();
  const ModeLattice lat = make_lattice(cfg.cutoff);
  ProbeReport rep;
  rep.seed = cfg.seed;
  rep.n_samples = std::size_t(cfg.samples);
  rep.fitted_delta = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < cfg.samples; ++i) {
    const std::uint64_t base = 3 * std::uint64_t(i);
    const TorusField f1 = random_h1_field(lat, cfg.seed, base);
    const TorusField f2 = random_h1_field(lat, cfg.seed, base + 1);
    const TorusField f3 = random_h1_field(lat, cfg.seed, base + 2);
    if (i == 0) {
      const SpacetimeFactor fs[3] = {{&f1, false}, {&f2, true}, {&f3, false}};
      rep.quadrature_resolved = check_quadrature(fs, cfg.interval, cfg.quadrature).resolved;
    }
    const double lhs = multilinear_lhs(f1, f2, f3, cfg.s, cfg.interval, cfg.quadrature);
    const double rhs = multilinear_rhs(f1, f2, f3, cfg.s);
    rep.samples.push_back({{0, 0, 0}, cfg.s, 0.0, std::uint64_t(i), lhs, rhs, lhs / rhs});
    rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    if (i < cfg.samples / 2) rep.max_ratio_half = std::max(rep.max_ratio_half, lhs / rhs);
  }
  rep.fitted_constant = rep.max_ratio;
  rep.trend = "consistent";
  return rep;
}

void SobolevConfig::validate() const {
  make_lattice(cutoff);
  if (samples < 2) throw ConfigError("need at least 2 samples");
}

double sobolev_ratio(const TorusField& phi) {
  const int pts = good_size(6 * phi.lattice().cutoff() + 2);
  const double l6 = std::pow(lp_integral(phi, 6, pts), 1.0 / 6.0);
  return l6 / sobolev_norm(phi, 1.0);
}

ProbeReport sobolev_probe(const SobolevConfig& cfg) {
  cfg.validate();
  const ModeLattice lat = make_lattice(cfg.cutoff);
  ProbeReport rep;
  rep.seed = cfg.seed;
  rep.n_samples = std::size_t(cfg.samples);
  rep.fitted_delta = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < cfg.samples; ++i) {
    const TorusField f = random_h1_field(lat, cfg.seed, std::uint64_t(i));
    const double r = sobolev_ratio(f);
    rep.samples.push_back({{0, 0, 0}, 1.0, 0.0, std::uint64_t(i), r * sobolev_norm(f, 1.0), sobolev_norm(f, 1.0), r});
    rep.max_ratio = std::max(rep.max_ratio, r);
    if (i < cfg.samples / 2) rep.max_ratio_half = std::max(rep.max_ratio_half, r);
  }
  rep.fitted_constant = rep.max_ratio;
  rep.trend = "consistent";
  return rep;
}

TorusField random_h1_field(const ModeLattice& lattice, std::uint64_t seed, std::uint64_t stream) {
  const CounterRng rng(seed, stream);
  TorusField f(lattice);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.complex_normal(i);
  f *= 1.0 / sobolev_norm(f, 1.0);
  return f;
}

}  // namespace gph
