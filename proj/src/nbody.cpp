#include "gph/nbody.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "gph/errors.hpp"
#include "gph/hierarchy.hpp"

namespace gph {

namespace {

constexpr std::size_t kRadialNodes = 256;

double bump(double r, double radius) {
  const double u = r / radius;
  return u < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
}

// 4 pi \int_0^R bump(r) r^2 sinc(xi r) dr.
double radial_transform(double xi, double radius) {
  static const std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(kRadialNodes), &gsl_integration_glfixed_table_free);
  double acc = 0.0;
  for (std::size_t i = 0; i < kRadialNodes; ++i) {
    double r = 0, w = 0;
    gsl_integration_glfixed_point(0.0, radius, i, &r, &w, table.get());
    const double x = xi * r;
    const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6 : std::sin(x) / x;
    acc += w * bump(r, radius) * r * r * sinc;
  }
  return 4 * kPi * acc;
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

ScaledPotential::ScaledPotential(const ModeLattice& lattice, int particles, double beta, double radius)
    : lattice_(lattice), particles_(particles), beta_(beta), radius_(radius) {
  if (particles < 1) throw ConfigError("particle number must be >= 1");
  if (!(beta > 0.0 && beta < 0.6)) throw ConfigError("beta must lie in (0, 3/5)");
  if (!(radius > 0.0)) throw ConfigError("potential radius must be > 0");
  norm_ = 1.0 / radial_transform(0.0, radius_);
  const int m = 2 * lattice.cutoff();
  const double scale = std::pow(double(particles_), beta_);
  by_norm_sq_.resize(std::size_t(3 * m * m + 1));
  for (std::size_t q2 = 0; q2 < by_norm_sq_.size(); ++q2)
    by_norm_sq_[q2] = q2 == 0 ? 1.0 : profile_transform(std::sqrt(double(q2)) / scale);
}

double ScaledPotential::scaled_radius() const noexcept { return radius_ / std::pow(double(particles_), beta_); }

bool ScaledPotential::wraps() const noexcept { return scaled_radius() >= kPi; }

double ScaledPotential::profile_transform(double xi) const { return norm_ * radial_transform(xi, radius_); }

double ScaledPotential::coefficient(const Mode& q) const {
  const int m = 2 * lattice_.cutoff();
  if (std::abs(q[0]) > m || std::abs(q[1]) > m || std::abs(q[2]) > m)
    throw ShapeError("potential coefficient requested outside the difference lattice");
  return by_norm_sq_[std::size_t(q[0] * q[0] + q[1] * q[1] + q[2] * q[2])];
}

double NBodyState::symmetry_defect() const {
  const std::size_t L = lattice.size();
  double worst = 0.0;
  for (int s = 0; s + 1 < particles; ++s) {
    const std::size_t sa = ipow(L, particles - 1 - s), sb = ipow(L, particles - 2 - s);
    for (std::size_t i = 0; i < dim(); ++i) {
      const std::size_t a = (i / sa) % L, b = (i / sb) % L;
      const std::size_t j = i - a * sa - b * sb + b * sa + a * sb;
      worst = std::max(worst, std::abs(amplitudes[Eigen::Index(i)] - amplitudes[Eigen::Index(j)]));
    }
  }
  return worst;
}

std::size_t nbody_dim(const ModeLattice& lattice, int particles) {
  if (particles < 1) throw ConfigError("particle number must be >= 1");
  double d = std::pow(double(lattice.size()), particles);
  if (d > double(kKrylovDimLimit))
    throw ConfigError("N-body dimension " + std::to_string(d) + " exceeds the limit " +
                      std::to_string(kKrylovDimLimit));
  return ipow(lattice.size(), particles);
}

NBodyState product_state(const TorusField& phi, int particles) {
  NBodyState s;
  s.lattice = phi.lattice();
  s.particles = particles;
  nbody_dim(phi.lattice(), particles);
  Eigen::VectorXcd one(Eigen::Index(phi.size()));
  for (std::size_t i = 0; i < phi.size(); ++i) one[Eigen::Index(i)] = phi[i] * std::pow(kTwoPi, -1.5);
  Eigen::VectorXcd acc = one;
  for (int p = 1; p < particles; ++p) {
    Eigen::VectorXcd next(acc.size() * one.size());
    for (Eigen::Index i = 0; i < acc.size(); ++i) next.segment(i * one.size(), one.size()) = acc[i] * one;
    acc = std::move(next);
  }
  s.amplitudes = std::move(acc);
  return s;
}

Hamiltonian::Hamiltonian(const ScaledPotential& potential, const ModeLattice& lattice, double coupling)
    : potential_(potential),
      lattice_(lattice),
      particles_(potential.particles()),
      coupling_(coupling),
      dim_(nbody_dim(lattice, potential.particles())) {
  const std::size_t L = lattice.size();
  kinetic_.resize(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    std::size_t rest = i;
    double e = 0;
    for (int p = 0; p < particles_; ++p) {
      e += lattice.norm_sq(rest % L);
      rest /= L;
    }
    kinetic_[i] = e;
  }
  pair_.resize(L * L);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b) {
      const Mode na = lattice.mode(a), nb = lattice.mode(b);
      for (std::size_t c = 0; c < L; ++c) {
        // Source (c, d) with c = a - q, d = b + q.
        const Mode nc = lattice.mode(c);
        const Mode q{na[0] - nc[0], na[1] - nc[1], na[2] - nc[2]};
        const long d = lattice.find({nb[0] + q[0], nb[1] + q[1], nb[2] + q[2]});
        if (d < 0) continue;
        pair_[a * L + b].push_back({c * L + std::size_t(d), potential.coefficient(q) / kCellVolume});
      }
    }
}

void Hamiltonian::apply_pair(const Eigen::VectorXcd& in, Eigen::VectorXcd& out, int m, int a, int b) const {
  const std::size_t L = lattice_.size();
  const std::size_t sa = ipow(L, m - 1 - a), sb = ipow(L, m - 1 - b);
  const std::size_t n = std::size_t(in.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ia = (i / sa) % L, ib = (i / sb) % L;
    const std::size_t base = i - ia * sa - ib * sb;
    cplx acc = 0.0;
    for (const auto& t : pair_[ia * L + ib]) acc += t.weight * in[Eigen::Index(base + (t.from / L) * sa + (t.from % L) * sb)];
    out[Eigen::Index(i)] += acc;
  }
}

Eigen::SparseMatrix<double> Hamiltonian::pair_matrix(int m, int a, int b) const {
  const std::size_t L = lattice_.size();
  const std::size_t sa = ipow(L, m - 1 - a), sb = ipow(L, m - 1 - b);
  const std::size_t n = ipow(L, m);
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ia = (i / sa) % L, ib = (i / sb) % L;
    const std::size_t base = i - ia * sa - ib * sb;
    for (const auto& t : pair_[ia * L + ib])
      entries.emplace_back(Eigen::Index(i), Eigen::Index(base + (t.from / L) * sa + (t.from % L) * sb), t.weight);
  }
  Eigen::SparseMatrix<double> w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  w.setFromTriplets(entries.begin(), entries.end());
  return w;
}

void Hamiltonian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  if (std::size_t(in.size()) != dim_) throw ShapeError("state dimension does not match the Hamiltonian");
  out.resize(in.size());
  for (std::size_t i = 0; i < dim_; ++i) out[Eigen::Index(i)] = kinetic_[i] * in[Eigen::Index(i)];
  if (coupling_ == 0.0) return;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(in.size());
  for (int a = 0; a < particles_; ++a)
    for (int b = a + 1; b < particles_; ++b) apply_pair(in, v, particles_, a, b);
  out += (coupling_ / particles_) * v;
}

Eigen::VectorXcd Hamiltonian::apply(const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd out;
  apply(in, out);
  return out;
}

double Hamiltonian::energy(const NBodyState& psi) const { return psi.amplitudes.dot(apply(psi.amplitudes)).real(); }

Eigen::MatrixXcd Hamiltonian::dense(std::size_t limit) const {
  if (dim_ > limit)
    throw BudgetError("dense Hamiltonian of dimension " + std::to_string(dim_) + " exceeds " + std::to_string(limit));
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXcd h(n, n);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n), col;
  for (std::size_t j = 0; j < dim_; ++j) {
    e[Eigen::Index(j)] = 1.0;
    apply(e, col);
    h.col(Eigen::Index(j)) = col;
    e[Eigen::Index(j)] = 0.0;
  }
  return h;
}

Spectrum::Spectrum(const Hamiltonian& h, std::size_t limit) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.dense(limit));
  if (eig.info() != Eigen::Success) throw GuardError("Hamiltonian eigendecomposition failed");
  values_ = eig.eigenvalues();
  vectors_ = eig.eigenvectors();
}

Eigen::VectorXcd Spectrum::evolve(const Eigen::VectorXcd& psi, double t) const {
  if (t == 0.0) return psi;
  Eigen::VectorXcd c = vectors_.adjoint() * psi;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -t * values_[i]);
  return vectors_ * c;
}

namespace {

Eigen::VectorXcd krylov_evolve(const Hamiltonian& h, Eigen::VectorXcd psi, double t, const KrylovOptions& o) {
  if (o.subspace < 2 || !(o.tolerance > 0.0)) throw ConfigError("invalid Krylov options");
  double remaining = t;
  double tau = t;
  const double floor = std::abs(t) * 1e-10;
  while (remaining != 0.0) {
    if (std::abs(tau) > std::abs(remaining)) tau = remaining;
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return psi;
    const Eigen::Index n = psi.size();
    Eigen::MatrixXcd v(n, o.subspace + 1);
    std::vector<double> alpha, beta;
    v.col(0) = psi / beta0;
    Eigen::VectorXcd w;
    int m = 0;
    bool breakdown = false;
    for (int j = 0; j < o.subspace; ++j) {
      h.apply(v.col(j), w);
      alpha.push_back(v.col(j).dot(w).real());
      // Full reorthogonalization keeps the basis orthonormal to rounding.
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) w -= v.col(i).dot(w) * v.col(i);
      m = j + 1;
      const double b = w.norm();
      beta.push_back(b);
      if (b < 1e-14 * (std::abs(alpha.back()) + 1.0)) {
        breakdown = true;
        break;
      }
      v.col(j + 1) = w / b;
    }
    Eigen::MatrixXd tm = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tm(i, i) = alpha[std::size_t(i)];
      if (i + 1 < m) tm(i, i + 1) = tm(i + 1, i) = beta[std::size_t(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tm);
    while (true) {
      Eigen::VectorXcd y = Eigen::VectorXcd::Zero(m);
      for (int i = 0; i < m; ++i) {
        const cplx c = eig.eigenvectors()(0, i) * std::polar(1.0, -tau * eig.eigenvalues()[i]);
        y += c * eig.eigenvectors().col(i).cast<cplx>();
      }
      const double err = breakdown ? 0.0 : beta[std::size_t(m - 1)] * std::abs(y[m - 1]);
      if (err <= o.tolerance) {
        psi = beta0 * (v.leftCols(m) * y);
        remaining -= tau;
        break;
      }
      tau /= 2;
      if (std::abs(tau) < floor) throw GuardError("Krylov propagation did not reach the tolerance");
    }
  }
  return psi;
}

}  // namespace

NBodyState nbody_evolve(const NBodyState& psi, const Hamiltonian& h, double t, EvolveMethod method,
                        const KrylovOptions& opts) {
  const double ts[1] = {t};
  return nbody_trajectory(psi, h, ts, method, opts).front();
}

std::vector<NBodyState> nbody_trajectory(const NBodyState& psi, const Hamiltonian& h, std::span<const double> times,
                                         EvolveMethod method, const KrylovOptions& opts) {
  if (psi.dim() != h.dim() || psi.particles != h.particles())
    throw ShapeError("state does not match the Hamiltonian");
  std::vector<NBodyState> out;
  if (method == EvolveMethod::dense) {
    const Spectrum sp(h);
    for (double t : times) out.push_back({psi.lattice, psi.particles, sp.evolve(psi.amplitudes, t)});
    return out;
  }
  NBodyState cur = psi;
  double now = 0.0;
  for (double t : times) {
    cur.amplitudes = krylov_evolve(h, cur.amplitudes, t - now, opts);
    now = t;
    out.push_back(cur);
  }
  return out;
}

DensityMatrix marginal(const NBodyState& psi, int k) {
  if (k < 1) throw ConfigError("marginal order must be >= 1");
  DensityMatrix g(psi.lattice, k);
  if (k > psi.particles) return g;
  const Eigen::Index keep = Eigen::Index(ipow(psi.lattice.size(), k));
  const Eigen::Index rest = Eigen::Index(psi.dim()) / keep;
  const Eigen::Map<const Eigen::MatrixXcd> a(psi.amplitudes.data(), rest, keep);
  g.coeffs() = std::pow(kCellVolume, k) * (a.transpose() * a.conjugate());
  return g;
}

BbgkyTerms bbgky_prefactors(const Hamiltonian& h, int k) {
  const int n = h.particles();
  return {h.coupling() / n, k >= n ? 0.0 : h.coupling() * (n - k) / n};
}

namespace {

// [W, C] for a real symmetric sparse W; real and imaginary parts separately
// since real sparse products are much faster than complex ones.
Eigen::MatrixXcd commutator(const Eigen::SparseMatrix<double>& w, const Eigen::MatrixXcd& c) {
  const Eigen::MatrixXd re = c.real(), im = c.imag();
  const Eigen::MatrixXd re_t = re.transpose(), im_t = im.transpose();
  const Eigen::MatrixXd left_re = w * re, left_im = w * im;
  const Eigen::MatrixXd right_re = (w * re_t).transpose(), right_im = (w * im_t).transpose();
  Eigen::MatrixXcd out(c.rows(), c.cols());
  out.real() = left_re - right_re;
  out.imag() = left_im - right_im;
  return out;
}

}  // namespace

std::vector<double> bbgky_residual(std::span<const DensityMatrix> gamma_k, std::span<const DensityMatrix> next,
                                   std::span<const double> times, const Hamiltonian& h, int k) {
  if (times.size() < 3 || gamma_k.size() != times.size()) throw ConfigError("BBGKY residual needs >= 3 aligned samples");
  const double dt = detail::uniform_step(times);
  const BbgkyTerms pre = bbgky_prefactors(h, k);
  if (pre.prefactor_collision != 0.0 && next.size() != times.size())
    throw ConfigError("BBGKY residual needs the order k+1 marginal when k < N");
  std::vector<Eigen::SparseMatrix<double>> inner, outer;
  if (pre.prefactor_pairs != 0.0)
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) inner.push_back(h.pair_matrix(k, a, b));
  if (pre.prefactor_collision != 0.0)
    for (int j = 0; j < k; ++j) outer.push_back(h.pair_matrix(k + 1, j, k));
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    const DensityMatrix& g = gamma_k[i];
    if (g.order() != k) throw ShapeError("marginal order mismatch");
    DensityMatrix r = cplx(0.0, 0.5 / dt) * (gamma_k[i + 1] - gamma_k[i - 1]);
    r += laplacian_commutator(g);
    if (pre.prefactor_pairs != 0.0)
      for (const auto& w : inner) r.coeffs() -= pre.prefactor_pairs * commutator(w, g.coeffs());
    if (pre.prefactor_collision != 0.0) {
      const DensityMatrix& up = next[i];
      if (up.order() != k + 1) throw ShapeError("marginal order mismatch");
      for (int j = 0; j < k; ++j) {
        const DensityMatrix c(up.lattice(), k + 1, commutator(outer[std::size_t(j)], up.coeffs()));
        r -= cplx(pre.prefactor_collision) * partial_trace(c, k);
      }
    }
    out.push_back(hs_norm(r));
  }
  return out;
}

CutoffResult cutoff_initial_data(const NBodyState& psi, const Spectrum& spectrum, double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  const double n = psi.particles;
  Eigen::VectorXcd c = spectrum.vectors().adjoint() * psi.amplitudes;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= smooth_cutoff(kappa * spectrum.values()[i] / n);
  const double norm = c.norm();
  if (!(norm > 1e-14 * psi.norm())) throw GuardError("energy cutoff annihilates the state");
  c /= norm;
  CutoffResult r;
  r.state = {psi.lattice, psi.particles, spectrum.vectors() * c};
  r.distance = (psi.amplitudes - r.state.amplitudes).norm();
  r.property_holds = true;
  for (int j = 1; j <= 4; ++j) {
    double m = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i) m += std::norm(c[i]) * std::pow(spectrum.values()[i], j);
    const double bound = std::pow(2.0 * n / kappa, j);
    r.moments.push_back(m);
    r.moment_bounds.push_back(bound);
    if (m > bound * (1 + 1e-12)) r.property_holds = false;
  }
  return r;
}

void ChaosConfig::validate() const {
  if (particles.empty() || times.empty()) throw ConfigError("chaos diagnostic needs particle numbers and times");
  for (int n : particles)
    if (n < 1) throw ConfigError("particle number must be >= 1");
  if (coupling != 0.0 && coupling != 1.0) throw ConfigError("coupling must be 0 or 1");
  if (!(beta > 0.0 && beta < 0.6)) throw ConfigError("beta must lie in (0, 3/5)");
  if (kappa < 0.0) throw ConfigError("kappa must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
}

std::vector<ChaosRow> chaos_diagnostic(const TorusField& phi, const ChaosConfig& cfg) {
  cfg.validate();
  if (std::abs(l2_norm(phi) - 1.0) > 1e-12) throw ConfigError("chaos diagnostic needs a normalized field");
  const ModeLattice& lat = phi.lattice();
  NlsParams np;
  np.lambda = cfg.coupling;
  np.dt = cfg.dt;
  const std::vector<TorusField> flow = nls_evolve(phi, np, cfg.times);
  const DensityMatrix phi1 = factorized_state(phi, 1);
  std::vector<ChaosRow> rows;
  for (int n : cfg.particles) {
    const ScaledPotential v(lat, n, cfg.beta);
    const Hamiltonian h(v, lat, cfg.coupling);
    NBodyState psi = product_state(phi, n);
    const bool dense = h.dim() <= kDenseDimLimit;
    std::unique_ptr<Spectrum> sp;
    if (dense) sp = std::make_unique<Spectrum>(h);
    if (cfg.kappa > 0.0) {
      if (!sp) throw BudgetError("energy cutoff needs a dense spectrum; N-body dimension too large");
      psi = cutoff_initial_data(psi, *sp, cfg.kappa).state;
    }
    const double epp = h.energy(psi) / n;
    const double fact = trace_norm(marginal(psi, 1) - phi1);
    for (std::size_t i = 0; i < cfg.times.size(); ++i) {
      const double t = cfg.times[i];
      const NBodyState st =
          sp ? NBodyState{lat, n, sp->evolve(psi.amplitudes, t)} : nbody_evolve(psi, h, t, EvolveMethod::krylov);
      ChaosRow row;
      row.particles = n;
      row.t = t;
      row.trace_dist_k1 = trace_norm(marginal(st, 1) - factorized_state(flow[i], 1));
      if (cfg.second_marginal && n >= 2)
        row.trace_dist_k2 = trace_norm(marginal(st, 2) - factorized_state(flow[i], 2));
      row.energy_per_particle = epp;
      row.asympt_fact_dist = fact;
      row.kappa = cfg.kappa;
      row.beta = cfg.beta;
      row.cutoff = lat.cutoff();
      row.dt = cfg.dt;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace gph
