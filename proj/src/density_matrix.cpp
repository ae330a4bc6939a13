#include "gph/density_matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "gph/errors.hpp"

namespace gph {

namespace {

std::atomic<std::size_t> g_budget{std::size_t{1} << 24};

// Per-multi-index sum over slots of a per-mode quantity.
Eigen::VectorXd slot_sum(const ModeLattice& lat, int order, auto&& per_mode) {
  const auto L = static_cast<Eigen::Index>(lat.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(1);
  for (int s = 0; s < order; ++s) {
    Eigen::VectorXd next(out.size() * L);
    for (Eigen::Index i = 0; i < out.size(); ++i)
      for (Eigen::Index m = 0; m < L; ++m) next(i * L + m) = out(i) + per_mode(std::size_t(m));
    out = std::move(next);
  }
  return out;
}

Eigen::VectorXd slot_product(const ModeLattice& lat, int order, auto&& per_mode) {
  const auto L = static_cast<Eigen::Index>(lat.size());
  Eigen::VectorXd out = Eigen::VectorXd::Ones(1);
  for (int s = 0; s < order; ++s) {
    Eigen::VectorXd next(out.size() * L);
    for (Eigen::Index i = 0; i < out.size(); ++i)
      for (Eigen::Index m = 0; m < L; ++m) next(i * L + m) = out(i) * per_mode(std::size_t(m));
    out = std::move(next);
  }
  return out;
}

Eigen::VectorXd energies(const ModeLattice& lat, int order) {
  return slot_sum(lat, order, [&](std::size_t m) { return double(lat.norm_sq(m)); });
}

void require_same(const DensityMatrix& a, const DensityMatrix& b, const char* what) {
  if (!(a.lattice() == b.lattice()) || a.order() != b.order())
    throw ShapeError(std::string("lattice or order mismatch in ") + what);
}

}  // namespace

std::size_t dense_budget() noexcept { return g_budget.load(); }
void set_dense_budget(std::size_t entries) noexcept { g_budget.store(entries); }

Eigen::Index checked_dim(const ModeLattice& lattice, int order) {
  if (order < 1) throw ConfigError("density matrix order must be >= 1");
  double dim = 1.0;
  for (int i = 0; i < order; ++i) dim *= double(lattice.size());
  if (dim * dim > double(dense_budget()))
    throw BudgetError("dense order-" + std::to_string(order) + " matrix at M=" +
                      std::to_string(lattice.cutoff()) + " needs " + std::to_string(dim * dim) +
                      " entries (budget " + std::to_string(dense_budget()) +
                      "); use a smaller M or k, or the separable representation");
  return static_cast<Eigen::Index>(dim);
}

DensityMatrix::DensityMatrix(const ModeLattice& lattice, int order)
    : lattice_(lattice), order_(order) {
  const Eigen::Index d = checked_dim(lattice, order);
  coeffs_ = Eigen::MatrixXcd::Zero(d, d);
}

DensityMatrix::DensityMatrix(const ModeLattice& lattice, int order, Eigen::MatrixXcd coeffs)
    : lattice_(lattice), order_(order), coeffs_(std::move(coeffs)) {
  const Eigen::Index d = checked_dim(lattice, order);
  if (coeffs_.rows() != d || coeffs_.cols() != d)
    throw ShapeError("coefficient matrix does not match order " + std::to_string(order));
}

Eigen::MatrixXcd DensityMatrix::operator_matrix() const {
  return coeffs_ * std::pow(kCellVolume, -order_);
}

std::vector<std::size_t> DensityMatrix::split(Eigen::Index multi) const {
  std::vector<std::size_t> out(static_cast<std::size_t>(order_));
  auto m = static_cast<std::size_t>(multi);
  for (int s = order_ - 1; s >= 0; --s) {
    out[std::size_t(s)] = m % lattice_.size();
    m /= lattice_.size();
  }
  return out;
}

Eigen::Index DensityMatrix::join(std::span<const std::size_t> slots) const {
  std::size_t m = 0;
  for (auto s : slots) m = m * lattice_.size() + s;
  return static_cast<Eigen::Index>(m);
}

DensityMatrix& DensityMatrix::operator+=(const DensityMatrix& o) {
  require_same(*this, o, "sum");
  coeffs_ += o.coeffs_;
  return *this;
}
DensityMatrix& DensityMatrix::operator-=(const DensityMatrix& o) {
  require_same(*this, o, "difference");
  coeffs_ -= o.coeffs_;
  return *this;
}
DensityMatrix& DensityMatrix::operator*=(cplx s) {
  coeffs_ *= s;
  return *this;
}
DensityMatrix operator+(DensityMatrix a, const DensityMatrix& b) { return a += b; }
DensityMatrix operator-(DensityMatrix a, const DensityMatrix& b) { return a -= b; }
DensityMatrix operator*(cplx s, DensityMatrix a) { return a *= s; }

DensityMatrix outer(const TorusField& f, const TorusField& g) {
  if (!(f.lattice() == g.lattice())) throw ShapeError("lattice mismatch in outer product");
  const auto L = static_cast<Eigen::Index>(f.size());
  Eigen::Map<const Eigen::VectorXcd> a(f.data().data(), L), b(g.data().data(), L);
  return DensityMatrix(f.lattice(), 1, a * b.adjoint());
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.lattice() == b.lattice())) throw ShapeError("lattice mismatch in tensor product");
  DensityMatrix out(a.lattice(), a.order() + b.order());
  const Eigen::Index db = b.dim();
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    for (Eigen::Index j = 0; j < a.dim(); ++j)
      out.coeffs().block(i * db, j * db, db, db) = a.coeffs()(i, j) * b.coeffs();
  return out;
}

DensityMatrix factorized_state(const TorusField& phi, int k) {
  checked_dim(phi.lattice(), k);
  const DensityMatrix one = outer(phi, phi);
  DensityMatrix out = one;
  for (int i = 1; i < k; ++i) out = tensor_product(out, one);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& gamma, int k) {
  if (k < 1 || k >= gamma.order())
    throw ConfigError("partial trace needs 1 <= k < order, got k=" + std::to_string(k));
  DensityMatrix out(gamma.lattice(), k);
  const Eigen::Index inner = gamma.dim() / out.dim();
  const double scale = std::pow(kCellVolume, -(gamma.order() - k));
  for (Eigen::Index r = 0; r < out.dim(); ++r)
    for (Eigen::Index c = 0; c < out.dim(); ++c) {
      cplx acc{};
      for (Eigen::Index t = 0; t < inner; ++t) acc += gamma.coeffs()(r * inner + t, c * inner + t);
      out.coeffs()(r, c) = acc * scale;
    }
  return out;
}

cplx trace(const DensityMatrix& gamma) {
  return gamma.coeffs().trace() * std::pow(kCellVolume, -gamma.order());
}

double trace_norm(const DensityMatrix& gamma) {
  const Eigen::MatrixXcd a = gamma.operator_matrix();
  if ((a - a.adjoint()).norm() <= 1e-14 * a.norm()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues().sum();
}

double hs_norm(const DensityMatrix& gamma) { return gamma.operator_matrix().norm(); }

Eigen::VectorXd operator_eigenvalues(const DensityMatrix& gamma) {
  const Eigen::MatrixXcd a = gamma.operator_matrix();
  const Eigen::MatrixXcd h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

DensityMatrix sobolev_weight(const DensityMatrix& gamma, double alpha) {
  const ModeLattice& lat = gamma.lattice();
  const Eigen::VectorXd w =
      slot_product(lat, gamma.order(), [&](std::size_t m) { return std::pow(lat.bracket(m), alpha); });
  DensityMatrix out = gamma;
  out.coeffs() = w.asDiagonal() * gamma.coeffs() * w.asDiagonal();
  return out;
}

DensityMatrix free_evolve(const DensityMatrix& gamma, double t) {
  const Eigen::VectorXd e = energies(gamma.lattice(), gamma.order());
  Eigen::VectorXcd ph(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) ph(i) = std::polar(1.0, -t * e(i));
  DensityMatrix out = gamma;
  out.coeffs() = ph.asDiagonal() * gamma.coeffs() * ph.conjugate().asDiagonal();
  return out;
}

DensityMatrix laplacian_commutator(const DensityMatrix& gamma) {
  const Eigen::VectorXd e = energies(gamma.lattice(), gamma.order());
  DensityMatrix out = gamma;
  for (Eigen::Index c = 0; c < e.size(); ++c)
    for (Eigen::Index r = 0; r < e.size(); ++r) out.coeffs()(r, c) *= e(c) - e(r);
  return out;
}

DensityMatrix permute_slots(const DensityMatrix& gamma, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != gamma.order()) throw ShapeError("permutation length != order");
  std::vector<int> check(perm.begin(), perm.end());
  std::sort(check.begin(), check.end());
  for (int i = 0; i < gamma.order(); ++i)
    if (check[std::size_t(i)] != i) throw ConfigError("not a permutation of 0..k-1");
  std::vector<Eigen::Index> map(static_cast<std::size_t>(gamma.dim()));
  std::vector<std::size_t> out_slots(perm.size());
  for (Eigen::Index m = 0; m < gamma.dim(); ++m) {
    const auto in = gamma.split(m);
    for (std::size_t j = 0; j < perm.size(); ++j) out_slots[j] = in[std::size_t(perm[j])];
    map[std::size_t(m)] = gamma.join(out_slots);
  }
  DensityMatrix out(gamma.lattice(), gamma.order());
  for (Eigen::Index c = 0; c < gamma.dim(); ++c)
    for (Eigen::Index r = 0; r < gamma.dim(); ++r)
      out.coeffs()(map[std::size_t(r)], map[std::size_t(c)]) = gamma.coeffs()(r, c);
  return out;
}

double hermiticity_defect(const DensityMatrix& gamma) {
  return (gamma.coeffs() - gamma.coeffs().adjoint()).cwiseAbs().maxCoeff();
}

double symmetry_defect(const DensityMatrix& gamma) {
  double worst = 0.0;
  std::vector<int> perm(static_cast<std::size_t>(gamma.order()));
  for (int s = 0; s + 1 < gamma.order(); ++s) {
    std::iota(perm.begin(), perm.end(), 0);
    std::swap(perm[std::size_t(s)], perm[std::size_t(s) + 1]);
    worst = std::max(worst, (permute_slots(gamma, perm).coeffs() - gamma.coeffs()).cwiseAbs().maxCoeff());
  }
  return worst;
}

void validate_sequence(const HierarchySequence& seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].order() != static_cast<int>(i) + 1)
      throw ShapeError("hierarchy orders must be consecutive from 1");
    if (!(seq[i].lattice() == seq.front().lattice()))
      throw ShapeError("hierarchy entries must share one lattice");
  }
}

std::vector<TestPair> eta_test_family(const ModeLattice& lattice, int k, int count) {
  if (k < 1 || count < 1) throw ConfigError("test family needs k >= 1 and count >= 1");
  // Enough low multi-indices to form `count` pairs.
  std::size_t need = 1;
  while (need * need < static_cast<std::size_t>(count)) ++need;
  std::vector<std::size_t> by_energy(lattice.size());
  std::iota(by_energy.begin(), by_energy.end(), std::size_t{0});
  std::stable_sort(by_energy.begin(), by_energy.end(), [&](std::size_t a, std::size_t b) {
    return lattice.norm_sq(a) < lattice.norm_sq(b);
  });
  // Multi-indices over the `need` lowest one-particle modes, sorted by energy.
  const std::size_t base = std::min(need, lattice.size());
  std::vector<std::vector<std::size_t>> multis{{}};
  for (int s = 0; s < k; ++s) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& m : multis)
      for (std::size_t j = 0; j < base; ++j) {
        auto e = m;
        e.push_back(by_energy[j]);
        next.push_back(std::move(e));
      }
    multis = std::move(next);
  }
  auto energy = [&](const std::vector<std::size_t>& m) {
    int e = 0;
    for (auto i : m) e += lattice.norm_sq(i);
    return e;
  };
  std::stable_sort(multis.begin(), multis.end(),
                   [&](const auto& a, const auto& b) { return energy(a) < energy(b); });
  multis.resize(std::min(multis.size(), need));
  std::vector<TestPair> out;
  for (std::size_t level = 0; level < multis.size() && out.size() < std::size_t(count); ++level) {
    for (std::size_t i = 0; i <= level && out.size() < std::size_t(count); ++i) {
      out.push_back({multis[i], multis[level]});
      if (i != level && out.size() < std::size_t(count)) out.push_back({multis[level], multis[i]});
    }
  }
  return out;
}

cplx matrix_element(const DensityMatrix& gamma, std::span<const std::size_t> b,
                    std::span<const std::size_t> a) {
  return gamma.coeffs()(gamma.join(b), gamma.join(a)) * std::pow(kCellVolume, -gamma.order());
}

HierarchyMetrics hierarchy_metrics(const HierarchySequence& g1, const HierarchySequence& g2,
                                   int family_size) {
  validate_sequence(g1);
  validate_sequence(g2);
  if (g1.size() != g2.size()) throw ShapeError("hierarchy lengths differ");
  HierarchyMetrics m;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const DensityMatrix d = g1[i] - g2[i];
    const int k = d.order();
    const double hs = hs_norm(d);
    m.h_minus += std::ldexp(hs * hs, -k);
    double eta = 0.0;
    const auto fam = eta_test_family(d.lattice(), k, family_size);
    for (std::size_t l = 0; l < fam.size(); ++l)
      eta += std::ldexp(std::abs(matrix_element(d, fam[l].b, fam[l].a)), -int(l + 1));
    m.eta.push_back(eta);
  }
  return m;
}

}  // namespace gph
