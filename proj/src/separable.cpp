#include "gph/separable.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>

#include "gph/errors.hpp"
#include "gph/nls.hpp"

namespace gph {

namespace {

// Maps each distinct input field to one transformed field, so shared factors
// stay shared after a slot-wise linear map.
class FieldMap {
 public:
  template <class F>
  explicit FieldMap(F f) : f_(std::move(f)) {}
  FieldPtr operator()(const FieldPtr& in) {
    auto [it, fresh] = cache_.try_emplace(in.get());
    if (fresh) it->second = share(f_(*in));
    return it->second;
  }

 private:
  std::function<TorusField(const TorusField&)> f_;
  std::unordered_map<const TorusField*, FieldPtr> cache_;
};

LowRankKernel map_fields(const LowRankKernel& a, FieldMap& m) {
  LowRankKernel out(a.lattice());
  for (const auto& t : a.terms()) out.add(t.c, m(t.chi), m(t.psi));
  return out;
}

SeparableDensityMatrix map_all(const SeparableDensityMatrix& g, FieldMap& m) {
  SeparableDensityMatrix out(g.lattice(), g.order());
  for (const auto& term : g.terms()) {
    ProductState slots;
    slots.reserve(term.slots.size());
    for (const auto& s : term.slots) slots.push_back(map_fields(s, m));
    out.add(term.weight, std::move(slots));
  }
  return out;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

FieldPtr share(TorusField f) { return std::make_shared<const TorusField>(std::move(f)); }

LowRankKernel LowRankKernel::rank_one(const FieldPtr& chi, const FieldPtr& psi, cplx c) {
  LowRankKernel k(chi->lattice());
  k.add(c, chi, psi);
  return k;
}

void LowRankKernel::add(cplx c, FieldPtr chi, FieldPtr psi) {
  if (!(chi->lattice() == lattice_) || !(psi->lattice() == lattice_))
    throw ShapeError("kernel term on a different lattice");
  terms_.push_back({c, std::move(chi), std::move(psi)});
}

void LowRankKernel::append(const LowRankKernel& other, cplx scale) {
  if (!(other.lattice_ == lattice_)) throw ShapeError("kernel lattice mismatch");
  for (const auto& t : other.terms_) terms_.push_back({scale * t.c, t.chi, t.psi});
}

cplx LowRankKernel::trace() const {
  cplx acc{};
  for (const auto& t : terms_) acc += t.c * inner_product(*t.psi, *t.chi);
  return acc;
}

GridField LowRankKernel::diagonal() const {
  GridField g(lattice_.padded_grid());
  for (const auto& t : terms_) {
    const GridField a = to_grid(*t.chi);
    const GridField b = t.psi == t.chi ? a : to_grid(*t.psi);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += t.c * a[i] * std::conj(b[i]);
  }
  return g;
}

DensityMatrix LowRankKernel::to_dense() const {
  DensityMatrix out(lattice_, 1);
  for (const auto& t : terms_) out += t.c * outer(*t.chi, *t.psi);
  return out;
}

LowRankKernel free_evolve(const LowRankKernel& a, double t) {
  if (t == 0.0) return a;
  FieldMap m([t](const TorusField& f) { return free_propagate(f, t); });
  return map_fields(a, m);
}

LowRankKernel sobolev_weight(const LowRankKernel& a, double alpha) {
  FieldMap m([alpha](const TorusField& f) {
    TorusField out = f;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::pow(f.lattice().bracket(i), alpha);
    return out;
  });
  return map_fields(a, m);
}

LowRankKernel laplacian_commutator(const LowRankKernel& a) {
  FieldMap lap([](const TorusField& f) { return laplacian(f); });
  LowRankKernel out(a.lattice());
  for (const auto& t : a.terms()) {
    out.add(t.c, lap(t.chi), t.psi);
    out.add(-t.c, t.chi, lap(t.psi));
  }
  return out;
}

LowRankKernel multiplier_commutator(const LowRankKernel& a, const GridField& g) {
  GridField gc = g;
  for (auto& v : gc.values()) v = std::conj(v);
  FieldMap left([&g](const TorusField& f) { return multiply_by_grid(f, g); });
  FieldMap right([&gc](const TorusField& f) { return multiply_by_grid(f, gc); });
  LowRankKernel out(a.lattice());
  for (const auto& t : a.terms()) {
    out.add(t.c, left(t.chi), t.psi);
    out.add(-t.c, t.chi, right(t.psi));
  }
  return out;
}

SeparableDensityMatrix::SeparableDensityMatrix(const ModeLattice& lattice, int order)
    : lattice_(lattice), order_(order) {
  if (order < 1) throw ConfigError("density matrix order must be >= 1");
}

SeparableDensityMatrix SeparableDensityMatrix::from_product(ProductState slots, cplx weight) {
  if (slots.empty()) throw ConfigError("product state needs at least one slot");
  SeparableDensityMatrix g(slots.front().lattice(), static_cast<int>(slots.size()));
  g.add(weight, std::move(slots));
  return g;
}

SeparableDensityMatrix SeparableDensityMatrix::factorized(const TorusField& phi, int k) {
  const FieldPtr p = share(phi);
  return from_product(ProductState(static_cast<std::size_t>(k), LowRankKernel::rank_one(p, p)));
}

void SeparableDensityMatrix::add(cplx weight, ProductState slots) {
  if (static_cast<int>(slots.size()) != order_) throw ShapeError("product term has wrong order");
  for (const auto& s : slots)
    if (!(s.lattice() == lattice_)) throw ShapeError("product term on a different lattice");
  terms_.push_back({weight, std::move(slots)});
}

SeparableDensityMatrix& SeparableDensityMatrix::operator+=(const SeparableDensityMatrix& o) {
  if (!(o.lattice_ == lattice_) || o.order_ != order_) throw ShapeError("lattice or order mismatch in sum");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

SeparableDensityMatrix& SeparableDensityMatrix::operator-=(const SeparableDensityMatrix& o) {
  if (!(o.lattice_ == lattice_) || o.order_ != order_)
    throw ShapeError("lattice or order mismatch in difference");
  for (const auto& t : o.terms_) terms_.push_back({-t.weight, t.slots});
  return *this;
}

SeparableDensityMatrix& SeparableDensityMatrix::operator*=(cplx s) {
  for (auto& t : terms_) t.weight *= s;
  return *this;
}

SeparableDensityMatrix operator+(SeparableDensityMatrix a, const SeparableDensityMatrix& b) { return a += b; }
SeparableDensityMatrix operator-(SeparableDensityMatrix a, const SeparableDensityMatrix& b) { return a -= b; }
SeparableDensityMatrix operator*(cplx s, SeparableDensityMatrix a) { return a *= s; }

SeparableDensityMatrix tensor_product(const SeparableDensityMatrix& a, const SeparableDensityMatrix& b) {
  if (!(a.lattice() == b.lattice())) throw ShapeError("lattice mismatch in tensor product");
  SeparableDensityMatrix out(a.lattice(), a.order() + b.order());
  for (const auto& x : a.terms())
    for (const auto& y : b.terms()) {
      ProductState s = x.slots;
      s.insert(s.end(), y.slots.begin(), y.slots.end());
      out.add(x.weight * y.weight, std::move(s));
    }
  return out;
}

SeparableDensityMatrix free_evolve(const SeparableDensityMatrix& g, double t) {
  if (t == 0.0) return g;
  FieldMap m([t](const TorusField& f) { return free_propagate(f, t); });
  return map_all(g, m);
}

SeparableDensityMatrix sobolev_weight(const SeparableDensityMatrix& g, double alpha) {
  FieldMap m([alpha](const TorusField& f) {
    TorusField out = f;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::pow(f.lattice().bracket(i), alpha);
    return out;
  });
  return map_all(g, m);
}

SeparableDensityMatrix laplacian_commutator(const SeparableDensityMatrix& g) {
  SeparableDensityMatrix out(g.lattice(), g.order());
  for (const auto& term : g.terms())
    for (int s = 0; s < g.order(); ++s) {
      ProductState slots = term.slots;
      slots[std::size_t(s)] = laplacian_commutator(term.slots[std::size_t(s)]);
      out.add(term.weight, std::move(slots));
    }
  return out;
}

SeparableDensityMatrix partial_trace(const SeparableDensityMatrix& g, int k) {
  if (k < 1 || k >= g.order())
    throw ConfigError("partial trace needs 1 <= k < order, got k=" + std::to_string(k));
  SeparableDensityMatrix out(g.lattice(), k);
  for (const auto& term : g.terms()) {
    cplx w = term.weight;
    for (std::size_t s = std::size_t(k); s < term.slots.size(); ++s) w *= term.slots[s].trace();
    out.add(w, ProductState(term.slots.begin(), term.slots.begin() + k));
  }
  return out;
}

SeparableDensityMatrix permute_slots(const SeparableDensityMatrix& g, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != g.order()) throw ShapeError("permutation length != order");
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || p >= g.order() || seen[std::size_t(p)]) throw ConfigError("not a permutation of 0..k-1");
    seen[std::size_t(p)] = true;
  }
  SeparableDensityMatrix out(g.lattice(), g.order());
  for (const auto& term : g.terms()) {
    ProductState s;
    for (int p : perm) s.push_back(term.slots[std::size_t(p)]);
    out.add(term.weight, std::move(s));
  }
  return out;
}

namespace {

// Grid values of each distinct field, computed once per collision evaluation.
class GridCache {
 public:
  const GridField& operator()(const FieldPtr& f) {
    auto it = cache_.find(f.get());
    if (it == cache_.end()) it = cache_.emplace(f.get(), to_grid(*f)).first;
    return it->second;
  }

 private:
  std::unordered_map<const TorusField*, GridField> cache_;
};

GridField kernel_diagonal(const LowRankKernel& a, GridCache& grids) {
  GridField g(a.lattice().padded_grid());
  for (const auto& t : a.terms()) {
    const GridField& x = grids(t.chi);
    const GridField& y = grids(t.psi);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += t.c * x[i] * std::conj(y[i]);
  }
  return g;
}

// P(g f) or P(conj(g) f), memoised per field.
class GridProduct {
 public:
  GridProduct(const GridField& g, bool conjugate, GridCache& grids)
      : g_(g), conjugate_(conjugate), grids_(grids) {}
  FieldPtr operator()(const FieldPtr& f) {
    auto [it, fresh] = cache_.try_emplace(f.get());
    if (fresh) {
      GridField prod = grids_(f);
      for (std::size_t i = 0; i < prod.size(); ++i) prod[i] *= conjugate_ ? std::conj(g_[i]) : g_[i];
      it->second = share(to_modes(prod, f->lattice()));
    }
    return it->second;
  }

 private:
  const GridField& g_;
  bool conjugate_;
  GridCache& grids_;
  std::unordered_map<const TorusField*, FieldPtr> cache_;
};

SeparableDensityMatrix collide(const SeparableDensityMatrix& g, int first, int last) {
  const int k = g.order() - 1;
  SeparableDensityMatrix out(g.lattice(), k);
  GridCache grids;
  for (const auto& term : g.terms()) {
    const GridField diag = kernel_diagonal(term.slots.back(), grids);
    GridProduct left(diag, false, grids), right(diag, true, grids);
    for (int j = first; j <= last; ++j) {
      ProductState slots(term.slots.begin(), term.slots.end() - 1);
      const LowRankKernel& a = slots[std::size_t(j - 1)];
      LowRankKernel b(a.lattice());
      for (const auto& t : a.terms()) {
        b.add(t.c, left(t.chi), t.psi);
        b.add(-t.c, t.chi, right(t.psi));
      }
      slots[std::size_t(j - 1)] = std::move(b);
      out.add(term.weight, std::move(slots));
    }
  }
  return out;
}

}  // namespace

SeparableDensityMatrix collision_apply(const SeparableDensityMatrix& g, int j) {
  const int k = g.order() - 1;
  if (k < 1 || j < 1 || j > k)
    throw ConfigError("collision B_{j,k+1} needs 1 <= j <= k, got j=" + std::to_string(j) +
                      " for order " + std::to_string(g.order()));
  return collide(g, j, j);
}

SeparableDensityMatrix full_collision(const SeparableDensityMatrix& g) {
  if (g.order() < 2) throw ConfigError("full collision needs order >= 2");
  return collide(g, 1, g.order() - 1);
}

cplx trace(const SeparableDensityMatrix& g) {
  cplx acc{};
  for (const auto& term : g.terms()) {
    cplx w = term.weight;
    for (const auto& s : term.slots) w *= s.trace();
    acc += w;
  }
  return acc;
}

cplx matrix_element(const SeparableDensityMatrix& g, std::span<const std::size_t> b,
                    std::span<const std::size_t> a) {
  if (static_cast<int>(a.size()) != g.order() || static_cast<int>(b.size()) != g.order())
    throw ShapeError("multi-index length != order");
  cplx acc{};
  for (const auto& term : g.terms()) {
    cplx w = term.weight;
    for (std::size_t s = 0; s < term.slots.size(); ++s) {
      cplx e{};
      for (const auto& t : term.slots[s].terms()) e += t.c * (*t.chi)[b[s]] * std::conj((*t.psi)[a[s]]);
      w *= e / kCellVolume;
    }
    acc += w;
  }
  return acc;
}

DensityMatrix to_dense(const SeparableDensityMatrix& g) {
  DensityMatrix out(g.lattice(), g.order());
  for (const auto& term : g.terms()) {
    DensityMatrix p = term.slots.front().to_dense();
    for (std::size_t s = 1; s < term.slots.size(); ++s) p = tensor_product(p, term.slots[s].to_dense());
    out += term.weight * p;
  }
  return out;
}

Eigen::MatrixXcd compressed_core(const SeparableDensityMatrix& g) {
  const std::size_t k = static_cast<std::size_t>(g.order());
  const auto L = static_cast<Eigen::Index>(g.lattice().size());
  const double unit = std::pow(kCellVolume, -0.5);
  // Per slot: distinct kets and bras, and the triangular factors of their QR.
  std::vector<std::unordered_map<const TorusField*, Eigen::Index>> ket_ids(k), bra_ids(k);
  std::vector<std::vector<const TorusField*>> kets(k), bras(k);
  for (const auto& term : g.terms())
    for (std::size_t s = 0; s < k; ++s)
      for (const auto& t : term.slots[s].terms()) {
        if (ket_ids[s].try_emplace(t.chi.get(), Eigen::Index(kets[s].size())).second) kets[s].push_back(t.chi.get());
        if (bra_ids[s].try_emplace(t.psi.get(), Eigen::Index(bras[s].size())).second) bras[s].push_back(t.psi.get());
      }
  auto r_factor = [&](const std::vector<const TorusField*>& fs) {
    Eigen::MatrixXcd m(L, Eigen::Index(fs.size()));
    for (std::size_t c = 0; c < fs.size(); ++c)
      for (Eigen::Index i = 0; i < L; ++i) m(i, Eigen::Index(c)) = unit * (*fs[c])[std::size_t(i)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(m.rows(), m.cols());
    qr.setThreshold(1e-14);
    qr.compute(m);
    const Eigen::Index r = std::max<Eigen::Index>(qr.rank(), 1);
    Eigen::MatrixXcd rp = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    return Eigen::MatrixXcd(rp * qr.colsPermutation().transpose());
  };
  std::vector<Eigen::MatrixXcd> rk(k), rb(k);
  double rows = 1, cols = 1;
  for (std::size_t s = 0; s < k; ++s) {
    if (kets[s].empty()) return Eigen::MatrixXcd::Zero(1, 1);
    rk[s] = r_factor(kets[s]);
    rb[s] = r_factor(bras[s]);
    rows *= double(rk[s].rows());
    cols *= double(rb[s].rows());
  }
  if (rows * cols > double(dense_budget()))
    throw BudgetError("compressed core of " + std::to_string(rows) + " x " + std::to_string(cols) +
                      " exceeds the dense budget");
  Eigen::MatrixXcd core = Eigen::MatrixXcd::Zero(Eigen::Index(rows), Eigen::Index(cols));
  for (const auto& term : g.terms()) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Constant(1, 1, term.weight);
    for (std::size_t s = 0; s < k; ++s) {
      Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(Eigen::Index(kets[s].size()), Eigen::Index(bras[s].size()));
      for (const auto& t : term.slots[s].terms())
        c(ket_ids[s].at(t.chi.get()), bra_ids[s].at(t.psi.get())) += t.c;
      acc = kron(acc, rk[s] * c * rb[s].adjoint());
    }
    core += acc;
  }
  return core;
}

double hs_norm(const SeparableDensityMatrix& g) { return compressed_core(g).norm(); }

double trace_norm(const SeparableDensityMatrix& g) {
  const Eigen::MatrixXcd core = compressed_core(g);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(core);
  return svd.singularValues().sum();
}

}  // namespace gph
