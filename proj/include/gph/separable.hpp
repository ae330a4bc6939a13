#pragma once

// Density matrices as finite sums of tensor products of low-rank one-particle
// kernels:  gamma = sum_i w_i  A_{i,1} (x) ... (x) A_{i,k},  with
// A = sum_a c_a |chi_a><psi_a|.  Factorized states, de Finetti mixtures and
// every Duhamel integrand stay in this class, which makes orders and cutoffs
// reachable that a dense L^k x L^k matrix cannot hold.

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

#include "gph/density_matrix.hpp"
#include "gph/torus.hpp"

namespace gph {

using FieldPtr = std::shared_ptr<const TorusField>;

FieldPtr share(TorusField f);

struct KernelTerm {
  cplx c;
  FieldPtr chi;
  FieldPtr psi;
};

/// sum_a c_a |chi_a><psi_a|.
class LowRankKernel {
 public:
  explicit LowRankKernel(const ModeLattice& lattice) : lattice_(lattice) {}
  static LowRankKernel rank_one(const FieldPtr& chi, const FieldPtr& psi, cplx c = 1.0);

  const ModeLattice& lattice() const noexcept { return lattice_; }
  const std::vector<KernelTerm>& terms() const noexcept { return terms_; }
  std::size_t rank_bound() const noexcept { return terms_.size(); }
  void add(cplx c, FieldPtr chi, FieldPtr psi);
  void append(const LowRankKernel& other, cplx scale = 1.0);

  cplx trace() const;
  /// A(x;x) on the padded grid.
  GridField diagonal() const;
  DensityMatrix to_dense() const;

 private:
  ModeLattice lattice_;
  std::vector<KernelTerm> terms_;
};

LowRankKernel free_evolve(const LowRankKernel& a, double t);
LowRankKernel sobolev_weight(const LowRankKernel& a, double alpha);
LowRankKernel laplacian_commutator(const LowRankKernel& a);
/// g A - A g for a multiplier g on the padded grid, truncated to the lattice.
LowRankKernel multiplier_commutator(const LowRankKernel& a, const GridField& g);

using ProductState = std::vector<LowRankKernel>;

struct ProductTerm {
  cplx weight;
  ProductState slots;
};

class SeparableDensityMatrix {
 public:
  SeparableDensityMatrix(const ModeLattice& lattice, int order);
  static SeparableDensityMatrix from_product(ProductState slots, cplx weight = 1.0);
  /// |phi><phi|^{tensor k}, one shared field for all slots.
  static SeparableDensityMatrix factorized(const TorusField& phi, int k);

  const ModeLattice& lattice() const noexcept { return lattice_; }
  int order() const noexcept { return order_; }
  const std::vector<ProductTerm>& terms() const noexcept { return terms_; }
  std::vector<ProductTerm>& terms() noexcept { return terms_; }

  void add(cplx weight, ProductState slots);
  SeparableDensityMatrix& operator+=(const SeparableDensityMatrix& o);
  SeparableDensityMatrix& operator-=(const SeparableDensityMatrix& o);
  SeparableDensityMatrix& operator*=(cplx s);

 private:
  ModeLattice lattice_;
  int order_;
  std::vector<ProductTerm> terms_;
};

SeparableDensityMatrix operator+(SeparableDensityMatrix a, const SeparableDensityMatrix& b);
SeparableDensityMatrix operator-(SeparableDensityMatrix a, const SeparableDensityMatrix& b);
SeparableDensityMatrix operator*(cplx s, SeparableDensityMatrix a);

SeparableDensityMatrix tensor_product(const SeparableDensityMatrix& a, const SeparableDensityMatrix& b);
SeparableDensityMatrix free_evolve(const SeparableDensityMatrix& g, double t);
SeparableDensityMatrix sobolev_weight(const SeparableDensityMatrix& g, double alpha);
SeparableDensityMatrix laplacian_commutator(const SeparableDensityMatrix& g);
SeparableDensityMatrix partial_trace(const SeparableDensityMatrix& g, int k);
SeparableDensityMatrix permute_slots(const SeparableDensityMatrix& g, std::span<const int> perm);
/// B_{j,k+1} with the last slot traced against delta(x_j - x_{k+1}).
SeparableDensityMatrix collision_apply(const SeparableDensityMatrix& g, int j);
SeparableDensityMatrix full_collision(const SeparableDensityMatrix& g);

cplx trace(const SeparableDensityMatrix& g);
cplx matrix_element(const SeparableDensityMatrix& g, std::span<const std::size_t> b,
                    std::span<const std::size_t> a);
DensityMatrix to_dense(const SeparableDensityMatrix& g);

/// Dense core of g in orthonormal bases of the per-slot ket and bra spans.
/// It has the same singular values as the operator g. Throws BudgetError when
/// the core exceeds the dense budget.
Eigen::MatrixXcd compressed_core(const SeparableDensityMatrix& g);
double hs_norm(const SeparableDensityMatrix& g);
double trace_norm(const SeparableDensityMatrix& g);

}  // namespace gph
