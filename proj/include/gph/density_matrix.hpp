#pragma once

// Dense order-k density matrices on the truncated lattice.
//
// Coefficients gamma_hat(n_1..n_k; n'_1..n'_k) are stored as an L^k x L^k
// matrix (L = lattice size): row = unprimed multi-index, column = primed, slot
// 1 most significant. In the orthonormal basis e_n = (2 pi)^{-3/2} e^{i<n,x>}
// the operator matrix is (2 pi)^{-3k} gamma_hat.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "gph/torus.hpp"

namespace gph {

/// Upper limit on stored complex entries per dense object.
std::size_t dense_budget() noexcept;
void set_dense_budget(std::size_t entries) noexcept;

class DensityMatrix {
 public:
  /// Zero matrix. Throws ConfigError for order < 1 and BudgetError when
  /// L^{2k} exceeds dense_budget().
  DensityMatrix(const ModeLattice& lattice, int order);
  DensityMatrix(const ModeLattice& lattice, int order, Eigen::MatrixXcd coeffs);

  const ModeLattice& lattice() const noexcept { return lattice_; }
  int order() const noexcept { return order_; }
  Eigen::Index dim() const noexcept { return coeffs_.rows(); }
  const Eigen::MatrixXcd& coeffs() const noexcept { return coeffs_; }
  Eigen::MatrixXcd& coeffs() noexcept { return coeffs_; }

  /// (2 pi)^{-3k} gamma_hat.
  Eigen::MatrixXcd operator_matrix() const;

  /// Lattice indices of the k slots of a multi-index.
  std::vector<std::size_t> split(Eigen::Index multi) const;
  Eigen::Index join(std::span<const std::size_t> slots) const;

  DensityMatrix& operator+=(const DensityMatrix& o);
  DensityMatrix& operator-=(const DensityMatrix& o);
  DensityMatrix& operator*=(cplx s);

 private:
  ModeLattice lattice_;
  int order_;
  Eigen::MatrixXcd coeffs_;
};

DensityMatrix operator+(DensityMatrix a, const DensityMatrix& b);
DensityMatrix operator-(DensityMatrix a, const DensityMatrix& b);
DensityMatrix operator*(cplx s, DensityMatrix a);

/// Number of multi-indices L^k; throws BudgetError if the square exceeds the budget.
Eigen::Index checked_dim(const ModeLattice& lattice, int order);

/// |f><g| as an order-1 matrix.
DensityMatrix outer(const TorusField& f, const TorusField& g);
/// |phi><phi|^{tensor k}.
DensityMatrix factorized_state(const TorusField& phi, int k);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

/// Traces out the last order-k slots. Throws ConfigError unless 1 <= k < order.
DensityMatrix partial_trace(const DensityMatrix& gamma, int k);
cplx trace(const DensityMatrix& gamma);
/// Sum of singular values of the operator.
double trace_norm(const DensityMatrix& gamma);
/// L^2 norm of the kernel (= Hilbert-Schmidt norm of the operator).
double hs_norm(const DensityMatrix& gamma);
/// Eigenvalues of the Hermitian part of the operator, ascending.
Eigen::VectorXd operator_eigenvalues(const DensityMatrix& gamma);

/// Multiplies by prod_j <n_j>^alpha <n'_j>^alpha.
DensityMatrix sobolev_weight(const DensityMatrix& gamma, double alpha);
/// U^{(k)}(t) gamma: phase e^{-it(sum |n_j|^2 - sum |n'_j|^2)}.
DensityMatrix free_evolve(const DensityMatrix& gamma, double t);
/// (Lap_x - Lap_x') gamma: multiplier -sum |n_j|^2 + sum |n'_j|^2.
DensityMatrix laplacian_commutator(const DensityMatrix& gamma);

/// Relabels particles: slot j of the output is slot perm[j] of the input.
DensityMatrix permute_slots(const DensityMatrix& gamma, std::span<const int> perm);
/// max |gamma_hat(n;n') - conj gamma_hat(n';n)|.
double hermiticity_defect(const DensityMatrix& gamma);
/// max over transpositions of adjacent slots of the entrywise change.
double symmetry_defect(const DensityMatrix& gamma);

using HierarchySequence = std::vector<DensityMatrix>;
/// Throws ShapeError unless orders are 1..K on one lattice.
void validate_sequence(const HierarchySequence& seq);

/// Rank-one test operators |e_a><e_b| over k-particle exponentials, ordered by
/// total kinetic energy; the l-th pair (0-based) of the fixed family.
struct TestPair {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};
std::vector<TestPair> eta_test_family(const ModeLattice& lattice, int k, int count = 32);

struct HierarchyMetrics {
  double h_minus = 0.0;
  std::vector<double> eta;
};
/// h_minus = sum_k 2^{-k} ||gamma1 - gamma2||_HS^2 and
/// eta_k = sum_l 2^{-l} |Tr J_l (gamma1 - gamma2)| over the fixed test family.
HierarchyMetrics hierarchy_metrics(const HierarchySequence& g1, const HierarchySequence& g2,
                                   int family_size = 32);

/// <e_b| gamma |e_a> for multi-indices given as lattice indices per slot.
cplx matrix_element(const DensityMatrix& gamma, std::span<const std::size_t> b,
                    std::span<const std::size_t> a);

}  // namespace gph
