#pragma once

// Duhamel integrands J^k(phi; sigma; t, t_1..t_r) of the hierarchy expansion,
// their factorization over the tree forest of sigma, and the recursive
// (chi, psi) tableau of the one-particle kernels.

#include <optional>
#include <span>
#include <vector>

#include "gph/boardgame.hpp"
#include "gph/collision.hpp"
#include "gph/errors.hpp"
#include "gph/separable.hpp"

namespace gph {

/// Time arguments of an integrand. Leaves carry phi at data_time when it is
/// set, otherwise at t_r (at 0 when r = 0, giving U(t) on the initial state).
struct DuhamelTimes {
  double t = 0.0;
  std::vector<double> times;  ///< t_1..t_r
  std::optional<double> data_time;

  double at(int l) const { return l == 0 ? t : times.at(std::size_t(l - 1)); }
  double leaf_time() const {
    if (data_time) return *data_time;
    return times.empty() ? 0.0 : times.back();
  }
};

/// U(t - t_1) B_{sigma(k+1),k+1} U(t_1 - t_2) ... B_{sigma(k+r),k+r} applied to
/// an order-(k+r) state given at the leaf time; rightmost operator first.
template <class Dm>
Dm compose_duhamel(Dm state, const CollisionMap& sigma, const DuhamelTimes& tm) {
  const int k = sigma.k(), r = sigma.r();
  if (state.order() != k + r) throw ShapeError("Duhamel composition needs an order-(k+r) state");
  if (static_cast<int>(tm.times.size()) != r) throw ConfigError("need r time variables");
  state = free_evolve(state, tm.at(r) - tm.leaf_time());
  for (int l = r; l >= 1; --l) {
    state = collision_apply(state, sigma(k + l));
    state = free_evolve(state, tm.at(l - 1) - tm.at(l));
  }
  return state;
}

/// J^k on |phi><phi|^{tensor(k+r)}.
SeparableDensityMatrix evaluate_duhamel_integrand(const CollisionMap& sigma, const TorusField& phi,
                                                  const DuhamelTimes& tm);
/// Same on dense matrices; throws BudgetError beyond the dense budget.
DensityMatrix evaluate_duhamel_integrand_dense(const CollisionMap& sigma, const TorusField& phi,
                                               const DuhamelTimes& tm);

struct TreeFactors {
  std::vector<SeparableDensityMatrix> factors;  ///< J^1_j, j = 1..k
  SeparableDensityMatrix product;               ///< J^1_1 (x) ... (x) J^1_k
};

/// Each J^1_j composed inside its own tree with the internal map sigma_j and
/// the time labels of the tree.
TreeFactors evaluate_tree_factors(const TreeForest& forest, const TorusField& phi, const DuhamelTimes& tm);

struct ThetaTerm {
  cplx c;
  FieldPtr chi;
  FieldPtr psi;
  bool chi_distinguished = false;  ///< chi depends on psi~ = P(|phi|^2 phi)
  bool psi_distinguished = false;
};

struct ThetaVertex {
  int label = 0;  ///< l of v_l
  int a = 0;      ///< position in the tree: l = l_{j,a}
  std::vector<ThetaTerm> terms;
  std::size_t bound = 0;  ///< 2^{m_j - a + 1}
};

struct ThetaTableau {
  int tree = 0;
  std::vector<ThetaVertex> vertices;  ///< a = 1..m_j
  /// Terms at the top of the tree before the last propagation; for a
  /// leaf-only tree the single leaf term.
  std::vector<ThetaTerm> top;
  double top_time = 0.0;

  /// U(t - top_time) applied to sum of the top terms, i.e. J^1_j.
  LowRankKernel resum(double t) const;
};

/// Bottom-up expansion of tree j (1-based) of the forest.
ThetaTableau expand_theta_kernels(const TreeForest& forest, int j, const TorusField& phi,
                                  const DuhamelTimes& tm);

}  // namespace gph
