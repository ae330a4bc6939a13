#pragma once

// Exact N-boson dynamics on the truncated lattice for
//   H_N = -sum_j Lap_j + (c/N) sum_{l<j} V_N(x_l - x_j),  V_N(x) = N^{3 beta} V(N^beta x),
// reduced density matrices, the BBGKY hierarchy residual, the spectral energy
// cutoff zeta(kappa H_N / N), and the comparison of marginals with the cubic
// NLS flow.
//
// States are stored as amplitudes in the orthonormal basis
// e_{n_1} (x) ... (x) e_{n_N}, e_n = (2 pi)^{-3/2} e^{i<n,x>}, slot 1 most
// significant.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <span>
#include <vector>

#include "gph/density_matrix.hpp"
#include "gph/nls.hpp"
#include "gph/torus.hpp"

namespace gph {

/// Radial C-infinity bump supported in |x| < radius with unit integral,
/// scaled to V_N and periodized.
class ScaledPotential {
 public:
  /// Throws ConfigError unless N >= 1, 0 < beta < 3/5 and radius > 0.
  ScaledPotential(const ModeLattice& lattice, int particles, double beta, double radius = 0.5);

  int particles() const noexcept { return particles_; }
  double beta() const noexcept { return beta_; }
  double radius() const noexcept { return radius_; }
  /// Support radius of V_N.
  double scaled_radius() const noexcept;
  /// True when the support of V_N is not contained in one period cell.
  bool wraps() const noexcept;
  /// Fourier transform of the unscaled profile at |xi|.
  double profile_transform(double xi) const;
  /// Lattice coefficient \int_Lambda V_N(x) e^{-i<q,x>} dx for |q|_inf <= 2M.
  double coefficient(const Mode& q) const;

 private:
  ModeLattice lattice_;
  int particles_;
  double beta_;
  double radius_;
  double norm_;
  std::vector<double> by_norm_sq_;  // coefficient as a function of |q|^2
};

struct NBodyState {
  ModeLattice lattice{1};
  int particles = 1;
  Eigen::VectorXcd amplitudes;

  std::size_t dim() const noexcept { return std::size_t(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
  /// max |Psi - Psi o tau| over adjacent transpositions tau.
  double symmetry_defect() const;
};

/// Largest N-body dimension accepted by nbody_evolve with the Krylov method.
inline constexpr std::size_t kKrylovDimLimit = 10'000'000;
/// Default largest dimension assembled densely (a 4096^2 complex matrix).
inline constexpr std::size_t kDenseDimLimit = 4096;

/// (L^N) with a ConfigError beyond the Krylov limit.
std::size_t nbody_dim(const ModeLattice& lattice, int particles);

/// phi^{tensor N} (phi given as a TorusField, amplitudes (2 pi)^{-3/2} phi_hat).
NBodyState product_state(const TorusField& phi, int particles);

class Hamiltonian {
 public:
  /// coupling multiplies the interaction (1 for H_N, 0 for the free gas).
  Hamiltonian(const ScaledPotential& potential, const ModeLattice& lattice, double coupling = 1.0);

  const ModeLattice& lattice() const noexcept { return lattice_; }
  int particles() const noexcept { return particles_; }
  double coupling() const noexcept { return coupling_; }
  const ScaledPotential& potential() const noexcept { return potential_; }
  std::size_t dim() const noexcept { return dim_; }

  /// out = H in.
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& in) const;
  /// out += W in, for the pair multiplication W = V_N(x_a - x_b) on slots
  /// a, b (0-based) of an m-particle vector (no 1/N, no coupling).
  void apply_pair(const Eigen::VectorXcd& in, Eigen::VectorXcd& out, int m, int a, int b) const;
  /// The same operator as a sparse real symmetric matrix.
  Eigen::SparseMatrix<double> pair_matrix(int m, int a, int b) const;
  /// <Psi, H Psi>.
  double energy(const NBodyState& psi) const;
  /// Dense matrix; throws BudgetError above `limit`.
  Eigen::MatrixXcd dense(std::size_t limit = kDenseDimLimit) const;

 private:
  struct Transfer {
    std::size_t from;
    double weight;
  };
  ScaledPotential potential_;
  ModeLattice lattice_;
  int particles_;
  double coupling_;
  std::size_t dim_;
  std::vector<double> kinetic_;
  // For each pair index a*L+b: the sources (a-q)*L+(b+q) with weights (2 pi)^{-3} V_N-hat(q).
  std::vector<std::vector<Transfer>> pair_;
};

/// Eigen-decomposition of a Hamiltonian, reused for evolution and cutoffs.
class Spectrum {
 public:
  explicit Spectrum(const Hamiltonian& h, std::size_t limit = kDenseDimLimit);
  const Eigen::VectorXd& values() const noexcept { return values_; }
  const Eigen::MatrixXcd& vectors() const noexcept { return vectors_; }
  /// f(H) psi for a real function f of the energy.
  template <class F>
  Eigen::VectorXcd apply(F f, const Eigen::VectorXcd& psi) const {
    Eigen::VectorXcd c = vectors_.adjoint() * psi;
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= f(values_[i]);
    return vectors_ * c;
  }
  Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, double t) const;

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXcd vectors_;
};

enum class EvolveMethod { dense, krylov };

struct KrylovOptions {
  int subspace = 30;
  double tolerance = 1e-13;
};

/// e^{-itH} psi. Throws ConfigError for dimensions beyond the method's limit
/// and GuardError when the Krylov step cannot reach the tolerance.
NBodyState nbody_evolve(const NBodyState& psi, const Hamiltonian& h, double t, EvolveMethod method,
                        const KrylovOptions& opts = {});
/// Samples at the given times (any order), reusing one spectrum for the dense method.
std::vector<NBodyState> nbody_trajectory(const NBodyState& psi, const Hamiltonian& h, std::span<const double> times,
                                         EvolveMethod method, const KrylovOptions& opts = {});

/// gamma^(k) = Tr_{k+1..N} |Psi><Psi| as a DensityMatrix (zero when k > N).
DensityMatrix marginal(const NBodyState& psi, int k);

struct BbgkyTerms {
  double prefactor_pairs = 0.0;      ///< c/N
  double prefactor_collision = 0.0;  ///< c(N-k)/N
};
BbgkyTerms bbgky_prefactors(const Hamiltonian& h, int k);

/// HS norm of
///   i d/dt gamma^(k) + (Lap - Lap') gamma^(k) - (c/N) sum_{l<j<=k} [V_N(x_l - x_j), gamma^(k)]
///   - c (N-k)/N sum_{j<=k} Tr_{k+1} [V_N(x_j - x_{k+1}), gamma^(k+1)]
/// at interior samples of a uniform grid (central differences). `next` may be
/// empty when k = N.
std::vector<double> bbgky_residual(std::span<const DensityMatrix> gamma_k, std::span<const DensityMatrix> next,
                                   std::span<const double> times, const Hamiltonian& h, int k);

struct CutoffResult {
  NBodyState state;
  double distance = 0.0;             ///< ||Psi - Psi~||
  std::vector<double> moments;       ///< <H^j Psi~, Psi~>, j = 1..4
  std::vector<double> moment_bounds; ///< 2^j N^j / kappa^j
  bool property_holds = false;
};

/// zeta(kappa H / N) Psi normalized; zeta = 1 on [0,1], 0 on [2, inf).
/// Throws GuardError when the cutoff annihilates Psi.
CutoffResult cutoff_initial_data(const NBodyState& psi, const Spectrum& spectrum, double kappa);

struct ChaosRow {
  int particles = 0;
  double t = 0.0;
  double trace_dist_k1 = 0.0;
  double trace_dist_k2 = -1.0;  ///< negative when not computed
  double energy_per_particle = 0.0;
  double asympt_fact_dist = 0.0;
  double kappa = 0.0;           ///< 0 when no cutoff
  double beta = 0.0;
  int cutoff = 0;
  double dt = 0.0;
};

struct ChaosConfig {
  std::vector<int> particles{1, 2, 3};
  std::vector<double> times{0.0, 0.05, 0.1};
  double beta = 0.5;
  double coupling = 1.0;  ///< 1: H_N against NLS with lambda = 1; 0: both free
  double kappa = 0.0;     ///< 0 disables the cutoff
  double dt = 1e-3;       ///< NLS step
  bool second_marginal = true;
  void validate() const;
};

/// Trace-norm distance between N-body marginals of phi^{tensor N} and
/// |S_t phi><S_t phi|^{tensor k}.
std::vector<ChaosRow> chaos_diagnostic(const TorusField& phi, const ChaosConfig& cfg);

}  // namespace gph
