#pragma once

// Collision operators B_{j,k+1} gamma = Tr_{k+1} [delta(x_j - x_{k+1}), gamma]
// on dense density matrices, Galerkin-truncated to the lattice.

#include "gph/density_matrix.hpp"

namespace gph {

/// B_{j,k+1} for an order-(k+1) input, 1 <= j <= k. Throws ConfigError otherwise.
DensityMatrix collision_apply(const DensityMatrix& gamma, int j);
/// B_{k+1} = sum_j B_{j,k+1}.
DensityMatrix full_collision(const DensityMatrix& gamma);

/// The cubic field P(|phi|^2 phi).
TorusField psi_tilde(const TorusField& phi);
/// |psi~><phi| - |phi><psi~|, the value of B_{1,2} on |phi><phi|^{tensor 2}.
DensityMatrix commutator_kernel(const TorusField& phi);

}  // namespace gph
