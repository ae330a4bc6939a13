#include "gph/collision.hpp"

#include <string>
#include <vector>

#include "gph/errors.hpp"

namespace gph {

namespace {

// shifted[(m * L + q) * L + q'] = index of mode(m) - q + q', or -1.
std::vector<long> shift_table(const ModeLattice& lat) {
  const std::size_t L = lat.size();
  std::vector<long> t(L * L * L);
  for (std::size_t m = 0; m < L; ++m) {
    const Mode a = lat.mode(m);
    for (std::size_t q = 0; q < L; ++q) {
      const Mode b = lat.mode(q);
      for (std::size_t qp = 0; qp < L; ++qp) {
        const Mode c = lat.mode(qp);
        t[(m * L + q) * L + qp] = lat.find({a[0] - b[0] + c[0], a[1] - b[1] + c[1], a[2] - b[2] + c[2]});
      }
    }
  }
  return t;
}

}  // namespace

DensityMatrix collision_apply(const DensityMatrix& gamma, int j) {
  const int k = gamma.order() - 1;
  if (k < 1 || j < 1 || j > k)
    throw ConfigError("collision B_{j,k+1} needs 1 <= j <= k, got j=" + std::to_string(j) +
                      " for order " + std::to_string(gamma.order()));
  const ModeLattice& lat = gamma.lattice();
  const auto L = static_cast<Eigen::Index>(lat.size());
  const auto table = shift_table(lat);
  DensityMatrix out(lat, k);
  const Eigen::Index D = out.dim();
  // Stride of slot j inside an order-k multi-index.
  Eigen::Index stride = 1;
  for (int s = j; s < k; ++s) stride *= L;
  const Eigen::MatrixXcd& g = gamma.coeffs();
  const double scale = 1.0 / (kCellVolume * kCellVolume);
  for (Eigen::Index c = 0; c < D; ++c) {
    const Eigen::Index cj = (c / stride) % L;
    for (Eigen::Index r = 0; r < D; ++r) {
      const Eigen::Index rj = (r / stride) % L;
      cplx acc{};
      for (Eigen::Index q = 0; q < L; ++q)
        for (Eigen::Index qp = 0; qp < L; ++qp) {
          // B+: row slot j carries p_j - q + q'.
          const long src = table[std::size_t((rj * L + q) * L + qp)];
          if (src >= 0) acc += g((r + (src - rj) * stride) * L + q, c * L + qp);
          // B-: column slot j carries p'_j + q - q'.
          const long srcp = table[std::size_t((cj * L + qp) * L + q)];
          if (srcp >= 0) acc -= g(r * L + q, (c + (srcp - cj) * stride) * L + qp);
        }
      out.coeffs()(r, c) = acc * scale;
    }
  }
  return out;
}

DensityMatrix full_collision(const DensityMatrix& gamma) {
  const int k = gamma.order() - 1;
  if (k < 1) throw ConfigError("full collision needs order >= 2");
  DensityMatrix out = collision_apply(gamma, 1);
  for (int j = 2; j <= k; ++j) out += collision_apply(gamma, j);
  return out;
}

TorusField psi_tilde(const TorusField& phi) { return cubic_term(phi); }

DensityMatrix commutator_kernel(const TorusField& phi) {
  const TorusField pt = psi_tilde(phi);
  return outer(pt, phi) - outer(phi, pt);
}

}  // namespace gph
