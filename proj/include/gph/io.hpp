#pragma once

// Flat binary and CSV records for fields and dense density matrices.
//
// Binary layout (native little-endian doubles/int32):
//   field:   "GPHF", M, ordering version, then (re, im) per lattice index
//   density: "GPHD", k, M, ordering version, convention version, then the
//            L^k x L^k coefficients row-major as (re, im) pairs
// CSV fields carry a "# M=<M> ordering=<v>" line followed by n1,n2,n3,re,im rows.

#include <filesystem>
#include <iosfwd>

#include "gph/density_matrix.hpp"
#include "gph/torus.hpp"

namespace gph {

/// Version of the density-matrix coefficient convention (unnormalized
/// transform, operator matrix (2 pi)^{-3k} gamma_hat).
inline constexpr int kDensityConventionVersion = 1;

void write_field(std::ostream& out, const TorusField& f);
TorusField read_field(std::istream& in);
void write_field_csv(std::ostream& out, const TorusField& f);
TorusField read_field_csv(std::istream& in);

void write_density(std::ostream& out, const DensityMatrix& g);
DensityMatrix read_density(std::istream& in);

/// File wrappers; binary unless the extension is .csv (fields only).
void save_field(const std::filesystem::path& path, const TorusField& f);
TorusField load_field(const std::filesystem::path& path);
void save_density(const std::filesystem::path& path, const DensityMatrix& g);
DensityMatrix load_density(const std::filesystem::path& path);

}  // namespace gph
