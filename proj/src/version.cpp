#include "gph/version.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <gsl/gsl_version.h>

#include "gph/io.hpp"

namespace gph {

std::vector<std::pair<std::string, std::string>> library_versions() {
  return {
      {"gph", kVersion},
      {"lattice_ordering", std::to_string(ModeLattice::kOrderingVersion)},
      {"density_convention", std::to_string(kDensityConventionVersion)},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"fftw", fftw_version},
      {"gsl", gsl_version},
  };
}

}  // namespace gph
