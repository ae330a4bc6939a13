#pragma once

#include <complex>
#include <cstdint>
#include <numbers>

namespace gph {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Volume (2 pi)^3 of the periodic cell.
inline constexpr double kCellVolume = kTwoPi * kTwoPi * kTwoPi;

inline constexpr cplx kI{0.0, 1.0};

}  // namespace gph
