#pragma once

#include <numbers>

namespace fmsm {

inline constexpr double kPi = std::numbers::pi;
/// Vacuum permeability [H/m] (pre-2019 exact value; the difference is 1e-10).
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;
inline constexpr double kStandardGravity = 9.81;

}  // namespace fmsm
