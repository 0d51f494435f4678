#pragma once

#include <numbers>

namespace fermisig {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kInvFourPi = 1.0 / (4.0 * kPi);       // top eigenvalue of the unit diamond
inline constexpr double kInvEightPiSq = 1.0 / (8.0 * kPi * kPi);
inline constexpr double kInvFourPiSq = 1.0 / (4.0 * kPi * kPi);

}  // namespace fermisig
