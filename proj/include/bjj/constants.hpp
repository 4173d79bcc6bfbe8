#pragma once

#include <numbers>

namespace bjj::constants {

inline constexpr double pi = std::numbers::pi;

/// Reduced Planck constant [J s] (CODATA 2018 exact value).
inline constexpr double hbar = 1.054571817e-34;

}  // namespace bjj::constants
