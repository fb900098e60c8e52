#pragma once

#include <numbers>

namespace qfric {

/// SI constants used throughout the library.
struct Constants {
  static constexpr double hbar = 1.054571817e-34;  // J s
  static constexpr double eps0 = 8.8541878128e-12; // F/m
  static constexpr double pi = std::numbers::pi;
};

} // namespace qfric
