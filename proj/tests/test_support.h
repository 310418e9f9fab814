#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace nodalab::testing {

inline constexpr double kPi = std::numbers::pi;

/// Radical inverse in `base` (Halton sequence component).
inline double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline bool within_rel(double value, double expected, double rel) {
  return std::abs(value - expected) <= rel * std::abs(expected);
}

}  // namespace nodalab::testing
