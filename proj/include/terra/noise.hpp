#pragma once

#include <cmath>
#include <cstdint>

#include "terra/rng.hpp"

namespace terra {

// Deterministic lattice value in [0, 1) for integer coordinates.
inline double lattice_value(std::int64_t xi, std::int64_t yi, std::uint64_t seed) {
  std::uint64_t h = seed;
  h ^= static_cast<std::uint64_t>(xi) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(yi) * 0xC2B2AE3D27D4EB4FULL;
  std::uint64_t s = h;
  return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

// Single-octave value noise in [0, 1), bilinear with smoothstep fade.
inline double value_noise(double x, double y, std::uint64_t seed) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto xi = static_cast<std::int64_t>(fx);
  const auto yi = static_cast<std::int64_t>(fy);
  double tx = x - fx, ty = y - fy;
  tx = tx * tx * (3.0 - 2.0 * tx);
  ty = ty * ty * (3.0 - 2.0 * ty);
  const double v00 = lattice_value(xi, yi, seed);
  const double v10 = lattice_value(xi + 1, yi, seed);
  const double v01 = lattice_value(xi, yi + 1, seed);
  const double v11 = lattice_value(xi + 1, yi + 1, seed);
  const double a = v00 + (v10 - v00) * tx;
  const double b = v01 + (v11 - v01) * tx;
  return a + (b - a) * ty;
}

}  // namespace terra
