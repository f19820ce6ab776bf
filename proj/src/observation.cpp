#include "terra/observation.hpp"

#include <algorithm>
#include <cmath>

#include "terra/errors.hpp"

namespace terra {

namespace {

void check_range(double lo, double hi, const char* what) {
  if (!(lo <= hi)) throw ConfigError(std::string(what) + " range is inverted");
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must be in [0, 1]");
}

void check_sigma(double s, const char* what) {
  if (!(s >= 0.0)) throw ConfigError(std::string(what) + " must be non-negative");
}

void check_noise(const NoiseParams& params) {
  check_probability(params.voxel_drop, "voxel_drop");
  check_probability(params.voxel_spurious, "voxel_spurious");
  check_probability(params.height_outlier, "height_outlier");
  check_sigma(params.jitter_xyz, "jitter_xyz");
  check_sigma(params.jitter_yaw, "jitter_yaw");
  check_sigma(params.height_sigma, "height_sigma");
}

}  // namespace

Command6D sample_command(Rng& rng, const CommandRanges& ranges) {
  check_range(ranges.vx_min, ranges.vx_max, "vx");
  check_range(ranges.vy_min, ranges.vy_max, "vy");
  check_range(ranges.yaw_rate_min, ranges.yaw_rate_max, "yaw_rate");
  check_range(ranges.height_min, ranges.height_max, "height");
  check_sigma(ranges.tilt_std, "tilt_std");
  check_sigma(ranges.tilt_clamp, "tilt_clamp");

  Command6D cmd;
  cmd.vx = rng.uniform(ranges.vx_min, ranges.vx_max);
  cmd.vy = rng.uniform(ranges.vy_min, ranges.vy_max);
  cmd.yaw_rate = rng.uniform(ranges.yaw_rate_min, ranges.yaw_rate_max);
  cmd.roll = std::clamp(rng.normal(0.0, ranges.tilt_std), -ranges.tilt_clamp, ranges.tilt_clamp);
  cmd.pitch = std::clamp(rng.normal(0.0, ranges.tilt_std), -ranges.tilt_clamp, ranges.tilt_clamp);
  cmd.height = rng.uniform(ranges.height_min, ranges.height_max);
  return cmd;
}

VoxelGrid corrupt_voxels(const VoxelGrid& grid, const NoiseParams& params, Rng& rng) {
  check_noise(params);

  const double dx = rng.normal(0.0, params.jitter_xyz);
  const double dy = rng.normal(0.0, params.jitter_xyz);
  const double dz = rng.normal(0.0, params.jitter_xyz);
  const double dyaw = rng.normal(0.0, params.jitter_yaw);
  const double cy = std::cos(dyaw), sy = std::sin(dyaw);
  const double half_span = 0.5 * VoxelGrid::kSpan;

  VoxelGrid out;
  for (int iz = 0; iz < VoxelGrid::kDim; ++iz)
    for (int iy = 0; iy < VoxelGrid::kDim; ++iy)
      for (int ix = 0; ix < VoxelGrid::kDim; ++ix) {
        const double x = VoxelGrid::kResolution * (ix + 0.5) - half_span;
        const double y = VoxelGrid::kResolution * (iy + 0.5) - half_span;
        const double z = VoxelGrid::kResolution * (iz + 0.5);
        const double sx = cy * x - sy * y + dx;
        const double sxy = sy * x + cy * y + dy;
        const double sz = z + dz;
        const int jx = static_cast<int>(std::floor((sx + half_span) / VoxelGrid::kResolution));
        const int jy = static_cast<int>(std::floor((sxy + half_span) / VoxelGrid::kResolution));
        const int jz = static_cast<int>(std::floor(sz / VoxelGrid::kResolution));
        const bool inside = jx >= 0 && jx < VoxelGrid::kDim && jy >= 0 && jy < VoxelGrid::kDim &&
                            jz >= 0 && jz < VoxelGrid::kDim;
        if (inside && grid.at(jx, jy, jz)) out.set(ix, iy, iz, true);
      }

  // One uniform per cell in index order, used for dropout or spurious
  // occupancy depending on the cell's state after resampling.
  for (int iz = 0; iz < VoxelGrid::kDim; ++iz)
    for (int iy = 0; iy < VoxelGrid::kDim; ++iy)
      for (int ix = 0; ix < VoxelGrid::kDim; ++ix) {
        const double u = rng.uniform();
        if (out.at(ix, iy, iz)) {
          if (u < params.voxel_drop) out.set(ix, iy, iz, false);
        } else {
          if (u < params.voxel_spurious) out.set(ix, iy, iz, true);
        }
      }
  return out;
}

HeightSamples corrupt_height_samples(HeightSamples samples, const NoiseParams& params, Rng& rng) {
  check_noise(params);
  for (HeightSample& s : samples.samples) {
    if (!s.valid) continue;
    double noisy = s.height + rng.normal(0.0, params.height_sigma);
    if (rng.uniform() < params.height_outlier) noisy = s.height + rng.uniform(-0.5, 0.5);
    s.height = noisy;
  }
  return samples;
}

}  // namespace terra
