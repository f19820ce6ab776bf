#pragma once

#include "terra/query.hpp"
#include "terra/rng.hpp"
#include "terra/voxel.hpp"

namespace terra {

// Desired body motion and posture handed to a locomotion controller.
struct Command6D {
  double vx = 0.0;        // m/s
  double vy = 0.0;        // m/s
  double yaw_rate = 0.0;  // rad/s
  double roll = 0.0;      // rad
  double pitch = 0.0;     // rad
  double height = 0.0;    // m above ground
};

struct CommandRanges {
  double vx_min = -1.0;
  double vx_max = 1.0;
  double vy_min = -1.0;
  double vy_max = 1.0;
  double yaw_rate_min = -1.0;
  double yaw_rate_max = 1.0;
  double tilt_std = 0.25;    // roll/pitch standard deviation, rad
  double tilt_clamp = 0.6;   // |roll|, |pitch| hard bound, rad
  double height_min = 0.1;   // m
  double height_max = 0.6;   // m
};

// Velocities uniform, roll/pitch zero-mean normal clamped to the tilt
// bound, height uniform. Draw order is fixed: vx, vy, yaw_rate, roll,
// pitch, height.
Command6D sample_command(Rng& rng, const CommandRanges& ranges = {});

struct NoiseParams {
  double voxel_drop = 0.05;      // occupied cell erased with this probability
  double voxel_spurious = 0.01;  // free cell switched on with this probability
  double jitter_xyz = 0.02;      // resample translation sigma, m
  double jitter_yaw = 0.02;      // resample rotation sigma, rad
  double height_sigma = 0.01;    // additive height-sample noise, m
  double height_outlier = 0.02;  // outlier substitution probability
};

// One jittered pose is drawn per call and the grid is resampled nearest-
// neighbor at it (cells sourced from outside the grid come back free), then
// each cell independently drops or gains occupancy. All-zero params return
// the input grid unchanged.
VoxelGrid corrupt_voxels(const VoxelGrid& grid, const NoiseParams& params, Rng& rng);

// Valid samples get additive Gaussian noise and, at the outlier
// probability, a uniform +-0.5 m substitution instead. Invalid samples pass
// through untouched and consume no randomness.
HeightSamples corrupt_height_samples(HeightSamples samples, const NoiseParams& params, Rng& rng);

}  // namespace terra
