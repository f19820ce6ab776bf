#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "terra/assembler.hpp"
#include "terra/query.hpp"

namespace terra {

enum class Policy { high, low, adaptive_oracle };

const char* to_string(Policy policy);

// Kinematic body proxy: a collision box that follows the ground, lags its
// commanded height first-order, and can step onto rises up to a limit that
// shrinks as the body crouches.
struct BodyParams {
  double length = 0.6;
  double width = 0.4;
  double standing_height = 0.55;
  double crouch_height = 0.25;
  double height_tau = 0.3;            // s, first-order height lag
  double base_gap = 0.03;             // box bottom above the support surface
  double clearance_band = 0.05;       // box top above the commanded height
  double step_limit_standing = 0.3;   // m, max rise while standing
  double step_limit_crouched = 0.1;   // m, max rise while crouched
  double lookahead = 0.6;             // m, ceiling scan ahead of the body
  double safety_margin = 0.02;        // m, kept below every ceiling
  double min_support_height = 0.2;    // m, slots thinner than this are not support
  double reachable_rise = 0.35;       // m, support further above the base is ignored
};

struct EpisodeConfig {
  double dt = 0.02;            // s
  double speed = 0.5;          // m/s toward the goal
  double time_budget = 30.0;   // s
  double goal_tolerance = 0.1; // m
  double spawn_jitter = 0.3;   // m, |lateral spawn offset| bound (the only RNG use)
  BodyParams body;
};

enum class FailureReason { none, collision, step_limit, timeout, no_support };

const char* to_string(FailureReason reason);

struct EpisodeResult {
  bool success = false;
  double time_to_goal = std::numeric_limits<double>::infinity();  // s; budget on timeout
  double min_clearance = std::numeric_limits<double>::infinity(); // m; +inf under open sky
  int collision_count = 0;
  FailureReason reason = FailureReason::none;
};

// Walks the body from spawn toward the goal at constant speed, following
// the highest reachable support under its footprint, and fails on
// collision, over-limit steps, lost support, or timeout.
EpisodeResult run_episode(const QueryStructure& query, Policy policy, const EpisodeConfig& config,
                          std::uint64_t seed);

struct SweepConfig {
  std::vector<double> gap_heights = {0.30, 0.35, 0.40, 0.45, 0.50, 0.55,
                                     0.60, 0.65, 0.70, 0.75, 0.80};
  std::vector<double> obstacle_heights = {0.00, 0.05, 0.10, 0.15, 0.20,
                                          0.25, 0.30, 0.35, 0.40};
  double combined_obstacle_height = 0.25;  // fixed block under the varied gap
  int seeds_per_cell = 5;
  int jobs = 1;  // worker threads; results do not depend on this
  std::uint64_t seed = 0;
  EpisodeConfig episode;
  EvalTerrainParams terrain;
};

struct SuccessCell {
  Policy policy = Policy::high;
  EvalKind kind = EvalKind::obstacle;
  double param = 0.0;  // gap height or obstacle height, meters
  double success_rate = 0.0;
  int n = 0;
};

// Runs every (kind, parameter, policy) cell for seeds_per_cell episodes.
// Cells come back sorted by (policy, kind, param); episode seeds hang off
// the cell's global index, so results are identical at any job count.
std::vector<SuccessCell> success_grid(const std::vector<EvalKind>& kinds,
                                      const SweepConfig& config);

// CSV with header policy,kind,param,success_rate,n in the sorted cell
// order. Byte-stable for equal inputs.
void write_results_csv(const std::vector<SuccessCell>& cells, const std::string& path);

}  // namespace terra
