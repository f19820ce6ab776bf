#include "terra/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>

#include "terra/errors.hpp"
#include "terra/rng.hpp"

namespace terra {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSupportSampleSpacing = 0.05;  // m, along the heading axis
constexpr double kStepEpsilon = 1e-9;

void check_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s must be positive", name);
    throw ConfigError(buf);
  }
}

void validate_episode_config(const EpisodeConfig& config) {
  check_positive(config.dt, "dt");
  check_positive(config.speed, "speed");
  check_positive(config.time_budget, "time_budget");
  check_positive(config.goal_tolerance, "goal_tolerance");
  if (!(config.spawn_jitter >= 0.0)) throw ConfigError("spawn_jitter must be non-negative");
  const BodyParams& body = config.body;
  check_positive(body.length, "body length");
  check_positive(body.width, "body width");
  check_positive(body.crouch_height, "crouch_height");
  if (!(body.standing_height >= body.crouch_height)) {
    throw ConfigError("standing_height must be at least crouch_height");
  }
  check_positive(body.height_tau, "height_tau");
  if (!(body.base_gap >= 0.0)) throw ConfigError("base_gap must be non-negative");
  if (!(body.clearance_band >= 0.0)) throw ConfigError("clearance_band must be non-negative");
  check_positive(body.step_limit_crouched, "step_limit_crouched");
  if (!(body.step_limit_standing >= body.step_limit_crouched)) {
    throw ConfigError("step_limit_standing must be at least step_limit_crouched");
  }
  if (!(body.lookahead >= 0.0)) throw ConfigError("lookahead must be non-negative");
  if (!(body.safety_margin >= 0.0)) throw ConfigError("safety_margin must be non-negative");
  check_positive(body.min_support_height, "min_support_height");
  check_positive(body.reachable_rise, "reachable_rise");
}

double step_limit(double height, const BodyParams& body) {
  const double span = body.standing_height - body.crouch_height;
  double t = span > 0.0 ? (height - body.crouch_height) / span : 1.0;
  t = std::clamp(t, 0.0, 1.0);
  return body.step_limit_crouched + t * (body.step_limit_standing - body.step_limit_crouched);
}

// Highest support slot at one point: among intervals tall enough for the
// body and no further than reachable_rise above the base, the max bottom.
bool point_support(const QueryStructure& query, double x, double y, double base,
                   const BodyParams& body, double* bottom, double* top) {
  bool found = false;
  for (const FreeInterval& iv : query.free_intervals(x, y)) {
    if (!(iv.top - iv.bottom > body.min_support_height)) continue;
    if (iv.bottom > base + body.reachable_rise + kStepEpsilon) continue;
    if (!found || iv.bottom > *bottom) {
      *bottom = iv.bottom;
      *top = iv.top;
      found = true;
    }
  }
  return found;
}

// The body stands on the highest support under its footprint rectangle.
// The lateral rows sit exactly at +-width/2 so the footprint corners are
// sampled: a ledge is detected no later than the first tick the collision
// box could reach it.
bool footprint_support(const QueryStructure& query, double x, double y, double heading,
                       double base, const BodyParams& body, double* ground) {
  const double cos_h = std::cos(heading);
  const double sin_h = std::sin(heading);
  const double half = body.length / 2.0;
  const double half_w = body.width / 2.0;
  bool found = false;
  for (double lat : {-half_w, 0.0, half_w}) {
    const double row_x = x - sin_h * lat;
    const double row_y = y + cos_h * lat;
    for (double s = -half; s <= half + 1e-12; s += kSupportSampleSpacing) {
      double bottom = 0.0;
      double top = 0.0;
      if (!point_support(query, row_x + cos_h * s, row_y + sin_h * s, base, body, &bottom, &top))
        continue;
      if (!found || bottom > *ground) *ground = bottom;
      found = true;
    }
  }
  return found;
}

// Oracle command: scan the support slots under and ahead of the body and
// duck to the tightest one, keeping the safety margin below its ceiling.
double adaptive_command(const QueryStructure& query, double x, double y, double heading,
                        double base, const BodyParams& body) {
  const double cos_h = std::cos(heading);
  const double sin_h = std::sin(heading);
  const double half = body.length / 2.0;
  double min_slot = kInf;
  for (double s = -half; s <= half + body.lookahead + 1e-12; s += kSupportSampleSpacing) {
    double bottom = 0.0;
    double top = 0.0;
    if (!point_support(query, x + cos_h * s, y + sin_h * s, base, body, &bottom, &top)) continue;
    min_slot = std::min(min_slot, top - bottom);
  }
  if (min_slot == kInf) return body.standing_height;
  const double cmd = min_slot - body.clearance_band - body.safety_margin;
  return std::clamp(cmd, body.crouch_height, body.standing_height);
}

double command_for(Policy policy, const QueryStructure& query, double x, double y,
                   double heading, double ground, const BodyParams& body) {
  switch (policy) {
    case Policy::high:
      return body.standing_height;
    case Policy::low:
      return body.crouch_height;
    case Policy::adaptive_oracle:
      return adaptive_command(query, x, y, heading, ground, body);
  }
  return body.standing_height;
}

// Ceiling of the slot the body currently occupies at its center.
double ceiling_at(const QueryStructure& query, double x, double y, double body_bottom) {
  double best_bottom = -kInf;
  double best_top = kInf;
  bool found = false;
  for (const FreeInterval& iv : query.free_intervals(x, y)) {
    if (iv.bottom > body_bottom + kStepEpsilon) continue;
    if (!found || iv.bottom > best_bottom) {
      best_bottom = iv.bottom;
      best_top = iv.top;
      found = true;
    }
  }
  return best_top;
}

}  // namespace

const char* to_string(Policy policy) {
  switch (policy) {
    case Policy::high:
      return "high";
    case Policy::low:
      return "low";
    case Policy::adaptive_oracle:
      return "adaptive_oracle";
  }
  return "high";
}

const char* to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::none:
      return "none";
    case FailureReason::collision:
      return "collision";
    case FailureReason::step_limit:
      return "step_limit";
    case FailureReason::timeout:
      return "timeout";
    case FailureReason::no_support:
      return "no_support";
  }
  return "none";
}

EpisodeResult run_episode(const QueryStructure& query, Policy policy, const EpisodeConfig& config,
                          std::uint64_t seed) {
  validate_episode_config(config);
  const Scene& scene = query.scene();
  const BodyParams& body = config.body;

  const double goal_dx = scene.goal.x - scene.spawn.x;
  const double goal_dy = scene.goal.y - scene.spawn.y;
  if (std::hypot(goal_dx, goal_dy) <= config.goal_tolerance) {
    throw ConfigError("scene goal is not separated from the spawn");
  }

  Rng rng(seed);
  double x = scene.spawn.x;
  double y = scene.spawn.y + rng.uniform(-config.spawn_jitter, config.spawn_jitter);

  // Initial support: the lowest usable slot under the spawn point.
  double ground = 0.0;
  {
    bool found = false;
    for (const FreeInterval& iv : query.free_intervals(x, y)) {
      if (!(iv.top - iv.bottom > body.min_support_height)) continue;
      if (!found || iv.bottom < ground) ground = iv.bottom;
      found = true;
    }
    if (!found) throw ConfigError("spawn point has no support");
  }

  double heading = std::atan2(scene.goal.y - y, scene.goal.x - x);
  double h = command_for(policy, query, x, y, heading, ground, body);

  EpisodeResult result;
  double t = 0.0;
  while (t < config.time_budget - kStepEpsilon) {
    heading = std::atan2(scene.goal.y - y, scene.goal.x - x);
    x += std::cos(heading) * config.speed * config.dt;
    y += std::sin(heading) * config.speed * config.dt;
    t += config.dt;

    double new_ground = 0.0;
    if (!footprint_support(query, x, y, heading, ground, body, &new_ground)) {
      result.reason = FailureReason::no_support;
      result.time_to_goal = t;
      return result;
    }
    if (new_ground - ground > step_limit(h, body) + kStepEpsilon) {
      result.reason = FailureReason::step_limit;
      result.time_to_goal = t;
      return result;
    }
    ground = new_ground;

    const double cmd = command_for(policy, query, x, y, heading, ground, body);
    h = cmd + (h - cmd) * std::exp(-config.dt / body.height_tau);

    const double bottom = ground + body.base_gap;
    const double top = ground + h + body.clearance_band;
    OrientedBox box;
    box.center = Vec3{x, y, 0.5 * (bottom + top)};
    box.half = Vec3{body.length / 2.0, body.width / 2.0, 0.5 * (top - bottom)};
    box.yaw = heading;
    if (query.collision_check(box)) {
      result.reason = FailureReason::collision;
      result.collision_count = 1;
      result.time_to_goal = t;
      return result;
    }

    const double ceiling = ceiling_at(query, x, y, bottom);
    if (ceiling < kInf) result.min_clearance = std::min(result.min_clearance, ceiling - top);

    if (std::hypot(scene.goal.x - x, scene.goal.y - y) <= config.goal_tolerance) {
      result.success = true;
      result.reason = FailureReason::none;
      result.time_to_goal = t;
      return result;
    }
  }

  result.reason = FailureReason::timeout;
  result.time_to_goal = config.time_budget;
  return result;
}

namespace {

struct CellTask {
  EvalKind kind = EvalKind::obstacle;
  Policy policy = Policy::high;
  double param = 0.0;
  int cell_index = 0;
  const QueryStructure* query = nullptr;
};

const std::vector<double>& params_for(EvalKind kind, const SweepConfig& config) {
  return kind == EvalKind::obstacle ? config.obstacle_heights : config.gap_heights;
}

EvalTerrainParams terrain_for(EvalKind kind, double param, const SweepConfig& config) {
  EvalTerrainParams terrain = config.terrain;
  switch (kind) {
    case EvalKind::overhanging:
      terrain.gap_height = param;
      terrain.obstacle_height = 0.0;
      break;
    case EvalKind::obstacle:
      terrain.obstacle_height = param;
      break;
    case EvalKind::overhanging_plus_obstacle:
      terrain.gap_height = param;
      terrain.obstacle_height = config.combined_obstacle_height;
      break;
  }
  return terrain;
}

bool cell_order(const SuccessCell& a, const SuccessCell& b) {
  if (a.policy != b.policy) return static_cast<int>(a.policy) < static_cast<int>(b.policy);
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  return a.param < b.param;
}

}  // namespace

std::vector<SuccessCell> success_grid(const std::vector<EvalKind>& kinds,
                                      const SweepConfig& config) {
  if (kinds.empty()) throw ConfigError("no terrain kinds requested");
  if (config.seeds_per_cell < 1) throw ConfigError("seeds_per_cell must be at least 1");
  if (config.seeds_per_cell > 1000) throw ConfigError("seeds_per_cell must be at most 1000");
  if (config.jobs < 0) throw ConfigError("jobs must be non-negative");
  validate_episode_config(config.episode);
  for (EvalKind kind : kinds) {
    const std::vector<double>& params = params_for(kind, config);
    if (params.empty()) throw ConfigError("parameter sweep is empty");
    for (double param : params) {
      if (!(param >= 0.0)) throw ConfigError("sweep parameters must be non-negative");
    }
  }

  // One terrain and query structure per (kind, param), shared read-only
  // across policies, seeds, and worker threads.
  std::vector<std::unique_ptr<QueryStructure>> queries;
  std::vector<CellTask> cells;
  int cell_index = 0;
  for (EvalKind kind : kinds) {
    for (double param : params_for(kind, config)) {
      Scene scene = build_eval_terrain(kind, terrain_for(kind, param, config));
      queries.push_back(std::make_unique<QueryStructure>(std::move(scene)));
      const QueryStructure* query = queries.back().get();
      for (Policy policy : {Policy::high, Policy::low, Policy::adaptive_oracle}) {
        CellTask cell;
        cell.kind = kind;
        cell.policy = policy;
        cell.param = param;
        cell.cell_index = cell_index++;
        cell.query = query;
        cells.push_back(cell);
      }
    }
  }

  const int seeds = config.seeds_per_cell;
  const std::size_t episode_count = cells.size() * static_cast<std::size_t>(seeds);
  std::vector<char> successes(episode_count, 0);

  int jobs = config.jobs;
  if (jobs == 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min<int>(jobs, static_cast<int>(episode_count));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= episode_count) return;
      const CellTask& cell = cells[i / seeds];
      const int seed_idx = static_cast<int>(i % seeds);
      const std::uint64_t episode_seed =
          derive_seed(config.seed, static_cast<std::uint64_t>(cell.cell_index) * 1000 +
                                       static_cast<std::uint64_t>(seed_idx));
      try {
        EpisodeResult r = run_episode(*cell.query, cell.policy, config.episode, episode_seed);
        successes[i] = r.success ? 1 : 0;
      } catch (const std::exception&) {
        successes[i] = 0;
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::vector<SuccessCell> out;
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    int wins = 0;
    for (int s = 0; s < seeds; ++s) {
      wins += successes[c * static_cast<std::size_t>(seeds) + static_cast<std::size_t>(s)];
    }
    SuccessCell cell;
    cell.policy = cells[c].policy;
    cell.kind = cells[c].kind;
    cell.param = cells[c].param;
    cell.success_rate = static_cast<double>(wins) / static_cast<double>(seeds);
    cell.n = seeds;
    out.push_back(cell);
  }
  std::sort(out.begin(), out.end(), cell_order);
  return out;
}

void write_results_csv(const std::vector<SuccessCell>& cells, const std::string& path) {
  std::vector<SuccessCell> sorted = cells;
  std::sort(sorted.begin(), sorted.end(), cell_order);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open results file: " + path);
  out << "policy,kind,param,success_rate,n\n";
  for (const SuccessCell& cell : sorted) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%s,%.4f,%.6f,%d\n", to_string(cell.policy),
                  to_string(cell.kind), cell.param, cell.success_rate, cell.n);
    out << buf;
  }
  if (!out.good()) throw IoError("failed writing results file: " + path);
}

}  // namespace terra
