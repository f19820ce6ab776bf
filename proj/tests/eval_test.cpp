#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "terra/assembler.hpp"
#include "terra/errors.hpp"
#include "terra/eval.hpp"
#include "terra/query.hpp"

using namespace terra;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QueryStructure corridor_query(EvalKind kind, double gap, double obstacle) {
  EvalTerrainParams params;
  params.gap_height = gap;
  params.obstacle_height = obstacle;
  return QueryStructure(build_eval_terrain(kind, params));
}

EpisodeResult run(const QueryStructure& query, Policy policy, std::uint64_t seed = 3) {
  return run_episode(query, policy, EpisodeConfig{}, seed);
}

void add_triangle(TriangleMesh& mesh, const Vec3& a, const Vec3& b, const Vec3& c) {
  const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back(a);
  mesh.vertices.push_back(b);
  mesh.vertices.push_back(c);
  mesh.triangles.push_back({base, base + 1, base + 2});
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const SuccessCell& cell_at(const std::vector<SuccessCell>& cells, Policy policy, EvalKind kind,
                           double param) {
  for (const SuccessCell& cell : cells) {
    if (cell.policy == policy && cell.kind == kind && std::abs(cell.param - param) < 1e-9)
      return cell;
  }
  REQUIRE(false);
  return cells.front();
}

}  // namespace

TEST_CASE("policy and failure reason names") {
  CHECK(std::string(to_string(Policy::high)) == "high");
  CHECK(std::string(to_string(Policy::low)) == "low");
  CHECK(std::string(to_string(Policy::adaptive_oracle)) == "adaptive_oracle");
  CHECK(std::string(to_string(FailureReason::none)) == "none");
  CHECK(std::string(to_string(FailureReason::collision)) == "collision");
  CHECK(std::string(to_string(FailureReason::step_limit)) == "step_limit");
  CHECK(std::string(to_string(FailureReason::timeout)) == "timeout");
  CHECK(std::string(to_string(FailureReason::no_support)) == "no_support");
}

TEST_CASE("every policy walks a flat corridor to the goal") {
  const QueryStructure query = corridor_query(EvalKind::obstacle, 0.6, 0.0);
  for (Policy policy : {Policy::high, Policy::low, Policy::adaptive_oracle}) {
    const EpisodeResult r = run(query, policy);
    CHECK(r.success);
    CHECK(r.reason == FailureReason::none);
    CHECK(r.collision_count == 0);
    // 6 m to the goal at 0.5 m/s, minus the goal tolerance.
    CHECK(r.time_to_goal > 11.0);
    CHECK(r.time_to_goal < 13.0);
    CHECK(r.min_clearance == kInf);  // open sky the whole way
  }
}

TEST_CASE("episodes are seed-deterministic") {
  const QueryStructure query = corridor_query(EvalKind::overhanging, 0.5, 0.0);
  const EpisodeResult a = run(query, Policy::low, 11);
  const EpisodeResult b = run(query, Policy::low, 11);
  CHECK(a.success == b.success);
  CHECK(a.time_to_goal == b.time_to_goal);
  CHECK(a.min_clearance == b.min_clearance);
}

TEST_CASE("crouched bodies clear overhangs that stop standing ones") {
  // Gap 0.4: a crouched body (top 0.30) fits, a standing one (top 0.60)
  // collides with the bar.
  const QueryStructure query = corridor_query(EvalKind::overhanging, 0.4, 0.0);
  const EpisodeResult low = run(query, Policy::low);
  CHECK(low.success);
  CHECK(low.min_clearance > 0.0);
  const EpisodeResult high = run(query, Policy::high);
  CHECK_FALSE(high.success);
  CHECK(high.reason == FailureReason::collision);
  CHECK(high.collision_count == 1);
}

TEST_CASE("overhang success boundaries sit where body heights put them") {
  CHECK(run(corridor_query(EvalKind::overhanging, 0.35, 0.0), Policy::low).success);
  // Touching at exactly top == gap counts as a collision.
  CHECK_FALSE(run(corridor_query(EvalKind::overhanging, 0.30, 0.0), Policy::low).success);
  CHECK(run(corridor_query(EvalKind::overhanging, 0.65, 0.0), Policy::high).success);
  CHECK_FALSE(run(corridor_query(EvalKind::overhanging, 0.60, 0.0), Policy::high).success);

  // The adaptive policy ducks to whatever the bar allows.
  CHECK(run(corridor_query(EvalKind::overhanging, 0.35, 0.0), Policy::adaptive_oracle).success);
  CHECK_FALSE(
      run(corridor_query(EvalKind::overhanging, 0.30, 0.0), Policy::adaptive_oracle).success);

  // A crouched pass under a 0.5 gap leaves 0.2 m of headroom.
  const EpisodeResult low = run(corridor_query(EvalKind::overhanging, 0.5, 0.0), Policy::low);
  CHECK(low.success);
  CHECK(low.min_clearance == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("standing bodies step obstacles that stop crouched ones") {
  // Height 0.25: within the standing 0.3 step limit, beyond the crouched 0.1.
  const QueryStructure query = corridor_query(EvalKind::obstacle, 0.6, 0.25);
  const EpisodeResult high = run(query, Policy::high);
  CHECK(high.success);
  CHECK(high.collision_count == 0);
  const EpisodeResult low = run(query, Policy::low);
  CHECK_FALSE(low.success);
  CHECK(low.reason == FailureReason::step_limit);
}

TEST_CASE("obstacle success boundaries sit at the step limits") {
  CHECK(run(corridor_query(EvalKind::obstacle, 0.6, 0.30), Policy::high).success);
  const EpisodeResult high_fail = run(corridor_query(EvalKind::obstacle, 0.6, 0.35), Policy::high);
  CHECK_FALSE(high_fail.success);
  CHECK(high_fail.reason == FailureReason::step_limit);

  CHECK(run(corridor_query(EvalKind::obstacle, 0.6, 0.10), Policy::low).success);
  const EpisodeResult low_fail = run(corridor_query(EvalKind::obstacle, 0.6, 0.15), Policy::low);
  CHECK_FALSE(low_fail.success);
  CHECK(low_fail.reason == FailureReason::step_limit);

  // Beyond reach entirely: the box face is hit instead of stepped onto.
  CHECK_FALSE(run(corridor_query(EvalKind::obstacle, 0.6, 0.40), Policy::high).success);
}

TEST_CASE("only the adaptive policy solves crouch-on-top courses") {
  // Obstacle 0.25 under a 0.6 gap: stepping up needs the standing limit,
  // fitting under the bar needs a crouch, so fixed postures fail.
  const QueryStructure query = corridor_query(EvalKind::overhanging_plus_obstacle, 0.6, 0.25);

  const EpisodeResult adaptive = run(query, Policy::adaptive_oracle);
  CHECK(adaptive.success);
  CHECK(adaptive.min_clearance > 0.0);
  CHECK(adaptive.min_clearance < 0.05);

  const EpisodeResult high = run(query, Policy::high);
  CHECK_FALSE(high.success);
  CHECK(high.reason == FailureReason::collision);

  const EpisodeResult low = run(query, Policy::low);
  CHECK_FALSE(low.success);
  CHECK(low.reason == FailureReason::step_limit);

  // Below the minimum crouch envelope nobody passes.
  CHECK_FALSE(run(corridor_query(EvalKind::overhanging_plus_obstacle, 0.55, 0.25),
                  Policy::adaptive_oracle)
                  .success);
  // The bar alone stops a standing body even at the widest swept gap.
  CHECK_FALSE(
      run(corridor_query(EvalKind::overhanging_plus_obstacle, 0.80, 0.25), Policy::high).success);
}

TEST_CASE("walking off the terrain fails with no_support") {
  Scene scene;
  add_triangle(scene.terrain, Vec3{-1, -2, 0}, Vec3{2, -2, 0}, Vec3{2, 2, 0});
  add_triangle(scene.terrain, Vec3{-1, -2, 0}, Vec3{2, 2, 0}, Vec3{-1, 2, 0});
  scene.spawn = {0.0, 0.0, 0.0};
  scene.goal = {6.0, 0.0};
  const QueryStructure query{scene};
  const EpisodeResult r = run(query, Policy::high);
  CHECK_FALSE(r.success);
  CHECK(r.reason == FailureReason::no_support);
  CHECK(r.time_to_goal < 10.0);
}

TEST_CASE("an exhausted budget fails with timeout") {
  const QueryStructure query = corridor_query(EvalKind::obstacle, 0.6, 0.0);
  EpisodeConfig config;
  config.time_budget = 1.0;
  const EpisodeResult r = run_episode(query, Policy::high, config, 5);
  CHECK_FALSE(r.success);
  CHECK(r.reason == FailureReason::timeout);
  CHECK(r.time_to_goal == 1.0);
}

TEST_CASE("episode configuration is validated") {
  const QueryStructure query = corridor_query(EvalKind::obstacle, 0.6, 0.0);

  EpisodeConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(run_episode(query, Policy::high, bad, 1), ConfigError);

  bad = EpisodeConfig{};
  bad.speed = -1.0;
  CHECK_THROWS_AS(run_episode(query, Policy::high, bad, 1), ConfigError);

  bad = EpisodeConfig{};
  bad.body.crouch_height = 0.7;  // above standing
  CHECK_THROWS_AS(run_episode(query, Policy::high, bad, 1), ConfigError);

  bad = EpisodeConfig{};
  bad.body.step_limit_standing = 0.05;  // below the crouched limit
  CHECK_THROWS_AS(run_episode(query, Policy::high, bad, 1), ConfigError);

  Scene degenerate;
  add_triangle(degenerate.terrain, Vec3{-1, -1, 0}, Vec3{1, -1, 0}, Vec3{0, 1, 0});
  degenerate.spawn = {0.0, 0.0, 0.0};
  degenerate.goal = {0.0, 0.0};
  const QueryStructure degenerate_query{degenerate};
  CHECK_THROWS_AS(run_episode(degenerate_query, Policy::high, EpisodeConfig{}, 1), ConfigError);
}

TEST_CASE("success grids are deterministic and job-count independent") {
  SweepConfig config;
  config.gap_heights = {0.30, 0.50, 0.65};
  config.obstacle_heights = {0.10, 0.25, 0.35};
  config.seeds_per_cell = 2;
  config.seed = 17;
  const std::vector<EvalKind> kinds = {EvalKind::overhanging, EvalKind::obstacle,
                                       EvalKind::overhanging_plus_obstacle};

  config.jobs = 1;
  const std::vector<SuccessCell> serial = success_grid(kinds, config);
  config.jobs = 4;
  const std::vector<SuccessCell> parallel = success_grid(kinds, config);

  REQUIRE(serial.size() == 27);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].policy == parallel[i].policy);
    CHECK(serial[i].kind == parallel[i].kind);
    CHECK(serial[i].param == parallel[i].param);
    CHECK(serial[i].success_rate == parallel[i].success_rate);
    CHECK(serial[i].n == 2);
  }

  // Sorted by (policy, kind, param).
  for (std::size_t i = 1; i < serial.size(); ++i) {
    const auto& a = serial[i - 1];
    const auto& b = serial[i];
    const bool ordered =
        static_cast<int>(a.policy) < static_cast<int>(b.policy) ||
        (a.policy == b.policy && (static_cast<int>(a.kind) < static_cast<int>(b.kind) ||
                                  (a.kind == b.kind && a.param < b.param)));
    CHECK(ordered);
  }

  // Expected success pattern across the reduced sweep.
  CHECK(cell_at(serial, Policy::low, EvalKind::overhanging, 0.30).success_rate == 0.0);
  CHECK(cell_at(serial, Policy::low, EvalKind::overhanging, 0.50).success_rate == 1.0);
  CHECK(cell_at(serial, Policy::high, EvalKind::overhanging, 0.50).success_rate == 0.0);
  CHECK(cell_at(serial, Policy::high, EvalKind::overhanging, 0.65).success_rate == 1.0);
  CHECK(cell_at(serial, Policy::high, EvalKind::obstacle, 0.25).success_rate == 1.0);
  CHECK(cell_at(serial, Policy::high, EvalKind::obstacle, 0.35).success_rate == 0.0);
  CHECK(cell_at(serial, Policy::low, EvalKind::obstacle, 0.10).success_rate == 1.0);
  CHECK(cell_at(serial, Policy::low, EvalKind::obstacle, 0.25).success_rate == 0.0);

  // Gap monotonicity per policy on the overhang course, obstacle-height
  // monotonicity on the obstacle course.
  for (Policy policy : {Policy::high, Policy::low, Policy::adaptive_oracle}) {
    double prev = -1.0;
    for (double gap : config.gap_heights) {
      const double rate = cell_at(serial, policy, EvalKind::overhanging, gap).success_rate;
      CHECK(rate >= prev);
      prev = rate;
    }
    double prev_obstacle = 2.0;
    for (double h : config.obstacle_heights) {
      const double rate = cell_at(serial, policy, EvalKind::obstacle, h).success_rate;
      CHECK(rate <= prev_obstacle);
      prev_obstacle = rate;
    }
  }

  // The oracle dominates both fixed policies on the combined course and is
  // strictly better somewhere.
  bool strict = false;
  for (double gap : config.gap_heights) {
    const double a =
        cell_at(serial, Policy::adaptive_oracle, EvalKind::overhanging_plus_obstacle, gap)
            .success_rate;
    const double h =
        cell_at(serial, Policy::high, EvalKind::overhanging_plus_obstacle, gap).success_rate;
    const double l =
        cell_at(serial, Policy::low, EvalKind::overhanging_plus_obstacle, gap).success_rate;
    CHECK(a >= std::max(h, l));
    if (a > std::max(h, l)) strict = true;
  }
  CHECK(strict);
}

TEST_CASE("results CSV is formatted, ordered, and byte-stable") {
  SweepConfig config;
  config.gap_heights = {0.40};
  config.obstacle_heights = {0.25};
  config.seeds_per_cell = 2;
  const std::vector<EvalKind> kinds = {EvalKind::overhanging, EvalKind::obstacle};
  const std::vector<SuccessCell> cells = success_grid(kinds, config);
  REQUIRE(cells.size() == 6);

  const auto path = std::filesystem::temp_directory_path() / "terra_eval_results.csv";
  write_results_csv(cells, path.string());
  const std::string first = read_file(path);
  write_results_csv(cells, path.string());
  CHECK(read_file(path) == first);

  std::istringstream in(first);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "policy,kind,param,success_rate,n");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "high,overhanging,0.4000,0.000000,2");
  CHECK(rows[1] == "high,obstacle,0.2500,1.000000,2");
  CHECK(rows[2] == "low,overhanging,0.4000,1.000000,2");
  CHECK(rows[3] == "low,obstacle,0.2500,0.000000,2");
  CHECK(rows[4] == "adaptive_oracle,overhanging,0.4000,1.000000,2");
  CHECK(rows[5] == "adaptive_oracle,obstacle,0.2500,1.000000,2");

  write_results_csv({}, path.string());
  CHECK(read_file(path) == "policy,kind,param,success_rate,n\n");
  std::filesystem::remove(path);
}

TEST_CASE("sweep configuration is validated") {
  SweepConfig config;
  CHECK_THROWS_AS(success_grid({}, config), ConfigError);

  config = SweepConfig{};
  config.seeds_per_cell = 0;
  CHECK_THROWS_AS(success_grid({EvalKind::obstacle}, config), ConfigError);

  config = SweepConfig{};
  config.gap_heights.clear();
  CHECK_THROWS_AS(success_grid({EvalKind::overhanging}, config), ConfigError);

  config = SweepConfig{};
  config.obstacle_heights = {-0.1};
  CHECK_THROWS_AS(success_grid({EvalKind::obstacle}, config), ConfigError);
}
