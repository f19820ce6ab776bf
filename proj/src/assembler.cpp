#include "terra/assembler.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <unordered_map>

#include "terra/errors.hpp"
#include "terra/intersect.hpp"
#include "terra/query.hpp"
#include "terra/rng.hpp"

namespace terra {

namespace {

struct VertexKey {
  std::uint64_t x, y, z;
  bool operator==(const VertexKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t v : {k.x, k.y, k.z}) {
      h ^= v;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

std::uint64_t coord_bits(double v) {
  if (v == 0.0) v = 0.0;  // collapse -0.0
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return bits;
}

// Welds vertices by exact coordinate bits; insertion order fixes indices.
class MeshBuilder {
 public:
  std::uint32_t vertex(const Vec3& p) {
    const VertexKey key{coord_bits(p.x), coord_bits(p.y), coord_bits(p.z)};
    auto [it, inserted] = lookup_.try_emplace(key, static_cast<std::uint32_t>(mesh_.vertices.size()));
    if (inserted) mesh_.vertices.push_back(p);
    return it->second;
  }

  void triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const std::uint32_t ia = vertex(a), ib = vertex(b), ic = vertex(c);
    if (ia == ib || ib == ic || ia == ic) return;
    mesh_.triangles.push_back({ia, ib, ic});
  }

  TriangleMesh take() { return std::move(mesh_); }

 private:
  TriangleMesh mesh_;
  std::unordered_map<VertexKey, std::uint32_t, VertexKeyHash> lookup_;
};

// Two triangles sealing the gap between mismatched border samples at a
// shared tile edge. p0/p1 run along the seam; ha/hb are the two tiles'
// heights at each end.
void seam_quad(MeshBuilder& mb, const Vec3& p0, const Vec3& p1, double ha0, double hb0, double ha1,
               double hb1) {
  const Vec3 a0{p0.x, p0.y, ha0}, b0{p0.x, p0.y, hb0};
  const Vec3 a1{p1.x, p1.y, ha1}, b1{p1.x, p1.y, hb1};
  mb.triangle(a0, b0, b1);
  mb.triangle(a0, b1, a1);
}

bool disc_near_bounds(const Aabb& box, double cx, double cy, double radius) {
  const double dx = std::max({box.lo.x - cx, 0.0, cx - box.hi.x});
  const double dy = std::max({box.lo.y - cy, 0.0, cy - box.hi.y});
  return dx * dx + dy * dy <= radius * radius;
}

}  // namespace

TriangleMesh assemble_mesh(const CollapsedGrid& grid, const TileSet& tiles) {
  if (grid.rows < 1 || grid.cols < 1) throw ConfigError("grid must have at least one cell");
  if (tiles.size() == 0) throw ConfigError("tile set is empty");
  for (int id : grid.assignment)
    if (id < 0 || id >= tiles.size()) throw ConfigError("grid references an unknown tile id");

  const int n = tiles.tile(0).heights.n();
  const double size = tiles.tile_size();
  const double spacing = size / (n - 1);
  MeshBuilder mb;

  auto sample = [&](int r, int c, int rr, int cc) {
    const HeightArray& h = tiles.tile(grid.at(r, c)).heights;
    return Vec3{c * size + cc * spacing, r * size + rr * spacing, h.at(rr, cc)};
  };

  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c)
      for (int rr = 0; rr + 1 < n; ++rr)
        for (int cc = 0; cc + 1 < n; ++cc) {
          const Vec3 p00 = sample(r, c, rr, cc);
          const Vec3 p01 = sample(r, c, rr, cc + 1);
          const Vec3 p11 = sample(r, c, rr + 1, cc + 1);
          const Vec3 p10 = sample(r, c, rr + 1, cc);
          mb.triangle(p00, p01, p11);
          mb.triangle(p00, p11, p10);
        }

  // Compatibility is decided on quantized signatures, so neighbors may
  // disagree on raw border heights; seal those seams with vertical quads.
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c + 1 < grid.cols; ++c) {
      const HeightArray& west = tiles.tile(grid.at(r, c)).heights;
      const HeightArray& east = tiles.tile(grid.at(r, c + 1)).heights;
      const double x = (c + 1) * size;
      for (int rr = 0; rr + 1 < n; ++rr) {
        const double wa0 = west.at(rr, n - 1), ea0 = east.at(rr, 0);
        const double wa1 = west.at(rr + 1, n - 1), ea1 = east.at(rr + 1, 0);
        if (wa0 == ea0 && wa1 == ea1) continue;
        seam_quad(mb, {x, r * size + rr * spacing, 0}, {x, r * size + (rr + 1) * spacing, 0}, wa0,
                  ea0, wa1, ea1);
      }
    }
  for (int r = 0; r + 1 < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      const HeightArray& south = tiles.tile(grid.at(r, c)).heights;
      const HeightArray& north = tiles.tile(grid.at(r + 1, c)).heights;
      const double y = (r + 1) * size;
      for (int cc = 0; cc + 1 < n; ++cc) {
        const double sa0 = south.at(n - 1, cc), na0 = north.at(0, cc);
        const double sa1 = south.at(n - 1, cc + 1), na1 = north.at(0, cc + 1);
        if (sa0 == na0 && sa1 == na1) continue;
        seam_quad(mb, {c * size + cc * spacing, y, 0}, {c * size + (cc + 1) * spacing, y, 0}, sa0,
                  na0, sa1, na1);
      }
    }

  return mb.take();
}

Scene assemble_scene(const TileSet& tiles, const CollapsedGrid& grid, std::uint64_t seed) {
  Scene scene;
  scene.terrain = assemble_mesh(grid, tiles);
  const double s = tiles.tile_size();
  scene.spawn.x = s * 0.5;
  scene.spawn.y = s * 0.5;
  scene.goal.x = grid.cols * s - s * 0.5;
  scene.goal.y = grid.rows * s - s * 0.5;
  scene.spawn.yaw = std::atan2(scene.goal.y - scene.spawn.y, scene.goal.x - scene.spawn.x);
  scene.meta.seed = seed;
  scene.meta.tileset_hash = tiles.content_hash();
  scene.meta.rows = grid.rows;
  scene.meta.cols = grid.cols;
  return scene;
}

Scene place_overhangs(Scene scene, const OverhangParams& params, std::uint64_t seed) {
  if (params.count_min < 0 || params.count_max < params.count_min)
    throw ConfigError("overhang count range is invalid");
  if (params.clearance_min <= 0.0 || params.clearance_max < params.clearance_min)
    throw ConfigError("overhang clearance range is invalid");
  if (params.dims_min.x <= 0.0 || params.dims_min.y <= 0.0 || params.dims_min.z <= 0.0 ||
      params.dims_max.x < params.dims_min.x || params.dims_max.y < params.dims_min.y ||
      params.dims_max.z < params.dims_min.z)
    throw ConfigError("overhang dimension range is invalid");
  if (params.tilt_max < 0.0) throw ConfigError("tilt_max must be non-negative");
  if (params.max_attempts < 1) throw ConfigError("max_attempts must be positive");

  Scene terrain_only;
  terrain_only.terrain = scene.terrain;
  const QueryStructure ground_query = build_query(terrain_only);
  const Aabb terrain_bounds = scene.terrain.bounds();
  const double ray_top = terrain_bounds.hi.z + params.clearance_max + params.dims_max.z + 1.0;

  Rng rng(seed);
  const int count = params.count_min +
                    static_cast<int>(rng.uniform_below(
                        static_cast<std::uint64_t>(params.count_max - params.count_min) + 1));

  for (int b = 0; b < count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
      OrientedBox box;
      box.center.x = rng.uniform(terrain_bounds.lo.x, terrain_bounds.hi.x);
      box.center.y = rng.uniform(terrain_bounds.lo.y, terrain_bounds.hi.y);
      box.half.x = 0.5 * rng.uniform(params.dims_min.x, params.dims_max.x);
      box.half.y = 0.5 * rng.uniform(params.dims_min.y, params.dims_max.y);
      box.half.z = 0.5 * rng.uniform(params.dims_min.z, params.dims_max.z);
      box.yaw = rng.uniform(0.0, 2.0 * M_PI);
      box.roll = rng.uniform(-params.tilt_max, params.tilt_max);
      box.pitch = rng.uniform(-params.tilt_max, params.tilt_max);
      const double clearance = rng.uniform(params.clearance_min, params.clearance_max);

      const auto ground =
          ground_query.raycast({box.center.x, box.center.y, ray_top}, {0, 0, -1});
      if (!ground) continue;

      // Distance along the downward center ray from center to the box
      // surface; placing the underside exactly `clearance` above ground.
      const Mat3 r = box.rotation();
      double exit_t = std::numeric_limits<double>::infinity();
      const double halves[3] = {box.half.x, box.half.y, box.half.z};
      for (int i = 0; i < 3; ++i) {
        const double d = std::abs(r.at(2, i));
        if (d > 1e-12) exit_t = std::min(exit_t, halves[i] / d);
      }
      box.center.z = ground->point.z + clearance + exit_t;

      const Aabb box_bounds = box.bounds();
      if (disc_near_bounds(box_bounds, scene.spawn.x, scene.spawn.y, params.keepout_radius) ||
          disc_near_bounds(box_bounds, scene.goal.x, scene.goal.y, params.keepout_radius))
        continue;
      if (ground_query.collision_check(box)) continue;
      bool touches = false;
      for (const OrientedBox& other : scene.overhangs)
        if (obb_obb_overlap(box, other)) {
          touches = true;
          break;
        }
      if (touches) continue;

      scene.overhangs.push_back(box);
      placed = true;
    }
    if (!placed) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "could not place overhang %d within %d attempts (terrain contact, box "
                    "overlap, and spawn/goal keepout all rejected)",
                    b, params.max_attempts);
      throw PlacementError(msg);
    }
  }
  return scene;
}

const char* to_string(EvalKind kind) {
  switch (kind) {
    case EvalKind::overhanging:
      return "overhanging";
    case EvalKind::obstacle:
      return "obstacle";
    case EvalKind::overhanging_plus_obstacle:
      return "overhanging_plus_obstacle";
  }
  return "unknown";
}

Scene build_eval_terrain(EvalKind kind, const EvalTerrainParams& params) {
  if (params.corridor_length <= 0.0 || params.corridor_width <= 0.0 ||
      params.grid_spacing <= 0.0)
    throw ConfigError("corridor dimensions must be positive");
  if (params.goal_distance <= 0.0 || params.goal_distance > params.corridor_length - 1.0)
    throw ConfigError("goal must lie inside the corridor");
  if (params.obstacle_height < 0.0) throw ConfigError("obstacle_height must be non-negative");
  if (params.gap_height <= 0.0) throw ConfigError("gap_height must be positive");
  if (params.obstacle_depth <= 0.0 || params.combined_obstacle_depth <= 0.0 ||
      params.overhang_depth <= 0.0 || params.overhang_thickness <= 0.0)
    throw ConfigError("box dimensions must be positive");

  const int nx = static_cast<int>(std::lround(params.corridor_length / params.grid_spacing)) + 1;
  const int ny = static_cast<int>(std::lround(params.corridor_width / params.grid_spacing)) + 1;
  const double x0 = -1.0;
  const double y0 = -0.5 * params.corridor_width;

  MeshBuilder mb;
  for (int iy = 0; iy + 1 < ny; ++iy)
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const Vec3 p00{x0 + ix * params.grid_spacing, y0 + iy * params.grid_spacing, 0.0};
      const Vec3 p01{x0 + (ix + 1) * params.grid_spacing, y0 + iy * params.grid_spacing, 0.0};
      const Vec3 p11{x0 + (ix + 1) * params.grid_spacing, y0 + (iy + 1) * params.grid_spacing, 0.0};
      const Vec3 p10{x0 + ix * params.grid_spacing, y0 + (iy + 1) * params.grid_spacing, 0.0};
      mb.triangle(p00, p01, p11);
      mb.triangle(p00, p11, p10);
    }

  Scene scene;
  scene.terrain = mb.take();
  scene.spawn = {0.0, 0.0, 0.0};
  scene.goal = {params.goal_distance, 0.0};
  const double mid_x = 0.5 * params.goal_distance;
  const double half_w = 0.5 * params.corridor_width;

  const bool with_obstacle =
      kind != EvalKind::overhanging && params.obstacle_height > 0.0;
  const bool with_overhang = kind != EvalKind::obstacle;

  if (with_obstacle) {
    const double depth = kind == EvalKind::overhanging_plus_obstacle
                             ? params.combined_obstacle_depth
                             : params.obstacle_depth;
    OrientedBox block;
    block.center = {mid_x, 0.0, 0.5 * params.obstacle_height};
    block.half = {0.5 * depth, half_w, 0.5 * params.obstacle_height};
    scene.overhangs.push_back(block);
  }
  if (with_overhang) {
    OrientedBox bar;
    bar.center = {mid_x, 0.0, params.gap_height + 0.5 * params.overhang_thickness};
    bar.half = {0.5 * params.overhang_depth, half_w, 0.5 * params.overhang_thickness};
    scene.overhangs.push_back(bar);
  }
  return scene;
}

}  // namespace terra
