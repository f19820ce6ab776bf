#pragma once

#include <cstdint>

#include "terra/scene.hpp"
#include "terra/tiles.hpp"
#include "terra/types.hpp"
#include "terra/wfc.hpp"

namespace terra {

// Per-tile surface grids translated to their cells and welded on shared
// border vertices. Where adjacent tiles disagree on a border height (legal
// when their quantized signatures still match), vertical skirt quads seal
// the seam so rays cannot slip between tiles.
TriangleMesh assemble_mesh(const CollapsedGrid& grid, const TileSet& tiles);

// Terrain mesh plus spawn/goal at the centers of the first and last grid
// cells, with metadata filled in.
Scene assemble_scene(const TileSet& tiles, const CollapsedGrid& grid, std::uint64_t seed);

struct OverhangParams {
  int count_min = 2;
  int count_max = 5;
  double clearance_min = 0.35;  // m between box underside and ground
  double clearance_max = 0.80;
  Vec3 dims_min{0.6, 0.6, 0.2};  // full extents
  Vec3 dims_max{1.8, 1.8, 0.5};
  double tilt_max = 0.2;         // |roll|, |pitch| bound, radians
  double keepout_radius = 0.8;   // around spawn and goal
  int max_attempts = 100;        // per box, before giving up
};

// Samples boxes above the terrain with the seeded generator. The clearance
// drawn for a box is exact: a downward ray from the box center leaves the
// box and travels that distance before reaching ground. Boxes overlapping
// terrain or the spawn/goal keepout discs are re-drawn.
Scene place_overhangs(Scene scene, const OverhangParams& params, std::uint64_t seed);

enum class EvalKind { overhanging, obstacle, overhanging_plus_obstacle };

const char* to_string(EvalKind kind);

struct EvalTerrainParams {
  double corridor_length = 8.0;  // x spans [-1, length - 1]
  double corridor_width = 3.0;
  double grid_spacing = 0.25;
  double goal_distance = 6.0;

  double obstacle_height = 0.25;        // ground box height; 0 = no box
  double gap_height = 0.6;              // overhang underside above ground
  double obstacle_depth = 0.8;          // along x, obstacle-only course
  double combined_obstacle_depth = 2.4; // wider, so the crouch happens on top
  double overhang_depth = 0.6;
  double overhang_thickness = 0.3;
};

// Flat corridor with spawn at x = 0 and goal goal_distance ahead; obstacle
// and/or overhang boxes centered mid-corridor, spanning the full width.
Scene build_eval_terrain(EvalKind kind, const EvalTerrainParams& params);

}  // namespace terra
