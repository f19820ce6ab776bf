#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "terra/scene.hpp"
#include "terra/types.hpp"

namespace terra {

struct RayHit {
  double t = 0.0;
  Vec3 point;
  Vec3 normal;  // geometric surface normal (terrain faces up, boxes outward)
  int prim = -1;
};

struct SphericalScanPattern {
  std::vector<Vec3> directions;  // unit vectors
  double max_range = 2.0;
};

// Deterministic near-uniform sphere coverage; same count, same directions.
SphericalScanPattern fibonacci_pattern(int count = 64, double max_range = 2.0);

// Vertical slice of unobstructed space at a fixed (x, y): bottom is the
// supporting surface, top the ceiling above it (+inf under open sky).
struct FreeInterval {
  double bottom = 0.0;
  double top = 0.0;
};

struct HeightSample {
  double height = 0.0;
  bool valid = false;
};

struct FootSampleParams {
  std::vector<double> radii = {0.08, 0.12, 0.18, 0.26, 0.36};  // strictly increasing
  int angular_samples = 6;
  double lift = 0.5;  // rays start this far above the foot
};

// Ring samples around each foot: feet x radii x angular samples, flattened
// with the angular index fastest.
struct HeightSamples {
  int feet = 0;
  int radii = 0;
  int angular = 0;
  std::vector<HeightSample> samples;

  const HeightSample& at(int foot, int ring, int angle) const {
    return samples[(static_cast<std::size_t>(foot) * radii + ring) * angular + angle];
  }
};

// Immutable BVH over the scene's triangles and overhang boxes. All queries
// are read-only and safe to run concurrently.
class QueryStructure {
 public:
  explicit QueryStructure(Scene scene);

  const Scene& scene() const { return scene_; }

  // Nearest surface crossing with t in (epsilon, max_range].
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir,
                                double max_range = std::numeric_limits<double>::infinity()) const;

  // Every surface crossing along the ray, ascending t. A ray passing through
  // a box reports both its entry and exit.
  std::vector<RayHit> raycast_all(const Vec3& origin, const Vec3& dir,
                                  double max_range = std::numeric_limits<double>::infinity()) const;

  // Per-direction distances; misses report the pattern's max_range.
  std::vector<double> spherical_scan(const Vec3& origin, const SphericalScanPattern& pattern) const;

  // Mean ground height under the body: center plus four points at the given
  // radius along the yaw-aligned body axes. Rays start just below base_z so
  // ceilings above the body are ignored. Throws QueryError if any ray
  // escapes the terrain.
  double ground_height_avg(double x, double y, double base_z, double yaw,
                           double radius = 0.25) const;

  HeightSamples foot_height_samples(const std::vector<Vec3>& feet,
                                    const FootSampleParams& params = {}) const;

  // Free vertical intervals at (x, y), ascending; empty off the terrain.
  std::vector<FreeInterval> free_intervals(double x, double y) const;

  // True iff the box touches any scene surface.
  bool collision_check(const OrientedBox& body) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;
    int right = -1;
    int first = 0;
    int count = 0;
  };

  bool is_box_prim(int prim) const { return prim >= triangle_count_; }
  void prim_hits(int prim, const Vec3& origin, const Vec3& dir, double max_range,
                 bool all_crossings, std::vector<RayHit>& out) const;
  int build_node(std::vector<int>& prims, std::vector<Aabb>& boxes, std::vector<Vec3>& centers,
                 int first, int count);

  Scene scene_;
  std::vector<Node> nodes_;
  std::vector<int> order_;   // prim ids, leaf ranges index into this
  int triangle_count_ = 0;   // prims below this id are triangles
  int root_ = -1;
};

// Validates the scene is non-empty before building.
QueryStructure build_query(const Scene& scene);

}  // namespace terra
