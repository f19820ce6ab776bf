#include "terra/query.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "terra/errors.hpp"
#include "terra/intersect.hpp"

namespace terra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 triangle_normal(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
  return normalized(cross(v1 - v0, v2 - v0));
}

}  // namespace

SphericalScanPattern fibonacci_pattern(int count, double max_range) {
  if (count < 1) throw ConfigError("scan pattern needs at least one direction");
  if (max_range <= 0.0) throw ConfigError("scan max_range must be positive");
  SphericalScanPattern pattern;
  pattern.max_range = max_range;
  pattern.directions.reserve(static_cast<std::size_t>(count));
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    pattern.directions.push_back(normalized({r * std::cos(phi), r * std::sin(phi), z}));
  }
  return pattern;
}

QueryStructure::QueryStructure(Scene scene) : scene_(std::move(scene)) {
  // Degenerate triangles are dropped up front so queries never see them.
  std::vector<std::array<std::uint32_t, 3>> kept;
  kept.reserve(scene_.terrain.triangles.size());
  for (const auto& tri : scene_.terrain.triangles) {
    const Vec3& v0 = scene_.terrain.vertices[tri[0]];
    const Vec3& v1 = scene_.terrain.vertices[tri[1]];
    const Vec3& v2 = scene_.terrain.vertices[tri[2]];
    if (length(cross(v1 - v0, v2 - v0)) >= 1e-16) kept.push_back(tri);
  }
  scene_.terrain.triangles = std::move(kept);

  triangle_count_ = static_cast<int>(scene_.terrain.triangles.size());
  const int prim_count = triangle_count_ + static_cast<int>(scene_.overhangs.size());
  if (prim_count == 0) throw ConfigError("scene has no geometry to query");

  std::vector<Aabb> boxes(static_cast<std::size_t>(prim_count));
  std::vector<Vec3> centers(static_cast<std::size_t>(prim_count));
  order_.resize(static_cast<std::size_t>(prim_count));
  for (int p = 0; p < prim_count; ++p) {
    order_[static_cast<std::size_t>(p)] = p;
    Aabb box;
    if (p < triangle_count_) {
      const auto& tri = scene_.terrain.triangles[static_cast<std::size_t>(p)];
      for (int k = 0; k < 3; ++k) box.expand(scene_.terrain.vertices[tri[k]]);
    } else {
      box = scene_.overhangs[static_cast<std::size_t>(p - triangle_count_)].bounds();
    }
    boxes[static_cast<std::size_t>(p)] = box;
    centers[static_cast<std::size_t>(p)] = box.center();
  }

  nodes_.reserve(static_cast<std::size_t>(2 * prim_count));
  root_ = build_node(order_, boxes, centers, 0, prim_count);
}

int QueryStructure::build_node(std::vector<int>& prims, std::vector<Aabb>& boxes,
                               std::vector<Vec3>& centers, int first, int count) {
  Node node;
  node.first = first;
  node.count = count;
  for (int i = first; i < first + count; ++i)
    node.box.expand(boxes[static_cast<std::size_t>(prims[static_cast<std::size_t>(i)])]);

  if (count > 4) {
    Aabb centroid_bounds;
    for (int i = first; i < first + count; ++i)
      centroid_bounds.expand(centers[static_cast<std::size_t>(prims[static_cast<std::size_t>(i)])]);
    const Vec3 extent = centroid_bounds.hi - centroid_bounds.lo;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;

    auto key = [&](int prim) {
      const Vec3& c = centers[static_cast<std::size_t>(prim)];
      return axis == 0 ? c.x : axis == 1 ? c.y : c.z;
    };
    // Full sort with index tie-break keeps the tree layout deterministic.
    std::sort(prims.begin() + first, prims.begin() + first + count, [&](int a, int b) {
      const double ka = key(a), kb = key(b);
      return ka < kb || (ka == kb && a < b);
    });

    const int mid = first + count / 2;
    node.count = 0;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build_node(prims, boxes, centers, first, mid - first);
    const int right = build_node(prims, boxes, centers, mid, first + count - mid);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
  }

  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  return self;
}

void QueryStructure::prim_hits(int prim, const Vec3& origin, const Vec3& dir, double max_range,
                               bool all_crossings, std::vector<RayHit>& out) const {
  if (!is_box_prim(prim)) {
    const auto& tri = scene_.terrain.triangles[static_cast<std::size_t>(prim)];
    const Vec3& v0 = scene_.terrain.vertices[tri[0]];
    const Vec3& v1 = scene_.terrain.vertices[tri[1]];
    const Vec3& v2 = scene_.terrain.vertices[tri[2]];
    const auto t = ray_triangle(origin, dir, v0, v1, v2);
    if (t && *t <= max_range)
      out.push_back({*t, origin + dir * *t, triangle_normal(v0, v1, v2), prim});
    return;
  }

  const OrientedBox& box = scene_.overhangs[static_cast<std::size_t>(prim - triangle_count_)];
  if (all_crossings) {
    const Mat3 r = box.rotation();
    const Mat3 rt = r.transposed();
    const Vec3 lo_o = rt * (origin - box.center);
    const Vec3 lo_d = rt * dir;
    const auto hit = ray_aabb(lo_o, lo_d, -1.0 * box.half, box.half);
    if (!hit) return;
    const double ld[3] = {lo_d.x, lo_d.y, lo_d.z};
    auto face_normal = [&](int axis, bool entering) {
      Vec3 n{0, 0, 0};
      const double sign = entering ? (ld[axis] > 0 ? -1.0 : 1.0) : (ld[axis] > 0 ? 1.0 : -1.0);
      (axis == 0 ? n.x : axis == 1 ? n.y : n.z) = sign;
      return r * n;
    };
    if (hit->t_enter > kRayEpsilon && hit->t_enter <= max_range)
      out.push_back(
          {hit->t_enter, origin + dir * hit->t_enter, face_normal(hit->enter_axis, true), prim});
    if (hit->t_exit > kRayEpsilon && hit->t_exit <= max_range)
      out.push_back(
          {hit->t_exit, origin + dir * hit->t_exit, face_normal(hit->exit_axis, false), prim});
    return;
  }

  const auto hit = ray_obb(origin, dir, box);
  if (hit && hit->t <= max_range) out.push_back({hit->t, origin + dir * hit->t, hit->normal, prim});
}

std::optional<RayHit> QueryStructure::raycast(const Vec3& origin, const Vec3& dir,
                                              double max_range) const {
  if (dir.x == 0.0 && dir.y == 0.0 && dir.z == 0.0)
    throw std::invalid_argument("raycast direction must be nonzero");

  std::optional<RayHit> best;
  double limit = max_range;
  std::vector<RayHit> scratch;
  int stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    const auto slab = ray_aabb(origin, dir, node.box.lo, node.box.hi);
    if (!slab || slab->t_enter > limit) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        scratch.clear();
        prim_hits(order_[static_cast<std::size_t>(i)], origin, dir, limit, false, scratch);
        for (const RayHit& h : scratch)
          if (!best || h.t < best->t) {
            best = h;
            limit = h.t;
          }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

std::vector<RayHit> QueryStructure::raycast_all(const Vec3& origin, const Vec3& dir,
                                                double max_range) const {
  if (dir.x == 0.0 && dir.y == 0.0 && dir.z == 0.0)
    throw std::invalid_argument("raycast direction must be nonzero");

  std::vector<RayHit> hits;
  int stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    const auto slab = ray_aabb(origin, dir, node.box.lo, node.box.hi);
    if (!slab || slab->t_enter > max_range) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i)
        prim_hits(order_[static_cast<std::size_t>(i)], origin, dir, max_range, true, hits);
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
    return a.t < b.t || (a.t == b.t && a.prim < b.prim);
  });
  return hits;
}

std::vector<double> QueryStructure::spherical_scan(const Vec3& origin,
                                                   const SphericalScanPattern& pattern) const {
  std::vector<double> distances;
  distances.reserve(pattern.directions.size());
  for (const Vec3& dir : pattern.directions) {
    const auto hit = raycast(origin, dir, pattern.max_range);
    distances.push_back(hit ? hit->t : pattern.max_range);
  }
  return distances;
}

double QueryStructure::ground_height_avg(double x, double y, double base_z, double yaw,
                                         double radius) const {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double z0 = base_z - 0.05;
  const Vec3 offsets[5] = {{0, 0, 0},
                           {radius * cy, radius * sy, 0},
                           {-radius * cy, -radius * sy, 0},
                           {-radius * sy, radius * cy, 0},
                           {radius * sy, -radius * cy, 0}};
  double sum = 0.0;
  for (const Vec3& off : offsets) {
    const auto hit = raycast({x + off.x, y + off.y, z0}, {0, 0, -1});
    if (!hit) throw QueryError("ground ray found no terrain under the body");
    sum += hit->point.z;
  }
  return sum / 5.0;
}

HeightSamples QueryStructure::foot_height_samples(const std::vector<Vec3>& feet,
                                                  const FootSampleParams& params) const {
  for (std::size_t i = 1; i < params.radii.size(); ++i)
    if (params.radii[i] <= params.radii[i - 1])
      throw ConfigError("foot sample radii must be strictly increasing");
  if (params.angular_samples < 1) throw ConfigError("angular_samples must be positive");

  HeightSamples out;
  out.feet = static_cast<int>(feet.size());
  out.radii = static_cast<int>(params.radii.size());
  out.angular = params.angular_samples;
  out.samples.reserve(feet.size() * params.radii.size() *
                      static_cast<std::size_t>(params.angular_samples));
  for (const Vec3& foot : feet)
    for (double radius : params.radii)
      for (int a = 0; a < params.angular_samples; ++a) {
        const double angle = 2.0 * M_PI * a / params.angular_samples;
        const Vec3 origin{foot.x + radius * std::cos(angle), foot.y + radius * std::sin(angle),
                          foot.z + params.lift};
        const auto hit = raycast(origin, {0, 0, -1});
        HeightSample s;
        if (hit) {
          s.height = hit->point.z;
          s.valid = true;
        }
        out.samples.push_back(s);
      }
  return out;
}

std::vector<FreeInterval> QueryStructure::free_intervals(double x, double y) const {
  const Aabb bounds = scene_.bounds();
  if (!bounds.valid()) return {};
  const Vec3 origin{x, y, bounds.hi.z + 1.0};
  std::vector<RayHit> hits = raycast_all(origin, {0, 0, -1});

  std::vector<FreeInterval> result;
  double current_top = kInf;
  int depth = 0;
  double last_t = -kInf;
  int last_sign = 0;
  for (const RayHit& hit : hits) {
    const double along = dot(hit.normal, Vec3{0, 0, -1});
    if (along == 0.0) continue;  // vertical wall grazed edge-on
    const int sign = along < 0.0 ? -1 : 1;  // -1 entering solid, +1 leaving
    // Coplanar duplicates (shared mesh edges) collapse to one crossing.
    if (sign == last_sign && hit.t - last_t < 1e-12) continue;
    last_t = hit.t;
    last_sign = sign;
    if (sign < 0) {
      if (depth == 0) result.push_back({hit.point.z, current_top});
      ++depth;
    } else {
      if (depth > 0) {
        --depth;
        if (depth == 0) current_top = hit.point.z;
      }
    }
  }

  std::reverse(result.begin(), result.end());
  std::vector<FreeInterval> cleaned;
  for (const FreeInterval& iv : result)
    if (iv.top > iv.bottom) cleaned.push_back(iv);
  return cleaned;
}

bool QueryStructure::collision_check(const OrientedBox& body) const {
  const Aabb body_bounds = body.bounds();
  int stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (!node.box.overlaps(body_bounds)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int prim = order_[static_cast<std::size_t>(i)];
        if (is_box_prim(prim)) {
          if (obb_obb_overlap(body, scene_.overhangs[static_cast<std::size_t>(prim - triangle_count_)]))
            return true;
        } else {
          const auto& tri = scene_.terrain.triangles[static_cast<std::size_t>(prim)];
          if (triangle_obb_overlap(scene_.terrain.vertices[tri[0]], scene_.terrain.vertices[tri[1]],
                                   scene_.terrain.vertices[tri[2]], body))
            return true;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return false;
}

QueryStructure build_query(const Scene& scene) {
  if (scene.terrain.triangles.empty() && scene.overhangs.empty())
    throw ConfigError("cannot build queries over an empty scene");
  return QueryStructure(scene);
}

}  // namespace terra
