#pragma once

// Primitive intersection tests shared by the ray casting, voxelization, and
// collision paths. All overlap tests are non-strict: touching counts as
// intersecting.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "terra/types.hpp"

namespace terra {

// Hits closer than this along the ray are treated as self-intersections.
inline constexpr double kRayEpsilon = 1e-9;

struct RaySlabHit {
  double t_enter = 0.0;
  double t_exit = 0.0;
  int enter_axis = 0;
  int exit_axis = 0;
};

// Watertight enough for axis-aligned boxes: handles zero direction
// components without dividing by them.
inline std::optional<RaySlabHit> ray_aabb(const Vec3& origin, const Vec3& dir, const Vec3& lo,
                                          const Vec3& hi) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  int enter_axis = 0, exit_axis = 0;
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double l[3] = {lo.x, lo.y, lo.z};
  const double h[3] = {hi.x, hi.y, hi.z};
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < l[a] || o[a] > h[a]) return std::nullopt;
      continue;
    }
    double t1 = (l[a] - o[a]) / d[a];
    double t2 = (h[a] - o[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_enter) {
      t_enter = t1;
      enter_axis = a;
    }
    if (t2 < t_exit) {
      t_exit = t2;
      exit_axis = a;
    }
    if (t_enter > t_exit) return std::nullopt;
  }
  if (t_exit < 0.0) return std::nullopt;
  return RaySlabHit{t_enter, t_exit, enter_axis, exit_axis};
}

// Moller-Trumbore, both-sided. Returns the ray parameter t > kRayEpsilon.
inline std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& v0,
                                          const Vec3& v1, const Vec3& v2) {
  const Vec3 edge1 = v1 - v0;
  const Vec3 edge2 = v2 - v0;
  const Vec3 p = cross(dir, edge2);
  const double det = dot(edge1, p);
  if (std::abs(det) < 1e-16) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - v0;
  const double u = dot(tvec, p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = cross(tvec, edge1);
  const double v = dot(dir, q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = dot(edge2, q) * inv_det;
  if (t <= kRayEpsilon) return std::nullopt;
  return t;
}

struct ObbRayHit {
  double t = 0.0;
  Vec3 normal;  // outward face normal at the hit
};

// Nearest boundary crossing with t > kRayEpsilon; for an origin inside the
// box this is the exit point.
inline std::optional<ObbRayHit> ray_obb(const Vec3& origin, const Vec3& dir,
                                        const OrientedBox& box) {
  const Mat3 r = box.rotation();
  const Mat3 rt = r.transposed();
  const Vec3 local_o = rt * (origin - box.center);
  const Vec3 local_d = rt * dir;
  const Vec3 h = box.half;
  const auto hit = ray_aabb(local_o, local_d, -1.0 * h, h);
  if (!hit) return std::nullopt;

  const double ld[3] = {local_d.x, local_d.y, local_d.z};
  auto face_normal = [&](int axis, bool entering) {
    Vec3 n{0, 0, 0};
    const double sign = entering ? (ld[axis] > 0 ? -1.0 : 1.0) : (ld[axis] > 0 ? 1.0 : -1.0);
    if (axis == 0) n.x = sign;
    if (axis == 1) n.y = sign;
    if (axis == 2) n.z = sign;
    return r * n;
  };

  if (hit->t_enter > kRayEpsilon)
    return ObbRayHit{hit->t_enter, face_normal(hit->enter_axis, true)};
  if (hit->t_exit > kRayEpsilon)
    return ObbRayHit{hit->t_exit, face_normal(hit->exit_axis, false)};
  return std::nullopt;
}

// Triangle vs axis-aligned box via the 13-axis separating axis test
// (box face normals, triangle plane, edge cross products). Vertices are
// given relative to the box center; h holds the half extents.
inline bool triangle_aabb_overlap(Vec3 v0, Vec3 v1, Vec3 v2, const Vec3& h) {
  auto axis_separates = [&](double p0, double p1, double p2, double r) {
    const double lo = std::min({p0, p1, p2});
    const double hi = std::max({p0, p1, p2});
    return lo > r || hi < -r;
  };

  // Box face normals.
  if (axis_separates(v0.x, v1.x, v2.x, h.x)) return false;
  if (axis_separates(v0.y, v1.y, v2.y, h.y)) return false;
  if (axis_separates(v0.z, v1.z, v2.z, h.z)) return false;

  const Vec3 e0 = v1 - v0;
  const Vec3 e1 = v2 - v1;
  const Vec3 e2 = v0 - v2;

  // Triangle plane.
  const Vec3 n = cross(e0, e1);
  const double d = dot(n, v0);
  const double r = h.x * std::abs(n.x) + h.y * std::abs(n.y) + h.z * std::abs(n.z);
  if (d > r || d < -r) return false;

  // Nine edge cross-product axes: axis = unit(a) x edge.
  auto edge_axes = [&](const Vec3& e) {
    const double fx = std::abs(e.x), fy = std::abs(e.y), fz = std::abs(e.z);
    // a = (e x x-axis) style axes, expanded component-wise.
    const Vec3 ax{0.0, -e.z, e.y};
    const Vec3 ay{e.z, 0.0, -e.x};
    const Vec3 az{-e.y, e.x, 0.0};
    const double rx = h.y * fz + h.z * fy;
    const double ry = h.x * fz + h.z * fx;
    const double rz = h.x * fy + h.y * fx;
    return std::array<std::pair<Vec3, double>, 3>{
        std::make_pair(ax, rx), std::make_pair(ay, ry), std::make_pair(az, rz)};
  };
  for (const Vec3& e : {e0, e1, e2})
    for (const auto& [axis, radius] : edge_axes(e))
      if (axis_separates(dot(axis, v0), dot(axis, v1), dot(axis, v2), radius)) return false;

  return true;
}

// Triangle vs oriented box: the triangle is moved into the box frame first.
inline bool triangle_obb_overlap(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                                 const OrientedBox& box) {
  const Mat3 rt = box.rotation().transposed();
  return triangle_aabb_overlap(rt * (v0 - box.center), rt * (v1 - box.center),
                               rt * (v2 - box.center), box.half);
}

// Gottschalk's 15-axis test. Touching boxes count as overlapping; the
// epsilon bias on the cross-product axes keeps near-parallel boxes stable.
inline bool obb_obb_overlap(const OrientedBox& a, const OrientedBox& b) {
  const Mat3 ra = a.rotation();
  const Mat3 rb = b.rotation();

  // Rotation from a's frame to b's frame and translation in a's frame.
  double r[3][3], abs_r[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += ra.at(k, i) * rb.at(k, j);
      r[i][j] = s;
      abs_r[i][j] = std::abs(s) + 1e-12;
    }

  const Vec3 d_world = b.center - a.center;
  const Vec3 t_vec = ra.transposed() * d_world;
  const double t[3] = {t_vec.x, t_vec.y, t_vec.z};
  const double ha[3] = {a.half.x, a.half.y, a.half.z};
  const double hb[3] = {b.half.x, b.half.y, b.half.z};

  // a's axes.
  for (int i = 0; i < 3; ++i) {
    const double rb_proj = hb[0] * abs_r[i][0] + hb[1] * abs_r[i][1] + hb[2] * abs_r[i][2];
    if (std::abs(t[i]) > ha[i] + rb_proj) return false;
  }
  // b's axes.
  for (int j = 0; j < 3; ++j) {
    const double ra_proj = ha[0] * abs_r[0][j] + ha[1] * abs_r[1][j] + ha[2] * abs_r[2][j];
    const double tb = std::abs(t[0] * r[0][j] + t[1] * r[1][j] + t[2] * r[2][j]);
    if (tb > ra_proj + hb[j]) return false;
  }
  // Cross products a_i x b_j.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      const double ra_proj = ha[i1] * abs_r[i2][j] + ha[i2] * abs_r[i1][j];
      const double rb_proj = hb[j1] * abs_r[i][j2] + hb[j2] * abs_r[i][j1];
      const double tt = std::abs(t[i2] * r[i1][j] - t[i1] * r[i2][j]);
      if (tt > ra_proj + rb_proj) return false;
    }
  return true;
}

// Oriented box vs axis-aligned box.
inline bool obb_aabb_overlap(const OrientedBox& obb, const Vec3& aabb_center,
                             const Vec3& aabb_half) {
  OrientedBox aligned;
  aligned.center = aabb_center;
  aligned.half = aabb_half;
  return obb_obb_overlap(obb, aligned);
}

}  // namespace terra
