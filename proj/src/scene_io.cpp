#include "terra/scene.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "terra/errors.hpp"

namespace terra {

using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void require_finite(const Vec3& v, const char* what) {
  if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
    throw IoError(std::string(what) + " has a non-finite coordinate");
}

// Fixed-point decimal with negative zero normalized away, so formatting is
// a pure function of the value.
void append_coord(std::string& out, double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  out += buf;
}

void append_vertex(std::string& out, const Vec3& v) {
  out += "v ";
  append_coord(out, v.x);
  out += ' ';
  append_coord(out, v.y);
  out += ' ';
  append_coord(out, v.z);
  out += '\n';
}

}  // namespace

Aabb Scene::bounds() const {
  Aabb box = terrain.bounds();
  for (const OrientedBox& overhang : overhangs) box.expand(overhang.bounds());
  return box;
}

json Scene::to_json() const {
  json vertices = json::array();
  for (const Vec3& v : terrain.vertices) vertices.push_back(vec3_json(v));
  json triangles = json::array();
  for (const auto& t : terrain.triangles) triangles.push_back(json::array({t[0], t[1], t[2]}));

  json boxes = json::array();
  for (const OrientedBox& b : overhangs)
    boxes.push_back(json{{"center", vec3_json(b.center)},
                         {"half_extents", vec3_json(b.half)},
                         {"rpy", json::array({b.roll, b.pitch, b.yaw})}});

  return json{
      {"metadata",
       {{"seed", meta.seed}, {"tileset_hash", meta.tileset_hash}, {"rows", meta.rows},
        {"cols", meta.cols}}},
      {"spawn", {{"x", spawn.x}, {"y", spawn.y}, {"yaw", spawn.yaw}}},
      {"goal", {{"x", goal.x}, {"y", goal.y}}},
      {"terrain", {{"vertices", vertices}, {"triangles", triangles}}},
      {"overhangs", boxes}};
}

Scene Scene::from_json(const json& j) {
  Scene scene;
  const json& meta = j.at("metadata");
  scene.meta.seed = meta.at("seed").get<std::uint64_t>();
  scene.meta.tileset_hash = meta.at("tileset_hash").get<std::uint64_t>();
  scene.meta.rows = meta.at("rows").get<int>();
  scene.meta.cols = meta.at("cols").get<int>();

  scene.spawn.x = j.at("spawn").at("x").get<double>();
  scene.spawn.y = j.at("spawn").at("y").get<double>();
  scene.spawn.yaw = j.at("spawn").at("yaw").get<double>();
  scene.goal.x = j.at("goal").at("x").get<double>();
  scene.goal.y = j.at("goal").at("y").get<double>();

  const json& terrain = j.at("terrain");
  for (const json& v : terrain.at("vertices")) {
    const Vec3 p = vec3_from(v);
    require_finite(p, "terrain vertex");
    scene.terrain.vertices.push_back(p);
  }
  for (const json& t : terrain.at("triangles")) {
    if (!t.is_array() || t.size() != 3) throw IoError("triangle is not an index triple");
    std::array<std::uint32_t, 3> tri{t[0].get<std::uint32_t>(), t[1].get<std::uint32_t>(),
                                     t[2].get<std::uint32_t>()};
    for (std::uint32_t idx : tri)
      if (idx >= scene.terrain.vertices.size()) throw IoError("triangle index out of bounds");
    scene.terrain.triangles.push_back(tri);
  }

  for (const json& b : j.at("overhangs")) {
    OrientedBox box;
    box.center = vec3_from(b.at("center"));
    box.half = vec3_from(b.at("half_extents"));
    const json& rpy = b.at("rpy");
    if (!rpy.is_array() || rpy.size() != 3) throw IoError("rpy is not a 3-element array");
    box.roll = rpy[0].get<double>();
    box.pitch = rpy[1].get<double>();
    box.yaw = rpy[2].get<double>();
    require_finite(box.center, "overhang center");
    if (box.half.x <= 0 || box.half.y <= 0 || box.half.z <= 0)
      throw IoError("overhang half extents must be positive");
    scene.overhangs.push_back(box);
  }
  return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << scene.to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("invalid scene json in " + path + ": " + e.what());
  }
  try {
    return Scene::from_json(j);
  } catch (const json::exception& e) {
    throw IoError("invalid scene json in " + path + ": " + e.what());
  }
}

void export_obj(const Scene& scene, const std::string& path) {
  if (scene.terrain.triangles.empty() && scene.overhangs.empty())
    throw ConfigError("scene has no geometry to export");

  std::string out;
  out.reserve(scene.terrain.vertices.size() * 48 + scene.overhangs.size() * 640 + 64);

  char buf[96];
  if (!scene.terrain.triangles.empty()) {
    out += "g terrain\n";
    for (const Vec3& v : scene.terrain.vertices) {
      require_finite(v, "terrain vertex");
      append_vertex(out, v);
    }
    for (const auto& t : scene.terrain.triangles) {
      std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
      out += buf;
    }
  }

  // Box faces, CCW seen from outside, over corners() order
  // (-x-y-z, -x-y+z, -x+y-z, -x+y+z, +x-y-z, +x-y+z, +x+y-z, +x+y+z).
  static const int kBoxFaces[12][3] = {
      {0, 1, 3}, {0, 3, 2},  // -x
      {4, 6, 7}, {4, 7, 5},  // +x
      {0, 4, 5}, {0, 5, 1},  // -y
      {2, 3, 7}, {2, 7, 6},  // +y
      {0, 2, 6}, {0, 6, 4},  // -z
      {1, 5, 7}, {1, 7, 3},  // +z
  };

  std::uint32_t base = scene.terrain.triangles.empty()
                           ? 0u
                           : static_cast<std::uint32_t>(scene.terrain.vertices.size());
  int group = 0;
  for (const OrientedBox& box : scene.overhangs) {
    std::snprintf(buf, sizeof buf, "g overhang_%d\n", group++);
    out += buf;
    const auto corners = box.corners();
    for (const Vec3& v : corners) append_vertex(out, v);
    for (const auto& f : kBoxFaces) {
      std::snprintf(buf, sizeof buf, "f %u %u %u\n", base + f[0] + 1, base + f[1] + 1,
                    base + f[2] + 1);
      out += buf;
    }
    base += 8;
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open for writing: " + path);
  file << out;
  if (!file) throw IoError("write failed: " + path);
}

}  // namespace terra
