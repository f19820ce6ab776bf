#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "terra/types.hpp"

namespace terra {

struct SceneMeta {
  std::uint64_t seed = 0;
  std::uint64_t tileset_hash = 0;
  int rows = 0;
  int cols = 0;
};

// A generated environment: terrain surface, overhanging boxes, and the
// spawn/goal pair used by evaluation.
struct Scene {
  TriangleMesh terrain;
  std::vector<OrientedBox> overhangs;
  Pose2D spawn;
  Point2 goal;
  SceneMeta meta;

  Aabb bounds() const;

  nlohmann::json to_json() const;
  static Scene from_json(const nlohmann::json& j);
};

// Scene JSON with sorted keys, so equal scenes serialize to equal bytes.
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

// Wavefront subset: v/f/g records, 9-decimal fixed point, one "terrain"
// group plus one group per overhang box. Byte-stable for equal scenes.
void export_obj(const Scene& scene, const std::string& path);

}  // namespace terra
