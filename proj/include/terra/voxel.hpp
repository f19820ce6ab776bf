#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "terra/scene.hpp"
#include "terra/types.hpp"

namespace terra {

// Fixed-size occupancy grid around a body: 32 cells per axis at 8 cm, so
// 2.56 m of coverage. The grid is yaw-aligned with the body, centered on it
// in x/y, and starts bottom_offset below the body origin in z.
class VoxelGrid {
 public:
  static constexpr int kDim = 32;
  static constexpr double kResolution = 0.08;
  static constexpr double kSpan = kDim * kResolution;
  static constexpr int kCellCount = kDim * kDim * kDim;
  static constexpr std::size_t kPayloadBytes = kCellCount / 8;
  static constexpr std::size_t kFileBytes = 16 + kPayloadBytes;

  static int index(int ix, int iy, int iz) { return ix + kDim * (iy + kDim * iz); }

  bool at(int ix, int iy, int iz) const {
    const int i = checked_index(ix, iy, iz);
    return (bits_[static_cast<std::size_t>(i) >> 3] >> (i & 7)) & 1;
  }

  void set(int ix, int iy, int iz, bool value) {
    const int i = checked_index(ix, iy, iz);
    const std::uint8_t mask = static_cast<std::uint8_t>(1u << (i & 7));
    if (value)
      bits_[static_cast<std::size_t>(i) >> 3] |= mask;
    else
      bits_[static_cast<std::size_t>(i) >> 3] &= static_cast<std::uint8_t>(~mask);
  }

  int occupied_count() const;

  bool operator==(const VoxelGrid& other) const { return bits_ == other.bits_; }

  // 16-byte header (magic "VOXG", per-axis dims, version, float32 LE
  // resolution, uint32 LE occupied count) followed by the bit-packed cells,
  // cell i at byte i/8 bit i%8. Always kFileBytes long.
  std::vector<std::uint8_t> serialize() const;
  static VoxelGrid deserialize(const std::vector<std::uint8_t>& bytes);

 private:
  static int checked_index(int ix, int iy, int iz);

  std::array<std::uint8_t, kPayloadBytes> bits_{};
};

// Marks every cell whose axis-aligned block in the grid frame touches scene
// geometry (triangles or overhang boxes). Touching counts as occupied.
VoxelGrid voxelize(const Scene& scene, const BodyPose& body, double bottom_offset = 1.0);

// Grid placement metadata kept beside the binary payload.
nlohmann::json voxel_meta_json(const VoxelGrid& grid, const BodyPose& body, double bottom_offset);

void save_voxels(const VoxelGrid& grid, const std::string& path);
VoxelGrid load_voxels(const std::string& path);

}  // namespace terra
