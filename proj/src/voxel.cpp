#include "terra/voxel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "terra/errors.hpp"
#include "terra/intersect.hpp"

namespace terra {

namespace {

constexpr std::uint8_t kMagic[4] = {'V', 'O', 'X', 'G'};
constexpr std::uint8_t kVersion = 1;

std::uint32_t resolution_bits() {
  const float res = static_cast<float>(VoxelGrid::kResolution);
  std::uint32_t bits;
  std::memcpy(&bits, &res, sizeof bits);
  return bits;
}

void put_u32le(std::vector<std::uint8_t>& out, std::size_t pos, std::uint32_t v) {
  out[pos] = static_cast<std::uint8_t>(v & 0xff);
  out[pos + 1] = static_cast<std::uint8_t>((v >> 8) & 0xff);
  out[pos + 2] = static_cast<std::uint8_t>((v >> 16) & 0xff);
  out[pos + 3] = static_cast<std::uint8_t>((v >> 24) & 0xff);
}

std::uint32_t get_u32le(const std::vector<std::uint8_t>& in, std::size_t pos) {
  return static_cast<std::uint32_t>(in[pos]) | (static_cast<std::uint32_t>(in[pos + 1]) << 8) |
         (static_cast<std::uint32_t>(in[pos + 2]) << 16) |
         (static_cast<std::uint32_t>(in[pos + 3]) << 24);
}

struct CellRange {
  int lo[3];
  int hi[3];
  bool empty;
};

// Candidate cells for a local-frame AABB, padded one cell to keep boundary
// touches inside the range; the SAT test makes the final call.
CellRange cell_range(const Aabb& box) {
  CellRange range{};
  const double origin[3] = {-0.5 * VoxelGrid::kSpan, -0.5 * VoxelGrid::kSpan, 0.0};
  const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
  const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
  range.empty = false;
  for (int a = 0; a < 3; ++a) {
    const int first =
        static_cast<int>(std::floor((lo[a] - origin[a]) / VoxelGrid::kResolution)) - 1;
    const int last =
        static_cast<int>(std::floor((hi[a] - origin[a]) / VoxelGrid::kResolution)) + 1;
    range.lo[a] = std::max(0, first);
    range.hi[a] = std::min(VoxelGrid::kDim - 1, last);
    if (range.lo[a] > range.hi[a]) range.empty = true;
  }
  return range;
}

Vec3 cell_center(int ix, int iy, int iz) {
  return {VoxelGrid::kResolution * (ix + 0.5) - 0.5 * VoxelGrid::kSpan,
          VoxelGrid::kResolution * (iy + 0.5) - 0.5 * VoxelGrid::kSpan,
          VoxelGrid::kResolution * (iz + 0.5)};
}

}  // namespace

int VoxelGrid::checked_index(int ix, int iy, int iz) {
  if (ix < 0 || ix >= kDim || iy < 0 || iy >= kDim || iz < 0 || iz >= kDim)
    throw std::out_of_range("voxel index outside the 32x32x32 grid");
  return index(ix, iy, iz);
}

int VoxelGrid::occupied_count() const {
  int count = 0;
  for (std::uint8_t byte : bits_) count += std::popcount(static_cast<unsigned>(byte));
  return count;
}

std::vector<std::uint8_t> VoxelGrid::serialize() const {
  std::vector<std::uint8_t> out(kFileBytes);
  out[0] = kMagic[0];
  out[1] = kMagic[1];
  out[2] = kMagic[2];
  out[3] = kMagic[3];
  out[4] = static_cast<std::uint8_t>(kDim);
  out[5] = static_cast<std::uint8_t>(kDim);
  out[6] = static_cast<std::uint8_t>(kDim);
  out[7] = kVersion;
  put_u32le(out, 8, resolution_bits());
  put_u32le(out, 12, static_cast<std::uint32_t>(occupied_count()));
  std::copy(bits_.begin(), bits_.end(), out.begin() + 16);
  return out;
}

VoxelGrid VoxelGrid::deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() != kFileBytes) throw IoError("voxel payload has the wrong size");
  if (bytes[0] != kMagic[0] || bytes[1] != kMagic[1] || bytes[2] != kMagic[2] ||
      bytes[3] != kMagic[3])
    throw IoError("voxel payload has a bad magic header");
  if (bytes[4] != kDim || bytes[5] != kDim || bytes[6] != kDim)
    throw IoError("voxel payload reports unsupported dimensions");
  if (bytes[7] != kVersion) throw IoError("voxel payload reports an unsupported version");
  if (get_u32le(bytes, 8) != resolution_bits())
    throw IoError("voxel payload reports an unsupported resolution");

  VoxelGrid grid;
  std::copy(bytes.begin() + 16, bytes.end(), grid.bits_.begin());
  if (get_u32le(bytes, 12) != static_cast<std::uint32_t>(grid.occupied_count()))
    throw IoError("voxel payload count does not match its cells");
  return grid;
}

VoxelGrid voxelize(const Scene& scene, const BodyPose& body, double bottom_offset) {
  if (!std::isfinite(body.position.x) || !std::isfinite(body.position.y) ||
      !std::isfinite(body.position.z) || !std::isfinite(body.yaw) ||
      !std::isfinite(bottom_offset))
    throw ConfigError("voxelize needs a finite body pose");

  VoxelGrid grid;
  const Mat3 unrot = Mat3::rotation_z(-body.yaw);
  const Mat3 rot = Mat3::rotation_z(body.yaw);
  const Vec3 lift{0.0, 0.0, bottom_offset};
  const Vec3 vox_half{0.5 * VoxelGrid::kResolution, 0.5 * VoxelGrid::kResolution,
                      0.5 * VoxelGrid::kResolution};
  auto to_local = [&](const Vec3& w) { return unrot * (w - body.position) + lift; };

  for (const auto& tri : scene.terrain.triangles) {
    const Vec3 a = to_local(scene.terrain.vertices[tri[0]]);
    const Vec3 b = to_local(scene.terrain.vertices[tri[1]]);
    const Vec3 c = to_local(scene.terrain.vertices[tri[2]]);
    Aabb box;
    box.expand(a);
    box.expand(b);
    box.expand(c);
    const CellRange range = cell_range(box);
    if (range.empty) continue;
    for (int iz = range.lo[2]; iz <= range.hi[2]; ++iz)
      for (int iy = range.lo[1]; iy <= range.hi[1]; ++iy)
        for (int ix = range.lo[0]; ix <= range.hi[0]; ++ix) {
          if (grid.at(ix, iy, iz)) continue;
          const Vec3 center = cell_center(ix, iy, iz);
          if (triangle_aabb_overlap(a - center, b - center, c - center, vox_half))
            grid.set(ix, iy, iz, true);
        }
  }

  for (const OrientedBox& sbox : scene.overhangs) {
    Aabb local_box;
    for (const Vec3& corner : sbox.corners()) local_box.expand(to_local(corner));
    const CellRange range = cell_range(local_box);
    if (range.empty) continue;
    OrientedBox vox;
    vox.half = vox_half;
    vox.yaw = body.yaw;
    for (int iz = range.lo[2]; iz <= range.hi[2]; ++iz)
      for (int iy = range.lo[1]; iy <= range.hi[1]; ++iy)
        for (int ix = range.lo[0]; ix <= range.hi[0]; ++ix) {
          if (grid.at(ix, iy, iz)) continue;
          vox.center = rot * (cell_center(ix, iy, iz) - lift) + body.position;
          if (obb_obb_overlap(sbox, vox)) grid.set(ix, iy, iz, true);
        }
  }

  return grid;
}

nlohmann::json voxel_meta_json(const VoxelGrid& grid, const BodyPose& body, double bottom_offset) {
  nlohmann::json j;
  j["dims"] = {VoxelGrid::kDim, VoxelGrid::kDim, VoxelGrid::kDim};
  j["resolution"] = VoxelGrid::kResolution;
  j["occupied"] = grid.occupied_count();
  j["bottom_offset"] = bottom_offset;
  j["origin"] = {{"x", body.position.x},
                 {"y", body.position.y},
                 {"z", body.position.z},
                 {"yaw", body.yaw}};
  return j;
}

void save_voxels(const VoxelGrid& grid, const std::string& path) {
  const auto bytes = grid.serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

VoxelGrid load_voxels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return VoxelGrid::deserialize(bytes);
}

}  // namespace terra
