#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "terra/errors.hpp"

namespace terra {

enum class TileKind { flat, step, stairs, ramp, rough };
enum class Side { north, east, south, west };
enum class Rotation { deg0, deg90, deg180, deg270 };

Side opposite(Side s);
const char* to_string(TileKind k);
const char* to_string(Side s);
int degrees(Rotation r);

// Square grid of surface heights. Row r runs south to north, column c west to
// east; samples span the whole tile, borders included, so adjacent tiles
// share sample positions along their seam.
class HeightArray {
 public:
  HeightArray() = default;
  explicit HeightArray(int n, double fill = 0.0);

  int n() const { return n_; }
  double at(int r, int c) const { return values_[static_cast<std::size_t>(r) * n_ + c]; }
  double& at(int r, int c) { return values_[static_cast<std::size_t>(r) * n_ + c]; }
  const std::vector<double>& values() const { return values_; }

  // Clockwise quarter turn: the west border becomes the north border.
  HeightArray rotated90() const;

  bool operator==(const HeightArray& other) const = default;

 private:
  int n_ = 0;
  std::vector<double> values_;
};

struct TileSpec {
  int id = -1;
  TileKind kind = TileKind::flat;
  std::map<std::string, double> params;
  Rotation rotation = Rotation::deg0;
  double weight = 1.0;
  HeightArray heights;
};

// Quantized border heights in counter-clockwise perimeter order (viewed from
// above): south runs west->east, east south->north, north east->west, west
// north->south. Two signatures on opposite sides match when one sequence is
// the reverse of the other, which cancels the opposing traversal directions.
struct EdgeSignature {
  Side side = Side::north;
  std::vector<std::int64_t> quantized;

  bool compatible_with(const EdgeSignature& other) const;
  bool operator==(const EdgeSignature& other) const = default;
};

// Round half up: ties go toward +infinity.
std::int64_t quantize_height(double h, double q);

EdgeSignature edge_signature(const TileSpec& tile, Side side, double q);

struct TileLibraryConfig {
  double tile_size = 2.0;
  int grid_n = 8;
  double quantization = 0.05;
  double h_min = 0.0;
  double h_max = 1.0;
  std::uint64_t noise_seed = 1234;

  struct Flat {
    double weight = 3.0;
    std::vector<double> heights;
  } flat;

  struct Step {
    double weight = 1.0;
    std::vector<double> low_heights;
    std::vector<double> rises;
  } step;

  struct Stairs {
    double weight = 1.0;
    std::vector<double> low_heights;
    std::vector<double> rises;
    std::vector<int> step_counts;
  } stairs;

  struct Ramp {
    double weight = 1.0;
    std::vector<double> low_heights;
    std::vector<double> rises;
  } ramp;

  struct Rough {
    double weight = 1.0;
    std::vector<double> amplitudes;
    std::vector<int> frequencies;
    int variants = 0;
  } rough;

  // Library shipped by default; enumerates 1570 tiles.
  static TileLibraryConfig defaults();
  static TileLibraryConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Tile collection with precomputed adjacency. Adjacency is symmetric:
// B in neighbors(A, s) iff A in neighbors(B, opposite(s)).
class TileSet {
 public:
  // Validates ids (dense, equal to index), weights (> 0) and uniform array
  // sizes, then derives adjacency from edge signatures.
  static TileSet build(std::vector<TileSpec> tiles, double tile_size, double quantization);

  int size() const { return static_cast<int>(tiles_.size()); }
  const TileSpec& tile(int id) const { return tiles_[static_cast<std::size_t>(id)]; }
  const std::vector<TileSpec>& tiles() const { return tiles_; }
  double tile_size() const { return tile_size_; }
  double quantization() const { return quantization_; }

  bool compatible(int a, Side side, int b) const;
  std::vector<int> neighbors(int id, Side side) const;

  // Bitset row over tile ids, words() words of 64 bits each.
  const std::uint64_t* neighbor_mask(int id, Side side) const;
  int words() const { return words_; }

  // FNV-1a over tile contents; stable across runs for identical libraries.
  std::uint64_t content_hash() const;

  nlohmann::json to_json(bool include_adjacency = true) const;

 private:
  std::vector<TileSpec> tiles_;
  double tile_size_ = 2.0;
  double quantization_ = 0.05;
  int words_ = 0;
  std::vector<std::uint64_t> masks_;  // (4 * id + side) rows
};

TileSet build_adjacency(std::vector<TileSpec> tiles, double tile_size, double quantization);

// Enumerates every kind/parameter/rotation combination in the config, snaps
// border samples onto the quantization lattice and drops exact duplicates
// (a flat tile keeps one of its four identical rotations).
TileSet generate_tile_library(const TileLibraryConfig& config);

}  // namespace terra
