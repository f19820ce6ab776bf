#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "terra/errors.hpp"
#include "terra/tiles.hpp"

using namespace terra;

namespace {

TileSpec make_tile(int id, int n, std::vector<double> values) {
  TileSpec t;
  t.id = id;
  t.kind = TileKind::flat;
  t.heights = HeightArray(n, 0.0);
  REQUIRE(values.size() == static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) t.heights.at(r, c) = values[static_cast<std::size_t>(r) * n + c];
  return t;
}

void clear_kinds(TileLibraryConfig& cfg) {
  cfg.flat.heights.clear();
  cfg.step.low_heights.clear();
  cfg.stairs.low_heights.clear();
  cfg.ramp.low_heights.clear();
  cfg.rough.amplitudes.clear();
}

TileLibraryConfig single_kind_config(TileKind kind) {
  TileLibraryConfig cfg = TileLibraryConfig::defaults();
  TileLibraryConfig trimmed = cfg;
  clear_kinds(trimmed);
  switch (kind) {
    case TileKind::flat: trimmed.flat = cfg.flat; break;
    case TileKind::step: trimmed.step = cfg.step; break;
    case TileKind::stairs: trimmed.stairs = cfg.stairs; break;
    case TileKind::ramp: trimmed.ramp = cfg.ramp; break;
    case TileKind::rough: trimmed.rough = cfg.rough; break;
  }
  return trimmed;
}

}  // namespace

TEST_CASE("quantization rounds half toward positive infinity") {
  CHECK(quantize_height(0.124, 0.05) == 2);
  CHECK(quantize_height(0.126, 0.05) == 3);
  CHECK(quantize_height(0.3, 0.05) == 6);
  CHECK(quantize_height(0.125, 0.05) == 3);
  CHECK(quantize_height(0.0, 0.05) == 0);
  CHECK(quantize_height(-0.125, 0.05) == -2);
  CHECK(quantize_height(-0.13, 0.05) == -3);
}

TEST_CASE("flat tile has one constant signature on every side") {
  TileSpec t = make_tile(0, 8, std::vector<double>(64, 0.25));
  for (Side s : {Side::north, Side::east, Side::south, Side::west}) {
    EdgeSignature sig = edge_signature(t, s, 0.05);
    REQUIRE(sig.quantized.size() == 8);
    for (std::int64_t v : sig.quantized) CHECK(v == 5);
  }
}

TEST_CASE("west-to-east ramp exposes constant west and east signatures") {
  const int n = 4;
  std::vector<double> values(16);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) values[static_cast<std::size_t>(r) * n + c] = 0.4 * c / (n - 1);
  TileSpec t = make_tile(0, n, values);

  CHECK(edge_signature(t, Side::west, 0.1).quantized == std::vector<std::int64_t>{0, 0, 0, 0});
  CHECK(edge_signature(t, Side::east, 0.1).quantized == std::vector<std::int64_t>{4, 4, 4, 4});
}

TEST_CASE("signature traversal follows the counter-clockwise perimeter") {
  // 2x2 corner heights: sw=0.0 se=0.1 nw=0.2 ne=0.3, q=0.05.
  TileSpec t = make_tile(0, 2, {0.0, 0.1, 0.2, 0.3});
  CHECK(edge_signature(t, Side::south, 0.05).quantized == std::vector<std::int64_t>{0, 2});
  CHECK(edge_signature(t, Side::east, 0.05).quantized == std::vector<std::int64_t>{2, 6});
  CHECK(edge_signature(t, Side::north, 0.05).quantized == std::vector<std::int64_t>{6, 4});
  CHECK(edge_signature(t, Side::west, 0.05).quantized == std::vector<std::int64_t>{4, 0});
}

TEST_CASE("compatibility requires opposite sides and mirrored sequences") {
  // East column of a matches west column of b sample-for-sample in space.
  TileSpec a = make_tile(0, 2, {0.0, 0.1, 0.0, 0.2});
  TileSpec b = make_tile(1, 2, {0.1, 0.0, 0.2, 0.0});
  EdgeSignature ae = edge_signature(a, Side::east, 0.05);
  EdgeSignature bw = edge_signature(b, Side::west, 0.05);
  EdgeSignature an = edge_signature(a, Side::north, 0.05);
  CHECK(ae.compatible_with(bw));
  CHECK(bw.compatible_with(ae));
  CHECK_FALSE(ae.compatible_with(an));
  // Same side never pairs with itself.
  CHECK_FALSE(ae.compatible_with(edge_signature(b, Side::east, 0.05)));
}

TEST_CASE("distinct flat heights are incompatible, each is self-tileable") {
  TileLibraryConfig cfg = single_kind_config(TileKind::flat);
  cfg.flat.heights = {0.0, 0.3};
  TileSet tiles = generate_tile_library(cfg);
  REQUIRE(tiles.size() == 2);
  for (Side s : {Side::north, Side::east, Side::south, Side::west}) {
    CHECK(tiles.compatible(0, s, 0));
    CHECK(tiles.compatible(1, s, 1));
    CHECK_FALSE(tiles.compatible(0, s, 1));
    CHECK_FALSE(tiles.compatible(1, s, 0));
  }
}

TEST_CASE("rotation by 90 degrees maps the west signature onto north") {
  TileLibraryConfig cfg = TileLibraryConfig::defaults();
  TileSet tiles = generate_tile_library(cfg);
  int checked = 0;
  for (int id = 0; id < tiles.size() && checked < 200; id += 7, ++checked) {
    const TileSpec& t = tiles.tile(id);
    TileSpec rotated = t;
    rotated.heights = t.heights.rotated90();
    CHECK(edge_signature(rotated, Side::north, cfg.quantization).quantized ==
          edge_signature(t, Side::west, cfg.quantization).quantized);
    CHECK(edge_signature(rotated, Side::east, cfg.quantization).quantized ==
          edge_signature(t, Side::north, cfg.quantization).quantized);
    CHECK(edge_signature(rotated, Side::south, cfg.quantization).quantized ==
          edge_signature(t, Side::east, cfg.quantization).quantized);
    CHECK(edge_signature(rotated, Side::west, cfg.quantization).quantized ==
          edge_signature(t, Side::south, cfg.quantization).quantized);
  }
  CHECK(checked == 200);
}

TEST_CASE("four quarter turns restore the original array") {
  HeightArray h(5, 0.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) h.at(r, c) = 0.01 * (r * 5 + c);
  HeightArray once = h.rotated90();
  CHECK_FALSE(once == h);
  CHECK(once.rotated90().rotated90().rotated90() == h);
}

TEST_CASE("signatures survive sub-quantum perturbation") {
  TileSpec base = make_tile(0, 4, std::vector<double>(16, 0.2));
  TileSpec wobbly = base;
  double delta = 0.019;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      wobbly.heights.at(r, c) += delta;
      delta = -delta;
    }
  for (Side s : {Side::north, Side::east, Side::south, Side::west})
    CHECK(edge_signature(base, s, 0.05).quantized == edge_signature(wobbly, s, 0.05).quantized);
}

TEST_CASE("default library enumerates exactly 1570 tiles") {
  TileSet tiles = generate_tile_library(TileLibraryConfig::defaults());
  CHECK(tiles.size() == 1570);

  std::map<TileKind, int> by_kind;
  for (int id = 0; id < tiles.size(); ++id) by_kind[tiles.tile(id).kind]++;
  CHECK(by_kind[TileKind::flat] == 6);
  CHECK(by_kind[TileKind::step] == 180);
  CHECK(by_kind[TileKind::stairs] == 540);
  CHECK(by_kind[TileKind::ramp] == 396);
  CHECK(by_kind[TileKind::rough] == 448);

  // Ids are dense and sequential.
  for (int id = 0; id < tiles.size(); ++id) CHECK(tiles.tile(id).id == id);
}

TEST_CASE("duplicate height arrays are dropped") {
  TileLibraryConfig cfg = single_kind_config(TileKind::flat);
  cfg.flat.heights = {0.1, 0.1, 0.1};
  TileSet tiles = generate_tile_library(cfg);
  CHECK(tiles.size() == 1);
}

TEST_CASE("border samples land exactly on the quantization lattice") {
  TileSet tiles = generate_tile_library(TileLibraryConfig::defaults());
  const double q = tiles.quantization();
  const int n = tiles.tile(0).heights.n();
  for (int id = 0; id < tiles.size(); id += 13) {
    const HeightArray& h = tiles.tile(id).heights;
    for (int i = 0; i < n; ++i) {
      for (double v : {h.at(0, i), h.at(n - 1, i), h.at(i, 0), h.at(i, n - 1)}) {
        const double snapped = q * std::floor(v / q + 0.5);
        CHECK(v == snapped);
      }
    }
  }
}

TEST_CASE("adjacency is symmetric across every side") {
  TileLibraryConfig cfg = single_kind_config(TileKind::step);
  cfg.flat = TileLibraryConfig::defaults().flat;
  cfg.ramp = TileLibraryConfig::defaults().ramp;
  cfg.step.low_heights = {0.0, 0.1};
  cfg.step.rises = {0.1, 0.2};
  cfg.ramp.low_heights = {0.0, 0.1};
  cfg.ramp.rises = {0.1, 0.2};
  TileSet tiles = generate_tile_library(cfg);
  REQUIRE(tiles.size() > 10);
  for (int a = 0; a < tiles.size(); ++a)
    for (Side s : {Side::north, Side::east, Side::south, Side::west})
      for (int b : tiles.neighbors(a, s)) {
        CHECK(tiles.compatible(a, s, b));
        CHECK(tiles.compatible(b, opposite(s), a));
      }
}

TEST_CASE("adjacency agrees with pairwise signature comparison") {
  TileLibraryConfig cfg = single_kind_config(TileKind::step);
  cfg.step.low_heights = {0.0, 0.2};
  cfg.step.rises = {0.1};
  TileSet tiles = generate_tile_library(cfg);
  for (int a = 0; a < tiles.size(); ++a)
    for (int b = 0; b < tiles.size(); ++b)
      for (Side s : {Side::north, Side::east, Side::south, Side::west}) {
        const bool expect =
            edge_signature(tiles.tile(a), s, cfg.quantization)
                .compatible_with(edge_signature(tiles.tile(b), opposite(s), cfg.quantization));
        CHECK(tiles.compatible(a, s, b) == expect);
      }
}

TEST_CASE("rough tile signatures match recomputed border quantization") {
  TileLibraryConfig cfg = single_kind_config(TileKind::rough);
  TileSet tiles = generate_tile_library(cfg);
  REQUIRE(tiles.size() > 0);
  const int n = tiles.tile(0).heights.n();
  for (int id = 0; id < tiles.size(); id += 5) {
    const TileSpec& t = tiles.tile(id);
    std::vector<std::int64_t> south;
    for (int c = 0; c < n; ++c) south.push_back(quantize_height(t.heights.at(0, c), cfg.quantization));
    CHECK(edge_signature(t, Side::south, cfg.quantization).quantized == south);
    // Tapered borders sit at the tile base level.
    for (std::int64_t v : south) CHECK(v == south.front());
  }
}

TEST_CASE("config validation rejects malformed input") {
  TileLibraryConfig bad = TileLibraryConfig::defaults();
  bad.grid_n = 1;
  CHECK_THROWS_AS(generate_tile_library(bad), ConfigError);

  bad = TileLibraryConfig::defaults();
  bad.quantization = 0.0;
  CHECK_THROWS_AS(generate_tile_library(bad), ConfigError);

  bad = TileLibraryConfig::defaults();
  clear_kinds(bad);
  CHECK_THROWS_AS(generate_tile_library(bad), ConfigError);

  bad = TileLibraryConfig::defaults();
  bad.h_max = bad.h_min;
  CHECK_THROWS_AS(generate_tile_library(bad), ConfigError);

  bad = single_kind_config(TileKind::flat);
  bad.flat.heights = {2.5};
  CHECK_THROWS_AS(generate_tile_library(bad), ConfigError);

  bad = single_kind_config(TileKind::stairs);
  bad.stairs.step_counts = {1};
  CHECK_THROWS_AS(generate_tile_library(bad), ConfigError);
}

TEST_CASE("tile set construction validates specs") {
  TileSpec a = make_tile(0, 2, {0, 0, 0, 0});
  TileSpec dup = make_tile(0, 2, {0.1, 0.1, 0.1, 0.1});
  CHECK_THROWS_AS(build_adjacency({a, dup}, 2.0, 0.05), ConfigError);

  TileSpec negative_weight = make_tile(1, 2, {0, 0, 0, 0});
  negative_weight.weight = -1.0;
  CHECK_THROWS_AS(build_adjacency({a, negative_weight}, 2.0, 0.05), ConfigError);

  TileSpec mismatched = make_tile(1, 3, std::vector<double>(9, 0.0));
  CHECK_THROWS_AS(build_adjacency({a, mismatched}, 2.0, 0.05), ConfigError);

  CHECK_THROWS_AS(build_adjacency({}, 2.0, 0.05), ConfigError);
}

TEST_CASE("library config json round-trips to an identical tile set") {
  TileLibraryConfig cfg = TileLibraryConfig::defaults();
  cfg.rough.variants = 2;
  TileLibraryConfig back = TileLibraryConfig::from_json(cfg.to_json());
  TileSet a = generate_tile_library(cfg);
  TileSet b = generate_tile_library(back);
  REQUIRE(a.size() == b.size());
  CHECK(a.content_hash() == b.content_hash());
}

TEST_CASE("content hash tracks tile data") {
  TileLibraryConfig cfg = single_kind_config(TileKind::flat);
  TileSet a = generate_tile_library(cfg);
  cfg.flat.weight = 7.0;
  TileSet b = generate_tile_library(cfg);
  CHECK(a.content_hash() != b.content_hash());
}
