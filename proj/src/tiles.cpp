#include "terra/tiles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include <json.hpp>

#include "terra/noise.hpp"
#include "terra/rng.hpp"

namespace terra {

using nlohmann::json;

Side opposite(Side s) {
  switch (s) {
    case Side::north: return Side::south;
    case Side::east: return Side::west;
    case Side::south: return Side::north;
    case Side::west: return Side::east;
  }
  return Side::north;
}

const char* to_string(TileKind k) {
  switch (k) {
    case TileKind::flat: return "flat";
    case TileKind::step: return "step";
    case TileKind::stairs: return "stairs";
    case TileKind::ramp: return "ramp";
    case TileKind::rough: return "rough";
  }
  return "?";
}

const char* to_string(Side s) {
  switch (s) {
    case Side::north: return "north";
    case Side::east: return "east";
    case Side::south: return "south";
    case Side::west: return "west";
  }
  return "?";
}

int degrees(Rotation r) { return 90 * static_cast<int>(r); }

HeightArray::HeightArray(int n, double fill)
    : n_(n), values_(static_cast<std::size_t>(n) * n, fill) {}

HeightArray HeightArray::rotated90() const {
  HeightArray out(n_);
  for (int r = 0; r < n_; ++r)
    for (int c = 0; c < n_; ++c) out.at(r, c) = at(c, n_ - 1 - r);
  return out;
}

std::int64_t quantize_height(double h, double q) {
  return static_cast<std::int64_t>(std::floor(h / q + 0.5));
}

bool EdgeSignature::compatible_with(const EdgeSignature& other) const {
  if (side != opposite(other.side)) return false;
  if (quantized.size() != other.quantized.size()) return false;
  return std::equal(quantized.begin(), quantized.end(), other.quantized.rbegin());
}

EdgeSignature edge_signature(const TileSpec& tile, Side side, double q) {
  if (q <= 0.0) throw ConfigError("quantization step must be positive");
  const HeightArray& a = tile.heights;
  const int n = a.n();
  EdgeSignature sig;
  sig.side = side;
  sig.quantized.reserve(static_cast<std::size_t>(n));
  switch (side) {
    case Side::south:
      for (int c = 0; c < n; ++c) sig.quantized.push_back(quantize_height(a.at(0, c), q));
      break;
    case Side::east:
      for (int r = 0; r < n; ++r) sig.quantized.push_back(quantize_height(a.at(r, n - 1), q));
      break;
    case Side::north:
      for (int c = n - 1; c >= 0; --c) sig.quantized.push_back(quantize_height(a.at(n - 1, c), q));
      break;
    case Side::west:
      for (int r = n - 1; r >= 0; --r) sig.quantized.push_back(quantize_height(a.at(r, 0), q));
      break;
  }
  return sig;
}

namespace {

// Border sequence in ascending-coordinate order (west->east for north/south,
// south->north for east/west). Opposite sides match exactly in this order.
std::vector<std::int64_t> spatial_signature(const TileSpec& tile, Side side, double q) {
  EdgeSignature sig = edge_signature(tile, side, q);
  if (side == Side::north || side == Side::west)
    std::reverse(sig.quantized.begin(), sig.quantized.end());
  return sig.quantized;
}

std::vector<double> linspace_samples(int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
  return out;
}

HeightArray make_flat(int n, double h) { return HeightArray(n, h); }

HeightArray make_step(int n, double low, double rise) {
  HeightArray a(n);
  const auto xs = linspace_samples(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      a.at(r, c) = xs[static_cast<std::size_t>(c)] < 0.5 ? low : low + rise;
  return a;
}

HeightArray make_stairs(int n, double low, double rise, int steps) {
  HeightArray a(n);
  const auto xs = linspace_samples(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      int tread = static_cast<int>(std::floor(xs[static_cast<std::size_t>(c)] * steps));
      tread = std::min(tread, steps - 1);
      a.at(r, c) = low + rise * tread / (steps - 1);
    }
  return a;
}

HeightArray make_ramp(int n, double low, double rise) {
  HeightArray a(n);
  const auto xs = linspace_samples(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a.at(r, c) = low + rise * xs[static_cast<std::size_t>(c)];
  return a;
}

double border_taper(double u) {
  const double s = std::clamp(std::min(u, 1.0 - u) / 0.25, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

// Value noise faded to zero at the borders, so every rough tile keeps a flat
// rim at the base height and stays connectable.
HeightArray make_rough(int n, double amplitude, int frequency, std::uint64_t seed) {
  HeightArray a(n);
  const auto xs = linspace_samples(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double xf = xs[static_cast<std::size_t>(c)];
      const double yf = xs[static_cast<std::size_t>(r)];
      const double noise = value_noise(frequency * xf, frequency * yf, seed);
      a.at(r, c) = amplitude * noise * border_taper(xf) * border_taper(yf);
    }
  return a;
}

void snap_borders(HeightArray& a, double q) {
  const int n = a.n();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      if (r != 0 && r != n - 1 && c != 0 && c != n - 1) continue;
      a.at(r, c) = q * static_cast<double>(quantize_height(a.at(r, c), q));
    }
}

}  // namespace

TileLibraryConfig TileLibraryConfig::defaults() {
  TileLibraryConfig c;
  c.flat.heights = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  c.step.low_heights = {0.0, 0.1, 0.2, 0.3, 0.4};
  c.step.rises = {0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  c.stairs.low_heights = {0.0, 0.2, 0.4};
  c.stairs.rises = c.step.rises;
  // An 8-tread staircase on an 8-sample grid samples exactly like a ramp, so
  // tread counts stop at 7 to keep every entry distinct.
  c.stairs.step_counts = {3, 4, 5, 6, 7};
  c.ramp.low_heights = {0.00, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  c.ramp.rises = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
  c.rough.amplitudes = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35};
  c.rough.frequencies = {1, 2, 3, 4};
  c.rough.variants = 4;
  return c;
}

namespace {

std::vector<double> doubles_from(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<std::vector<double>>();
}

std::vector<int> ints_from(const json& j, const char* key, std::vector<int> fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<std::vector<int>>();
}

}  // namespace

TileLibraryConfig TileLibraryConfig::from_json(const json& j) {
  TileLibraryConfig c = defaults();
  c.tile_size = j.value("tile_size", c.tile_size);
  c.grid_n = j.value("grid_n", c.grid_n);
  c.quantization = j.value("quantization", c.quantization);
  c.h_min = j.value("h_min", c.h_min);
  c.h_max = j.value("h_max", c.h_max);
  c.noise_seed = j.value("noise_seed", c.noise_seed);
  if (j.contains("kinds")) {
    const json& kinds = j.at("kinds");
    // Listing kinds replaces the default set; only named kinds are kept.
    c.flat.heights.clear();
    c.step.low_heights.clear();
    c.stairs.low_heights.clear();
    c.ramp.low_heights.clear();
    c.rough.amplitudes.clear();
    if (kinds.contains("flat")) {
      const json& k = kinds.at("flat");
      c.flat.weight = k.value("weight", c.flat.weight);
      c.flat.heights = doubles_from(k, "heights", defaults().flat.heights);
    }
    if (kinds.contains("step")) {
      const json& k = kinds.at("step");
      c.step.weight = k.value("weight", c.step.weight);
      c.step.low_heights = doubles_from(k, "low_heights", defaults().step.low_heights);
      c.step.rises = doubles_from(k, "rises", defaults().step.rises);
    }
    if (kinds.contains("stairs")) {
      const json& k = kinds.at("stairs");
      c.stairs.weight = k.value("weight", c.stairs.weight);
      c.stairs.low_heights = doubles_from(k, "low_heights", defaults().stairs.low_heights);
      c.stairs.rises = doubles_from(k, "rises", defaults().stairs.rises);
      c.stairs.step_counts = ints_from(k, "step_counts", defaults().stairs.step_counts);
    }
    if (kinds.contains("ramp")) {
      const json& k = kinds.at("ramp");
      c.ramp.weight = k.value("weight", c.ramp.weight);
      c.ramp.low_heights = doubles_from(k, "low_heights", defaults().ramp.low_heights);
      c.ramp.rises = doubles_from(k, "rises", defaults().ramp.rises);
    }
    if (kinds.contains("rough")) {
      const json& k = kinds.at("rough");
      c.rough.weight = k.value("weight", c.rough.weight);
      c.rough.amplitudes = doubles_from(k, "amplitudes", defaults().rough.amplitudes);
      c.rough.frequencies = ints_from(k, "frequencies", defaults().rough.frequencies);
      c.rough.variants = k.value("variants", defaults().rough.variants);
    }
  }
  return c;
}

nlohmann::json TileLibraryConfig::to_json() const {
  json kinds;
  if (!flat.heights.empty())
    kinds["flat"] = {{"weight", flat.weight}, {"heights", flat.heights}};
  if (!step.low_heights.empty())
    kinds["step"] = {{"weight", step.weight},
                     {"low_heights", step.low_heights},
                     {"rises", step.rises}};
  if (!stairs.low_heights.empty())
    kinds["stairs"] = {{"weight", stairs.weight},
                       {"low_heights", stairs.low_heights},
                       {"rises", stairs.rises},
                       {"step_counts", stairs.step_counts}};
  if (!ramp.low_heights.empty())
    kinds["ramp"] = {{"weight", ramp.weight},
                     {"low_heights", ramp.low_heights},
                     {"rises", ramp.rises}};
  if (!rough.amplitudes.empty())
    kinds["rough"] = {{"weight", rough.weight},
                      {"amplitudes", rough.amplitudes},
                      {"frequencies", rough.frequencies},
                      {"variants", rough.variants}};
  return json{{"tile_size", tile_size}, {"grid_n", grid_n},
              {"quantization", quantization}, {"h_min", h_min},
              {"h_max", h_max},           {"noise_seed", noise_seed},
              {"kinds", kinds}};
}

TileSet TileSet::build(std::vector<TileSpec> tiles, double tile_size, double quantization) {
  if (tiles.empty()) throw ConfigError("tile set is empty");
  if (tile_size <= 0.0) throw ConfigError("tile size must be positive");
  if (quantization <= 0.0) throw ConfigError("quantization step must be positive");

  const int n = tiles.front().heights.n();
  if (n < 2) throw ConfigError("height arrays need at least 2 samples per side");
  std::set<int> seen_ids;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    TileSpec& t = tiles[i];
    if (t.id < 0) t.id = static_cast<int>(i);
    if (!seen_ids.insert(t.id).second)
      throw ConfigError("duplicate tile id " + std::to_string(t.id));
    if (t.id != static_cast<int>(i))
      throw ConfigError("tile ids must be dense and in order");
    if (t.heights.n() != n) throw ConfigError("height arrays must share one size");
    if (!(t.weight > 0.0)) throw ConfigError("tile weights must be positive");
    for (double h : t.heights.values())
      if (!std::isfinite(h)) throw ConfigError("height arrays must be finite");
  }

  TileSet set;
  set.tiles_ = std::move(tiles);
  set.tile_size_ = tile_size;
  set.quantization_ = quantization;
  const int count = set.size();
  set.words_ = (count + 63) / 64;
  set.masks_.assign(static_cast<std::size_t>(count) * 4 * set.words_, 0);

  constexpr Side kSides[4] = {Side::north, Side::east, Side::south, Side::west};
  std::map<std::vector<std::int64_t>, std::vector<int>> by_signature[4];
  for (const TileSpec& t : set.tiles_)
    for (Side s : kSides)
      by_signature[static_cast<int>(s)][spatial_signature(t, s, quantization)].push_back(t.id);

  for (const TileSpec& t : set.tiles_) {
    for (Side s : kSides) {
      const auto key = spatial_signature(t, s, quantization);
      const auto& match = by_signature[static_cast<int>(opposite(s))];
      auto it = match.find(key);
      if (it == match.end()) continue;
      std::uint64_t* row =
          &set.masks_[(static_cast<std::size_t>(t.id) * 4 + static_cast<int>(s)) * set.words_];
      for (int other : it->second) row[other >> 6] |= 1ULL << (other & 63);
    }
  }
  return set;
}

TileSet build_adjacency(std::vector<TileSpec> tiles, double tile_size, double quantization) {
  return TileSet::build(std::move(tiles), tile_size, quantization);
}

bool TileSet::compatible(int a, Side side, int b) const {
  const std::uint64_t* row = neighbor_mask(a, side);
  return (row[b >> 6] >> (b & 63)) & 1ULL;
}

std::vector<int> TileSet::neighbors(int id, Side side) const {
  std::vector<int> out;
  const std::uint64_t* row = neighbor_mask(id, side);
  for (int w = 0; w < words_; ++w) {
    std::uint64_t bits = row[w];
    while (bits) {
      const int bit = std::countr_zero(bits);
      out.push_back(w * 64 + bit);
      bits &= bits - 1;
    }
  }
  return out;
}

const std::uint64_t* TileSet::neighbor_mask(int id, Side side) const {
  return &masks_[(static_cast<std::size_t>(id) * 4 + static_cast<int>(side)) * words_];
}

std::uint64_t TileSet::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_double = [&](double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    mix(bits);
  };
  mix(static_cast<std::uint64_t>(size()));
  mix_double(tile_size_);
  mix_double(quantization_);
  for (const TileSpec& t : tiles_) {
    mix(static_cast<std::uint64_t>(t.kind));
    mix(static_cast<std::uint64_t>(t.rotation));
    mix_double(t.weight);
    for (const auto& [name, value] : t.params) {
      for (char ch : name) mix(static_cast<unsigned char>(ch));
      mix_double(value);
    }
    mix(static_cast<std::uint64_t>(t.heights.n()));
    for (double v : t.heights.values()) mix_double(v);
  }
  return h;
}

nlohmann::json TileSet::to_json(bool include_adjacency) const {
  json tiles = json::array();
  for (const TileSpec& t : tiles_) {
    json jt{{"id", t.id},
            {"kind", to_string(t.kind)},
            {"rotation", degrees(t.rotation)},
            {"weight", t.weight},
            {"params", t.params},
            {"n", t.heights.n()},
            {"heights", t.heights.values()}};
    if (include_adjacency) {
      json adj;
      for (Side s : {Side::north, Side::east, Side::south, Side::west})
        adj[to_string(s)] = neighbors(t.id, s);
      jt["neighbors"] = adj;
    }
    tiles.push_back(std::move(jt));
  }
  return json{{"tile_size", tile_size_},
              {"quantization", quantization_},
              {"count", size()},
              {"tiles", std::move(tiles)}};
}

TileSet generate_tile_library(const TileLibraryConfig& config) {
  if (config.grid_n < 2) throw ConfigError("grid_n must be at least 2");
  if (config.quantization <= 0.0) throw ConfigError("quantization step must be positive");
  if (config.tile_size <= 0.0) throw ConfigError("tile size must be positive");
  if (config.h_max <= config.h_min) throw ConfigError("h_max must exceed h_min");

  const int n = config.grid_n;
  struct Pending {
    TileKind kind;
    std::map<std::string, double> params;
    double weight;
    HeightArray heights;
  };
  std::vector<Pending> base;

  for (double h : config.flat.heights)
    base.push_back({TileKind::flat, {{"height", h}}, config.flat.weight, make_flat(n, h)});
  for (double low : config.step.low_heights)
    for (double rise : config.step.rises)
      base.push_back({TileKind::step,
                      {{"low", low}, {"rise", rise}},
                      config.step.weight,
                      make_step(n, low, rise)});
  for (double low : config.stairs.low_heights)
    for (double rise : config.stairs.rises)
      for (int steps : config.stairs.step_counts) {
        if (steps < 2) throw ConfigError("stairs need at least 2 treads");
        base.push_back({TileKind::stairs,
                        {{"low", low}, {"rise", rise}, {"steps", static_cast<double>(steps)}},
                        config.stairs.weight,
                        make_stairs(n, low, rise, steps)});
      }
  for (double low : config.ramp.low_heights)
    for (double rise : config.ramp.rises)
      base.push_back({TileKind::ramp,
                      {{"low", low}, {"rise", rise}},
                      config.ramp.weight,
                      make_ramp(n, low, rise)});
  for (double amp : config.rough.amplitudes)
    for (int freq : config.rough.frequencies)
      for (int variant = 0; variant < config.rough.variants; ++variant)
        base.push_back({TileKind::rough,
                        {{"amplitude", amp},
                         {"frequency", static_cast<double>(freq)},
                         {"variant", static_cast<double>(variant)}},
                        config.rough.weight,
                        make_rough(n, amp, freq, derive_seed(config.noise_seed, variant))});

  if (base.empty()) throw ConfigError("tile library config produced no tiles");

  std::vector<TileSpec> tiles;
  std::set<std::vector<double>> seen;
  for (Pending& p : base) {
    snap_borders(p.heights, config.quantization);
    HeightArray rotated = p.heights;
    for (int rot = 0; rot < 4; ++rot) {
      if (rot > 0) rotated = rotated.rotated90();
      if (!seen.insert(rotated.values()).second) continue;
      TileSpec t;
      t.id = static_cast<int>(tiles.size());
      t.kind = p.kind;
      t.params = p.params;
      t.rotation = static_cast<Rotation>(rot);
      t.weight = p.weight;
      t.heights = rotated;
      tiles.push_back(std::move(t));
    }
  }

  for (const TileSpec& t : tiles)
    for (double h : t.heights.values())
      if (h < config.h_min - 1e-12 || h > config.h_max + 1e-12)
        throw ConfigError("tile heights fall outside [h_min, h_max]");

  return build_adjacency(std::move(tiles), config.tile_size, config.quantization);
}

}  // namespace terra
