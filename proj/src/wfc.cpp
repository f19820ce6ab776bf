#include "terra/wfc.hpp"

#include <bit>
#include <cmath>
#include <deque>

namespace terra {

using nlohmann::json;

WaveGrid::WaveGrid(const TileSet& tiles, int rows, int cols, std::uint64_t seed)
    : tiles_(&tiles), rows_(rows), cols_(cols), words_(tiles.words()), rng_(seed) {
  if (rows < 1 || cols < 1) throw ConfigError("grid dimensions must be positive");
  const int count = tiles.size();
  bits_.assign(static_cast<std::size_t>(cell_count()) * words_, 0);
  for (int cell = 0; cell < cell_count(); ++cell) {
    std::uint64_t* row = cell_bits(cell);
    for (int t = 0; t < count; ++t) row[t >> 6] |= 1ULL << (t & 63);
  }
  counts_.assign(static_cast<std::size_t>(cell_count()), count);
  uncollapsed_ = count == 1 ? 0 : cell_count();

  full_union_.assign(static_cast<std::size_t>(4) * words_, 0);
  for (int s = 0; s < 4; ++s)
    for (int t = 0; t < count; ++t) {
      const std::uint64_t* mask = tiles.neighbor_mask(t, static_cast<Side>(s));
      for (int w = 0; w < words_; ++w) full_union_[static_cast<std::size_t>(s) * words_ + w] |= mask[w];
    }
}

bool WaveGrid::has_candidate(int cell, int tile) const {
  return (cell_bits(cell)[tile >> 6] >> (tile & 63)) & 1ULL;
}

std::vector<int> WaveGrid::candidates(int cell) const {
  std::vector<int> out;
  const std::uint64_t* row = cell_bits(cell);
  for (int w = 0; w < words_; ++w) {
    std::uint64_t bits = row[w];
    while (bits) {
      out.push_back(w * 64 + std::countr_zero(bits));
      bits &= bits - 1;
    }
  }
  return out;
}

int WaveGrid::only_candidate(int cell) const {
  const std::uint64_t* row = cell_bits(cell);
  for (int w = 0; w < words_; ++w)
    if (row[w]) return w * 64 + std::countr_zero(row[w]);
  return -1;
}

bool WaveGrid::pin(int cell, int tile) {
  const bool had = has_candidate(cell, tile);
  std::uint64_t* row = cell_bits(cell);
  for (int w = 0; w < words_; ++w) row[w] = 0;
  if (had) row[tile >> 6] = 1ULL << (tile & 63);
  recount(cell);
  return had;
}

void WaveGrid::recount(int cell) {
  const std::uint64_t* row = cell_bits(cell);
  int count = 0;
  for (int w = 0; w < words_; ++w) count += std::popcount(row[w]);
  const bool was_open = counts_[static_cast<std::size_t>(cell)] > 1;
  counts_[static_cast<std::size_t>(cell)] = count;
  const bool is_open = count > 1;
  if (was_open && !is_open) --uncollapsed_;
  if (!was_open && is_open) ++uncollapsed_;
}

PropagationResult propagate(WaveGrid& grid, int changed_cell) {
  PropagationResult result;
  const TileSet& tiles = grid.tiles();
  const int words = grid.words_;
  const int tile_count = tiles.size();

  std::deque<int> queue{changed_cell};
  std::vector<bool> queued(static_cast<std::size_t>(grid.cell_count()), false);
  queued[static_cast<std::size_t>(changed_cell)] = true;

  std::vector<std::uint64_t> allowed(static_cast<std::size_t>(words));

  // Neighbor offsets per side, in (row, col). Side order matches the enum.
  const int dr[4] = {1, 0, -1, 0};
  const int dc[4] = {0, 1, 0, -1};

  while (!queue.empty()) {
    const int cell = queue.front();
    queue.pop_front();
    queued[static_cast<std::size_t>(cell)] = false;
    const int row = cell / grid.cols_;
    const int col = cell % grid.cols_;

    for (int s = 0; s < 4; ++s) {
      const int nr = row + dr[s];
      const int nc = col + dc[s];
      if (nr < 0 || nr >= grid.rows_ || nc < 0 || nc >= grid.cols_) continue;
      const int neighbor = grid.cell_index(nr, nc);

      if (grid.candidate_count(cell) == tile_count) {
        std::copy(grid.full_union_.begin() + static_cast<std::size_t>(s) * words,
                  grid.full_union_.begin() + static_cast<std::size_t>(s + 1) * words,
                  allowed.begin());
      } else {
        std::fill(allowed.begin(), allowed.end(), 0);
        const std::uint64_t* cbits = grid.cell_bits(cell);
        for (int w = 0; w < words; ++w) {
          std::uint64_t bits = cbits[w];
          while (bits) {
            const int t = w * 64 + std::countr_zero(bits);
            bits &= bits - 1;
            const std::uint64_t* mask = tiles.neighbor_mask(t, static_cast<Side>(s));
            for (int k = 0; k < words; ++k) allowed[static_cast<std::size_t>(k)] |= mask[k];
          }
        }
      }

      std::uint64_t* nbits = grid.cell_bits(neighbor);
      bool shrunk = false;
      for (int w = 0; w < words; ++w) {
        const std::uint64_t next = nbits[w] & allowed[static_cast<std::size_t>(w)];
        if (next != nbits[w]) {
          nbits[w] = next;
          shrunk = true;
        }
      }
      if (!shrunk) continue;

      grid.recount(neighbor);
      result.changed_cells.push_back(neighbor);
      if (grid.candidate_count(neighbor) == 0) {
        result.contradiction = true;
        return result;
      }
      if (!queued[static_cast<std::size_t>(neighbor)]) {
        queue.push_back(neighbor);
        queued[static_cast<std::size_t>(neighbor)] = true;
      }
    }
  }
  return result;
}

Observation observe(WaveGrid& grid) {
  const TileSet& tiles = grid.tiles();
  int best_cell = -1;
  double best_entropy = 0.0;

  for (int cell = 0; cell < grid.cell_count(); ++cell) {
    if (grid.candidate_count(cell) < 2) continue;
    double total = 0.0, wlogw = 0.0;
    for (int t : grid.candidates(cell)) {
      const double w = tiles.tile(t).weight;
      total += w;
      wlogw += w * std::log(w);
    }
    const double entropy = std::log(total) - wlogw / total;
    if (best_cell < 0 || entropy < best_entropy) {
      best_cell = cell;
      best_entropy = entropy;
    }
  }
  if (best_cell < 0) throw QueryError("observe on a fully collapsed grid");

  const std::vector<int> cands = grid.candidates(best_cell);
  double total = 0.0;
  for (int t : cands) total += tiles.tile(t).weight;
  const double r = grid.rng().uniform() * total;
  int chosen = cands.back();
  double cum = 0.0;
  for (int t : cands) {
    cum += tiles.tile(t).weight;
    if (r < cum) {
      chosen = t;
      break;
    }
  }
  grid.pin(best_cell, chosen);
  return {best_cell, chosen};
}

json CollapsedGrid::to_json() const {
  return json{{"rows", rows}, {"cols", cols}, {"assignment", assignment}};
}

CollapsedGrid CollapsedGrid::from_json(const json& j) {
  CollapsedGrid g;
  g.rows = j.at("rows").get<int>();
  g.cols = j.at("cols").get<int>();
  g.assignment = j.at("assignment").get<std::vector<int>>();
  if (g.assignment.size() != static_cast<std::size_t>(g.rows) * g.cols)
    throw ConfigError("assignment size does not match grid dimensions");
  return g;
}

CollapsedGrid collapse(const TileSet& tiles, int rows, int cols, std::uint64_t seed,
                       const std::vector<BoundaryConstraint>& boundary, int max_restarts,
                       int* restarts_used) {
  if (rows < 1 || cols < 1) throw ConfigError("grid dimensions must be positive");
  if (max_restarts < 0) throw ConfigError("max_restarts must be non-negative");
  for (const BoundaryConstraint& bc : boundary) {
    if (bc.row < 0 || bc.row >= rows || bc.col < 0 || bc.col >= cols)
      throw ConfigError("boundary constraint outside the grid");
    if (bc.tile_id < 0 || bc.tile_id >= tiles.size())
      throw ConfigError("boundary constraint names an unknown tile");
  }

  for (int attempt = 0; attempt <= max_restarts; ++attempt) {
    WaveGrid grid(tiles, rows, cols,
                  attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));

    // Pinning and its propagation are deterministic, so a contradiction here
    // can never be fixed by a restart.
    bool boundary_failed = false;
    for (const BoundaryConstraint& bc : boundary) {
      const int cell = grid.cell_index(bc.row, bc.col);
      if (!grid.pin(cell, bc.tile_id) || propagate(grid, cell).contradiction) {
        boundary_failed = true;
        break;
      }
    }
    if (boundary_failed)
      throw GenerationError("boundary constraints are unsatisfiable", 0);

    // Initial arc-consistency sweep. Cells born collapsed (single-tile sets)
    // never trigger propagation later, so edge support must be enforced up
    // front. Everything to this point is deterministic: a contradiction here
    // means no tiling exists.
    for (int cell = 0; cell < grid.cell_count(); ++cell)
      if (propagate(grid, cell).contradiction)
        throw GenerationError(boundary.empty()
                                  ? "tile set admits no tiling of this grid"
                                  : "boundary constraints are unsatisfiable",
                              0);

    bool contradiction = false;
    while (!grid.fully_collapsed()) {
      const Observation obs = observe(grid);
      if (propagate(grid, obs.cell).contradiction) {
        contradiction = true;
        break;
      }
    }
    if (contradiction) continue;

    CollapsedGrid out;
    out.rows = rows;
    out.cols = cols;
    out.assignment.resize(static_cast<std::size_t>(rows) * cols);
    for (int cell = 0; cell < grid.cell_count(); ++cell)
      out.assignment[static_cast<std::size_t>(cell)] = grid.only_candidate(cell);
    if (restarts_used) *restarts_used = attempt;
    return out;
  }
  throw GenerationError("collapse failed after " + std::to_string(max_restarts) + " restarts",
                        max_restarts);
}

}  // namespace terra
