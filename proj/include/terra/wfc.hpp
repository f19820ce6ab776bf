#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "terra/rng.hpp"
#include "terra/tiles.hpp"

namespace terra {

struct BoundaryConstraint {
  int row = 0;
  int col = 0;
  int tile_id = 0;
};

struct PropagationResult;

// Candidate sets for every cell of a rows x cols grid, row-major, row 0 at
// the south edge. Cells start with the full tile set.
class WaveGrid {
 public:
  WaveGrid(const TileSet& tiles, int rows, int cols, std::uint64_t seed);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int cell_count() const { return rows_ * cols_; }
  int cell_index(int row, int col) const { return row * cols_ + col; }

  int candidate_count(int cell) const { return counts_[static_cast<std::size_t>(cell)]; }
  bool is_collapsed(int cell) const { return candidate_count(cell) == 1; }
  bool fully_collapsed() const { return uncollapsed_ == 0; }
  bool has_candidate(int cell, int tile) const;
  std::vector<int> candidates(int cell) const;
  int only_candidate(int cell) const;  // requires is_collapsed(cell)

  // Restricts a cell to a single tile. Returns false when the tile was not a
  // candidate, which leaves the cell empty (a contradiction to be handled by
  // the caller).
  bool pin(int cell, int tile);

  const TileSet& tiles() const { return *tiles_; }
  Rng& rng() { return rng_; }

 private:
  friend PropagationResult propagate(WaveGrid& grid, int changed_cell);

  const std::uint64_t* cell_bits(int cell) const {
    return &bits_[static_cast<std::size_t>(cell) * words_];
  }
  std::uint64_t* cell_bits(int cell) {
    return &bits_[static_cast<std::size_t>(cell) * words_];
  }
  void recount(int cell);

  const TileSet* tiles_;
  int rows_;
  int cols_;
  int words_;
  int uncollapsed_;
  std::vector<std::uint64_t> bits_;
  std::vector<int> counts_;
  std::vector<std::uint64_t> full_union_;  // per side, union of all masks
  Rng rng_;
};

struct PropagationResult {
  bool contradiction = false;
  std::vector<int> changed_cells;  // discovery order, seed cell excluded
};

// Arc-consistency sweep from a changed cell: neighbors keep only tiles still
// supported across the shared edge, repeated until nothing changes.
PropagationResult propagate(WaveGrid& grid, int changed_cell);

struct Observation {
  int cell = -1;
  int tile = -1;
};

// Picks the uncollapsed cell with minimum Shannon entropy over normalized
// candidate weights (ties break to the lowest row-major index), samples one
// candidate proportionally to weight and pins it. Throws QueryError when
// every cell is already collapsed.
Observation observe(WaveGrid& grid);

struct CollapsedGrid {
  int rows = 0;
  int cols = 0;
  std::vector<int> assignment;  // row-major tile ids

  int at(int row, int col) const {
    return assignment[static_cast<std::size_t>(row) * cols + col];
  }

  nlohmann::json to_json() const;
  static CollapsedGrid from_json(const nlohmann::json& j);
};

// Full observe/propagate loop. A contradiction restarts the search from
// scratch with a sub-seed derived from (seed, restart index); the restart
// budget is max_restarts on top of the first attempt. Unsatisfiable boundary
// constraints fail immediately since retrying cannot help. Throws
// GenerationError carrying the restart count on failure.
CollapsedGrid collapse(const TileSet& tiles, int rows, int cols, std::uint64_t seed,
                       const std::vector<BoundaryConstraint>& boundary = {},
                       int max_restarts = 100, int* restarts_used = nullptr);

}  // namespace terra
