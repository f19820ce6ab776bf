#pragma once

#include <stdexcept>
#include <string>

namespace terra {

// Bad or inconsistent configuration values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The solver could not produce a valid assignment.
struct GenerationError : std::runtime_error {
  int restart_count = 0;
  GenerationError(const std::string& msg, int restarts)
      : std::runtime_error(msg), restart_count(restarts) {}
};

// Object placement gave up after the attempt budget.
struct PlacementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A query was made outside the valid domain (e.g. rays that miss terrain).
struct QueryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace terra
