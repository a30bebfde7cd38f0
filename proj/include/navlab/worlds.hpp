#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "navlab/geometry.hpp"

namespace navlab {

struct ArenaSpec {
  std::string name;
  std::string world_text;
  std::string provenance;
};

/// Empty 10x10 m walled box, spawn at the center, target region inset 1 m.
const ArenaSpec& simple_arena_spec();
/// The simple box plus five interior obstacles (three circles, two walls).
const ArenaSpec& complex_arena_spec();

World simple_arena();
World complex_arena();

/// Simple box plus n_obstacles random circles/walls with >= 0.5 m mutual and
/// wall clearance, >= 1 m spawn clearance, and a connected free space.
World random_arena(std::uint64_t seed, int n_obstacles);

/// Free-space grid used by connectivity checks: cell centers at `resolution`
/// spacing whose clearance is at least `robot_radius`.
struct OccupancyGrid {
  Vec2 origin;
  double resolution = 0.25;
  double robot_radius = 0.105;
  int cols = 0;
  int rows = 0;
  std::vector<char> free;

  Vec2 center(int col, int row) const {
    return {origin.x + (col + 0.5) * resolution, origin.y + (row + 0.5) * resolution};
  }
  bool is_free(int col, int row) const { return free[static_cast<std::size_t>(row * cols + col)]; }
};

OccupancyGrid occupancy_grid(const World& world, double robot_radius, double resolution = 0.25);

/// Flood fill from the spawn cell; returns per-cell reachability (same layout as grid.free).
std::vector<char> reachable_cells(const World& world, const OccupancyGrid& grid);

struct WorldCheckReport {
  bool ok = true;
  std::vector<std::string> problems;
  int free_cells = 0;
  int reachable_cells = 0;
};

/// Bounds containment, spawn clearance, target-region feasibility and
/// free-space connectivity.
WorldCheckReport check_world(const World& world, double robot_radius = 0.105);

}  // namespace navlab
