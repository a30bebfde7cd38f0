#include "navlab/worlds.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "navlab/errors.hpp"
#include "navlab/world_io.hpp"

namespace navlab {

namespace {

constexpr const char* kSimpleWorld = R"(# Obstacle-free 10 x 10 m arena enclosed by four walls.
BOUNDS -5 -5 5 5
WALL -5 -5 5 -5
WALL 5 -5 5 5
WALL 5 5 -5 5
WALL -5 5 -5 -5
SPAWN 0 0 0
TARGET_REGION -4 -4 4 4
)";

constexpr const char* kComplexWorld = R"(# 10 x 10 m arena with five interior obstacles. The layout approximates an
# obstacle-filled indoor room; coordinates are a documented choice, not a
# measured reproduction.
BOUNDS -5 -5 5 5
WALL -5 -5 5 -5
WALL 5 -5 5 5
WALL 5 5 -5 5
WALL -5 5 -5 -5
CIRCLE 2 0 0.5
CIRCLE -2 2.5 0.6
CIRCLE -2.5 -2 0.5
WALL 1 2.5 3.5 2.5
WALL 0.5 -2 0.5 -4
SPAWN 0 0 0
TARGET_REGION -4 -4 4 4
)";

constexpr double kMutualClearance = 0.5;
constexpr double kSpawnClearance = 1.0;
constexpr int kArenaAttempts = 1000;
constexpr int kObstacleAttempts = 500;

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

bool segments_cross(const Segment& s, const Segment& t) {
  const double d1 = orient(t.a, t.b, s.a);
  const double d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a);
  const double d4 = orient(s.a, s.b, t.b);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double obstacle_gap(const Obstacle& a, const Obstacle& b) {
  const auto* sa = std::get_if<Segment>(&a);
  const auto* sb = std::get_if<Segment>(&b);
  if (sa && sb) {
    if (segments_cross(*sa, *sb)) return 0.0;
    return std::min({distance_to_obstacle(sa->a, b), distance_to_obstacle(sa->b, b),
                     distance_to_obstacle(sb->a, a), distance_to_obstacle(sb->b, a)});
  }
  if (!sa && !sb) {
    const auto& ca = std::get<Circle>(a);
    const auto& cb = std::get<Circle>(b);
    return std::max(0.0, distance(ca.center, cb.center) - ca.radius - cb.radius);
  }
  const auto& c = sa ? std::get<Circle>(b) : std::get<Circle>(a);
  const Obstacle& seg = sa ? a : b;
  return std::max(0.0, distance_to_obstacle(c.center, seg) - c.radius);
}

Obstacle sample_obstacle(std::mt19937_64& rng, const Rect& inner) {
  std::uniform_real_distribution<double> ux(inner.min.x, inner.max.x);
  std::uniform_real_distribution<double> uy(inner.min.y, inner.max.y);
  std::bernoulli_distribution is_circle(0.5);
  if (is_circle(rng)) {
    std::uniform_real_distribution<double> radius(0.3, 0.7);
    return Circle{{ux(rng), uy(rng)}, radius(rng)};
  }
  std::uniform_real_distribution<double> length(1.0, 3.0);
  std::uniform_real_distribution<double> heading(0.0, std::numbers::pi);
  const Vec2 mid{ux(rng), uy(rng)};
  const double half = 0.5 * length(rng);
  const double th = heading(rng);
  const Vec2 off{half * std::cos(th), half * std::sin(th)};
  return Segment{mid - off, mid + off};
}

bool within(const Rect& r, const Obstacle& o) {
  if (const auto* s = std::get_if<Segment>(&o)) return r.contains(s->a) && r.contains(s->b);
  const auto& c = std::get<Circle>(o);
  return r.contains({c.center.x - c.radius, c.center.y - c.radius}) &&
         r.contains({c.center.x + c.radius, c.center.y + c.radius});
}

bool fully_connected(const World& world, double robot_radius) {
  const auto grid = occupancy_grid(world, robot_radius);
  const auto reach = reachable_cells(world, grid);
  for (std::size_t i = 0; i < grid.free.size(); ++i) {
    if (grid.free[i] && !reach[i]) return false;
  }
  return true;
}

}  // namespace

const ArenaSpec& simple_arena_spec() {
  static const ArenaSpec spec{"simple", kSimpleWorld,
                              "obstacle-free 10x10 m walled arena (simple environment)"};
  return spec;
}

const ArenaSpec& complex_arena_spec() {
  static const ArenaSpec spec{
      "complex", kComplexWorld,
      "10x10 m walled arena with five interior obstacles; approximate layout"};
  return spec;
}

World simple_arena() { return parse_world_text(kSimpleWorld, "simple.world"); }
World complex_arena() { return parse_world_text(kComplexWorld, "complex.world"); }

World random_arena(std::uint64_t seed, int n_obstacles) {
  if (n_obstacles < 0) throw ContractViolation("random_arena: n_obstacles must be >= 0");
  const World base = simple_arena();
  if (n_obstacles == 0) return base;

  std::mt19937_64 rng(seed);
  const Rect inner{{base.bounds.min.x + kMutualClearance, base.bounds.min.y + kMutualClearance},
                   {base.bounds.max.x - kMutualClearance, base.bounds.max.y - kMutualClearance}};
  for (int attempt = 0; attempt < kArenaAttempts; ++attempt) {
    World world = base;
    int placed = 0;
    for (int tries = 0; placed < n_obstacles && tries < kObstacleAttempts; ++tries) {
      Obstacle candidate = sample_obstacle(rng, inner);
      if (!within(inner, candidate)) continue;
      if (distance_to_obstacle(world.robot_spawn.position, candidate) < kSpawnClearance) continue;
      bool clear = true;
      for (const auto& existing : world.obstacles) {
        if (obstacle_gap(candidate, existing) < kMutualClearance) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      world.obstacles.push_back(candidate);
      ++placed;
    }
    if (placed == n_obstacles && fully_connected(world, 0.105)) return world;
  }
  throw ConfigError("random_arena: could not place obstacles with required clearance");
}

OccupancyGrid occupancy_grid(const World& world, double robot_radius, double resolution) {
  OccupancyGrid grid;
  grid.origin = world.bounds.min;
  grid.resolution = resolution;
  grid.robot_radius = robot_radius;
  grid.cols = static_cast<int>(std::floor(world.bounds.width() / resolution + 1e-9));
  grid.rows = static_cast<int>(std::floor(world.bounds.height() / resolution + 1e-9));
  grid.free.assign(static_cast<std::size_t>(grid.cols * grid.rows), 0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Pose pose{grid.center(c, r), 0.0};
      grid.free[static_cast<std::size_t>(r * grid.cols + c)] =
          collision(pose, robot_radius, world) ? 0 : 1;
    }
  }
  return grid;
}

std::vector<char> reachable_cells(const World& world, const OccupancyGrid& grid) {
  std::vector<char> seen(grid.free.size(), 0);
  const Vec2 s = world.robot_spawn.position;
  int sc = static_cast<int>(std::floor((s.x - grid.origin.x) / grid.resolution));
  int sr = static_cast<int>(std::floor((s.y - grid.origin.y) / grid.resolution));
  sc = std::clamp(sc, 0, grid.cols - 1);
  sr = std::clamp(sr, 0, grid.rows - 1);
  if (!grid.is_free(sc, sr)) return seen;

  // An edge between neighbouring free cells also needs a clear midpoint, so
  // thin walls between two cell centers are not crossed.
  std::deque<std::pair<int, int>> queue{{sc, sr}};
  seen[static_cast<std::size_t>(sr * grid.cols + sc)] = 1;
  constexpr int kDc[] = {1, -1, 0, 0};
  constexpr int kDr[] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const auto [c, r] = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int nc = c + kDc[k];
      const int nr = r + kDr[k];
      if (nc < 0 || nr < 0 || nc >= grid.cols || nr >= grid.rows) continue;
      const auto idx = static_cast<std::size_t>(nr * grid.cols + nc);
      if (seen[idx] || !grid.free[idx]) continue;
      const Vec2 mid = 0.5 * (grid.center(c, r) + grid.center(nc, nr));
      if (clearance(mid, world) < grid.robot_radius) continue;
      seen[idx] = 1;
      queue.emplace_back(nc, nr);
    }
  }
  return seen;
}

WorldCheckReport check_world(const World& world, double robot_radius) {
  WorldCheckReport report;
  auto problem = [&](std::string what) {
    report.ok = false;
    report.problems.push_back(std::move(what));
  };

  for (const auto& o : world.obstacles) {
    if (!within(world.bounds, o)) problem("obstacle outside bounds");
  }
  if (!world.bounds.contains(world.robot_spawn.position)) problem("spawn outside bounds");
  if (collision(world.robot_spawn, robot_radius, world)) problem("spawn pose collides");

  const auto grid = occupancy_grid(world, robot_radius);
  const auto reach = reachable_cells(world, grid);
  bool target_feasible = false;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const auto idx = static_cast<std::size_t>(r * grid.cols + c);
      if (!grid.free[idx]) continue;
      ++report.free_cells;
      if (reach[idx]) ++report.reachable_cells;
      const Vec2 p = grid.center(c, r);
      if (reach[idx] && world.target_spawn_region.contains(p) &&
          clearance(p, world) >= world.min_target_clearance) {
        target_feasible = true;
      }
    }
  }
  if (report.reachable_cells != report.free_cells) {
    problem("free space is disconnected: " + std::to_string(report.free_cells - report.reachable_cells) +
            " unreachable cells");
  }
  if (!target_feasible) problem("no reachable target position with required clearance");
  return report;
}

}  // namespace navlab
