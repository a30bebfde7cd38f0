#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <variant>
#include <vector>

namespace navlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

struct Pose {
  Vec2 position;
  double yaw = 0.0;  // (-pi, pi]

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Segment {
  Vec2 a;
  Vec2 b;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Circle {
  Vec2 center;
  double radius = 0.0;
  friend bool operator==(const Circle&, const Circle&) = default;
};

using Obstacle = std::variant<Segment, Circle>;

/// Axis-aligned rectangle, min corner inclusive.
struct Rect {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double diagonal() const { return std::hypot(width(), height()); }
  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct World {
  std::vector<Obstacle> obstacles;
  Rect bounds;
  Vec2 target;
  Pose robot_spawn;
  Rect target_spawn_region;
  double min_target_clearance = 0.6;

  friend bool operator==(const World&, const World&) = default;
};

/// Linear and angular velocity pair (m/s, rad/s).
struct Twist {
  double linear = 0.0;
  double angular = 0.0;
};

/// Distance along the ray to the nearest obstacle, capped at max_range.
/// An origin inside or on an obstacle yields 0.
double ray_cast(Vec2 origin, Vec2 direction, const World& world, double max_range);

/// Range to a single obstacle, or +inf when the ray misses it.
double ray_hit(Vec2 origin, Vec2 direction, const Obstacle& obstacle);

/// Exact unicycle arc integration over dt; straight-line update when |w| < 1e-9.
Pose step_kinematics(const Pose& pose, Twist cmd, double dt);

/// Euclidean distance from p to the obstacle's boundary set (0 inside a circle).
double distance_to_obstacle(Vec2 p, const Obstacle& obstacle);

/// Robot disc intersects an obstacle or leaves world.bounds.
bool collision(const Pose& pose, double robot_radius, const World& world);

struct PolarTarget {
  double distance = 0.0;
  double heading_deviation = 0.0;
};

PolarTarget polar_to_target(const Pose& pose, Vec2 target);

/// Smallest distance from p to any obstacle in the world.
double clearance(Vec2 p, const World& world);

}  // namespace navlab
