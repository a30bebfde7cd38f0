#include "navlab/geometry.hpp"

#include <algorithm>
#include <limits>

namespace navlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kParallelEps = 1e-12;
constexpr double kTurnEps = 1e-9;

double ray_hit_segment(Vec2 origin, Vec2 dir, const Segment& s) {
  const Vec2 edge = s.b - s.a;
  const Vec2 to_a = s.a - origin;
  const double denom = cross(dir, edge);
  if (std::abs(denom) <= kParallelEps * norm(edge)) {
    if (std::abs(cross(to_a, dir)) > kParallelEps * (1.0 + norm(to_a))) return kInf;
    // Collinear: the nearer endpoint in front of the origin, 0 if straddling.
    const double ta = dot(to_a, dir);
    const double tb = dot(s.b - origin, dir);
    if ((ta <= 0.0 && tb >= 0.0) || (tb <= 0.0 && ta >= 0.0)) return 0.0;
    if (ta < 0.0) return kInf;
    return std::min(ta, tb);
  }
  const double t = cross(to_a, edge) / denom;
  const double u = cross(to_a, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return kInf;
  return t;
}

double ray_hit_circle(Vec2 origin, Vec2 dir, const Circle& c) {
  const Vec2 rel = origin - c.center;
  const double c_term = dot(rel, rel) - c.radius * c.radius;
  if (c_term <= 0.0) return 0.0;
  const double b = dot(dir, rel);
  const double disc = b * b - c_term;
  if (disc < 0.0) return kInf;
  // Nearer root; a tangent graze has disc == 0 and both roots coincide.
  const double t = -b - std::sqrt(disc);
  return t >= 0.0 ? t : kInf;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 edge = s.b - s.a;
  const double len2 = dot(edge, edge);
  double u = len2 > 0.0 ? dot(p - s.a, edge) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return distance(p, s.a + u * edge);
}

}  // namespace

double normalize_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::remainder(radians, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

double ray_hit(Vec2 origin, Vec2 direction, const Obstacle& obstacle) {
  return std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Segment>) {
          return ray_hit_segment(origin, direction, shape);
        } else {
          return ray_hit_circle(origin, direction, shape);
        }
      },
      obstacle);
}

double ray_cast(Vec2 origin, Vec2 direction, const World& world, double max_range) {
  double best = max_range;
  for (const auto& obstacle : world.obstacles) {
    best = std::min(best, ray_hit(origin, direction, obstacle));
    if (best <= 0.0) return 0.0;
  }
  return best;
}

Pose step_kinematics(const Pose& pose, Twist cmd, double dt) {
  const double v = cmd.linear;
  const double w = cmd.angular;
  const double yaw = pose.yaw;
  Pose next = pose;
  if (std::abs(w) < kTurnEps) {
    next.position.x += v * std::cos(yaw) * dt;
    next.position.y += v * std::sin(yaw) * dt;
  } else {
    const double yaw_end = yaw + w * dt;
    next.position.x += (v / w) * (std::sin(yaw_end) - std::sin(yaw));
    next.position.y += (v / w) * (std::cos(yaw) - std::cos(yaw_end));
  }
  next.yaw = normalize_angle(yaw + w * dt);
  return next;
}

double distance_to_obstacle(Vec2 p, const Obstacle& obstacle) {
  if (const auto* s = std::get_if<Segment>(&obstacle)) return point_segment_distance(p, *s);
  const auto& c = std::get<Circle>(obstacle);
  return std::max(0.0, distance(p, c.center) - c.radius);
}

bool collision(const Pose& pose, double robot_radius, const World& world) {
  const Vec2 p = pose.position;
  const Rect& b = world.bounds;
  if (p.x - robot_radius < b.min.x || p.x + robot_radius > b.max.x ||
      p.y - robot_radius < b.min.y || p.y + robot_radius > b.max.y) {
    return true;
  }
  for (const auto& obstacle : world.obstacles) {
    if (distance_to_obstacle(p, obstacle) < robot_radius) return true;
  }
  return false;
}

PolarTarget polar_to_target(const Pose& pose, Vec2 target) {
  const Vec2 rel = target - pose.position;
  const double d = norm(rel);
  if (d == 0.0) return {0.0, 0.0};
  return {d, normalize_angle(std::atan2(rel.y, rel.x) - pose.yaw)};
}

double clearance(Vec2 p, const World& world) {
  double best = kInf;
  for (const auto& obstacle : world.obstacles) {
    best = std::min(best, distance_to_obstacle(p, obstacle));
  }
  return best;
}

}  // namespace navlab
