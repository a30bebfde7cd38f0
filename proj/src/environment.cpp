#include "navlab/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "navlab/errors.hpp"

namespace navlab {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TwistCommand::TwistCommand(double linear, double angular) : linear_(linear), angular_(angular) {
  if (!(linear >= 0.0 && linear <= kMaxLinearSpeed)) {
    throw ContractViolation("TwistCommand: linear velocity outside [0, 0.25] m/s");
  }
  if (!(angular >= -kMaxAngularSpeed && angular <= kMaxAngularSpeed)) {
    throw ContractViolation("TwistCommand: angular velocity outside [-1, 1] rad/s");
  }
}

TwistCommand TwistCommand::from_normalized(NormalizedAction action) {
  const double lin = std::clamp(action.linear, 0.0, 1.0);
  const double ang = std::clamp(action.angular, -1.0, 1.0);
  return TwistCommand(lin * kMaxLinearSpeed, ang * kMaxAngularSpeed);
}

double beam_angle(int beam) {
  return -kPi / 2.0 + kPi * static_cast<double>(beam) / static_cast<double>(kLidarBeams - 1);
}

LidarScan cast_scan(const Pose& pose, const World& world, double max_range) {
  LidarScan scan{};
  for (int i = 0; i < kLidarBeams; ++i) {
    const double a = pose.yaw + beam_angle(i);
    scan[static_cast<std::size_t>(i)] =
        ray_cast(pose.position, {std::cos(a), std::sin(a)}, world, max_range);
  }
  return scan;
}

PooledRanges min_pool(const LidarScan& scan) {
  PooledRanges out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::min({scan[3 * i], scan[3 * i + 1], scan[3 * i + 2]});
  }
  return out;
}

PooledRanges normalize_ranges(const PooledRanges& pooled, double max_range) {
  PooledRanges out{};
  std::transform(pooled.begin(), pooled.end(), out.begin(),
                 [max_range](double r) { return r / max_range; });
  return out;
}

std::array<double, kObservationDim> Observation::values() const {
  std::array<double, kObservationDim> v{};
  std::copy(pooled_ranges.begin(), pooled_ranges.end(), v.begin());
  v[10] = prev_linear;
  v[11] = prev_angular;
  v[12] = target_distance;
  v[13] = target_bearing;
  v[14] = yaw;
  v[15] = heading_deviation;
  return v;
}

bool Observation::within_bounds() const {
  auto in = [](double x, double lo, double hi) { return std::isfinite(x) && x >= lo && x <= hi; };
  auto half_open = [](double x) { return std::isfinite(x) && x > -1.0 && x <= 1.0; };
  for (double r : pooled_ranges) {
    if (!(std::isfinite(r) && r > 0.0 && r <= 1.0)) return false;
  }
  return in(prev_linear, 0.0, 1.0) && in(prev_angular, -1.0, 1.0) &&
         in(target_distance, 0.0, 1.0) && half_open(target_bearing) && half_open(yaw) &&
         half_open(heading_deviation);
}

Observation build_observation(const Pose& pose, const LidarScan& scan, NormalizedAction prev,
                              Vec2 target, double max_range, double arena_diagonal) {
  Observation obs;
  obs.pooled_ranges = normalize_ranges(min_pool(scan), max_range);
  obs.prev_linear = prev.linear;
  obs.prev_angular = prev.angular;
  const PolarTarget polar = polar_to_target(pose, target);
  const Vec2 rel = target - pose.position;
  const double bearing = polar.distance == 0.0 ? 0.0 : normalize_angle(std::atan2(rel.y, rel.x));
  obs.target_distance = std::min(polar.distance / arena_diagonal, 1.0);
  obs.target_bearing = bearing / kPi;
  obs.yaw = normalize_angle(pose.yaw) / kPi;
  obs.heading_deviation = polar.heading_deviation / kPi;
  return obs;
}

const char* to_string(StepEvent event) {
  switch (event) {
    case StepEvent::None: return "none";
    case StepEvent::Arrived: return "arrived";
    case StepEvent::Collided: return "collided";
    case StepEvent::Timeout: return "timeout";
  }
  return "none";
}

void EnvConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("env: dt must be positive");
  if (max_steps <= 0) throw ConfigError("env: max_steps must be positive");
  if (!(max_range > 0.0)) throw ConfigError("env: max_range must be positive");
  if (!(robot_radius > 0.0)) throw ConfigError("env: robot_radius must be positive");
  rewards.validate();
  // A target this far from every obstacle cannot be reached while colliding.
  if (!(world.min_target_clearance > rewards.c_d + std::max(robot_radius, rewards.c_o))) {
    throw ConfigError("env: target clearance must exceed c_d + max(robot_radius, c_o)");
  }
}

NavigationEnv::NavigationEnv(EnvConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
}

Vec2 NavigationEnv::sample_target() {
  const Rect& region = config_.world.target_spawn_region;
  std::uniform_real_distribution<double> ux(region.min.x, region.max.x);
  std::uniform_real_distribution<double> uy(region.min.y, region.max.y);
  for (int attempt = 0; attempt < kSpawnAttempts; ++attempt) {
    const Vec2 candidate{ux(rng_), uy(rng_)};
    if (clearance(candidate, config_.world) < config_.world.min_target_clearance) continue;
    if (distance(candidate, pose_.position) < config_.rewards.c_d) continue;
    return candidate;
  }
  throw ConfigError("env: no valid target position after " + std::to_string(kSpawnAttempts) +
                    " attempts");
}

Observation NavigationEnv::observation() const {
  return build_observation(pose_, scan_, prev_action_, target_, config_.max_range,
                           config_.world.bounds.diagonal());
}

Observation NavigationEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  pose_ = config_.world.robot_spawn;
  target_ = sample_target();
  config_.world.target = target_;
  scan_ = cast_scan(pose_, config_.world, config_.max_range);
  prev_action_ = {};
  prev_distance_ = distance(pose_.position, target_);
  steps_ = 0;
  done_ = false;
  started_ = true;
  return observation();
}

Observation NavigationEnv::place(const Pose& pose, Vec2 target) {
  if (!started_) throw ContractViolation("env: place() before reset()");
  pose_ = pose;
  target_ = target;
  config_.world.target = target_;
  scan_ = cast_scan(pose_, config_.world, config_.max_range);
  prev_distance_ = distance(pose_.position, target_);
  return observation();
}

StepResult NavigationEnv::step(NormalizedAction action) {
  if (!started_) throw ContractViolation("env: step() before reset()");
  if (done_) throw ContractViolation("env: step() after episode end; call reset()");

  const TwistCommand cmd = TwistCommand::from_normalized(action);
  pose_ = step_kinematics(pose_, cmd.twist(), config_.dt);
  scan_ = cast_scan(pose_, config_.world, config_.max_range);
  ++steps_;

  const PolarTarget polar = polar_to_target(pose_, target_);
  const double min_range = *std::min_element(scan_.begin(), scan_.end());
  const bool disc_hit = collision(pose_, config_.robot_radius, config_.world);
  const RewardConfig& rc = config_.rewards;

  TransitionFacts facts;
  facts.d_prev = prev_distance_;
  facts.d_curr = polar.distance;
  // A disc contact outside the scan's field of view still counts as a collision.
  facts.min_range = disc_hit ? 0.0 : min_range;
  facts.hd = heading_score(polar.heading_deviation);

  StepResult result;
  result.reward = reward(config_.reward, facts, rc);

  const bool arrived = polar.distance < rc.c_d;
  const bool collided = !arrived && facts.min_range < rc.c_o;
  if (arrived) {
    target_ = sample_target();
    config_.world.target = target_;
  }
  prev_distance_ = distance(pose_.position, target_);
  prev_action_ = {cmd.linear() / kMaxLinearSpeed, cmd.angular() / kMaxAngularSpeed};

  if (collided) {
    result.event = StepEvent::Collided;
  } else if (steps_ >= config_.max_steps) {
    result.event = StepEvent::Timeout;
  } else if (arrived) {
    result.event = StepEvent::Arrived;
  }
  result.arrived = arrived;
  result.done = result.event == StepEvent::Collided || result.event == StepEvent::Timeout;
  done_ = result.done;
  result.observation = observation();
  return result;
}

}  // namespace navlab
