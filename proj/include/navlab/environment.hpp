#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "navlab/geometry.hpp"
#include "navlab/rewards.hpp"

namespace navlab {

inline constexpr int kLidarBeams = 30;
inline constexpr int kPooledBeams = 10;
inline constexpr int kObservationDim = 16;
inline constexpr int kActionDim = 2;
inline constexpr double kMaxLinearSpeed = 0.25;   // m/s
inline constexpr double kMaxAngularSpeed = 1.0;   // rad/s
inline constexpr int kSpawnAttempts = 10000;

/// Policy-space action: linear in [0, 1], angular in [-1, 1].
struct NormalizedAction {
  double linear = 0.0;
  double angular = 0.0;
};

/// Velocity command within the platform limits; out-of-range values throw.
class TwistCommand {
 public:
  TwistCommand() = default;
  TwistCommand(double linear, double angular);

  /// Clamps the normalized action into its box, then scales by the speed limits.
  static TwistCommand from_normalized(NormalizedAction action);

  double linear() const { return linear_; }
  double angular() const { return angular_; }
  Twist twist() const { return {linear_, angular_}; }

 private:
  double linear_ = 0.0;
  double angular_ = 0.0;
};

/// 30 ranges uniformly spaced over [-90, +90] degrees relative to heading,
/// ordered from the right-most beam to the left-most.
using LidarScan = std::array<double, kLidarBeams>;
using PooledRanges = std::array<double, kPooledBeams>;

/// Beam angle relative to heading for beam index i.
double beam_angle(int beam);

LidarScan cast_scan(const Pose& pose, const World& world, double max_range);

/// Minimum of each contiguous 3-beam window, angular order preserved.
PooledRanges min_pool(const LidarScan& scan);

PooledRanges normalize_ranges(const PooledRanges& pooled, double max_range);

struct Observation {
  PooledRanges pooled_ranges{};  // (0, 1]
  double prev_linear = 0.0;      // [0, 1]
  double prev_angular = 0.0;     // [-1, 1]
  double target_distance = 0.0;  // distance / arena diagonal, [0, 1]
  double target_bearing = 0.0;   // world-frame bearing / pi, (-1, 1]
  double yaw = 0.0;              // yaw / pi, (-1, 1]
  double heading_deviation = 0.0;  // (bearing - yaw) / pi, (-1, 1]

  /// Fixed order: 10 ranges, prev_linear, prev_angular, distance, bearing, yaw, deviation.
  std::array<double, kObservationDim> values() const;

  /// Every component inside its declared range.
  bool within_bounds() const;
};

Observation build_observation(const Pose& pose, const LidarScan& scan, NormalizedAction prev,
                              Vec2 target, double max_range, double arena_diagonal);

enum class StepEvent { None, Arrived, Collided, Timeout };

const char* to_string(StepEvent event);

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepEvent event = StepEvent::None;
  /// Target reached this step; also set when the same step hits the step limit.
  bool arrived = false;
};

struct EnvConfig {
  World world;
  double dt = 0.1;
  int max_steps = 500;
  double max_range = 3.5;
  double robot_radius = 0.105;
  RewardKind reward = RewardKind::Basic;
  RewardConfig rewards;  // holds c_d and c_o
  std::uint64_t seed = 0;

  void validate() const;
};

/// Episodic navigation task. Arrival respawns the target and keeps the
/// episode running; collision and timeout end it.
class NavigationEnv {
 public:
  explicit NavigationEnv(EnvConfig config);

  Observation reset(std::uint64_t seed);
  Observation reset() { return reset(config_.seed); }

  StepResult step(NormalizedAction action);

  /// Places robot and target directly, keeping the step counter. Test hook.
  Observation place(const Pose& pose, Vec2 target);

  const EnvConfig& config() const { return config_; }
  const Pose& pose() const { return pose_; }
  Vec2 target() const { return target_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  const LidarScan& scan() const { return scan_; }
  Observation observation() const;

 private:
  Vec2 sample_target();

  EnvConfig config_;
  std::mt19937_64 rng_;
  Pose pose_;
  Vec2 target_;
  LidarScan scan_{};
  NormalizedAction prev_action_;
  double prev_distance_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  bool started_ = false;
};

}  // namespace navlab
