#pragma once

namespace navlab {

enum class RewardKind { Basic, Advanced };

/// Constants shared by both reward functions. Defaults are configuration,
/// sized so per-step shaping is O(1) against O(100) terminal rewards.
struct RewardConfig {
  double r_arrive = 100.0;
  double r_collision = -100.0;
  double c_r = 10.0;    // progress coefficient
  double c_p = 1.0;     // heading penalty coefficient
  double c_d = 0.3;     // arrival threshold, m
  double c_o = 0.15;    // near-collision range threshold, m

  /// Throws ConfigError unless r_arrive > 0 > r_collision, c_r > 0, c_p >= 0, c_d > 0, c_o > 0.
  void validate() const;
};

struct TransitionFacts {
  double d_prev = 0.0;     // distance to target before the step
  double d_curr = 0.0;     // distance to target after the step
  double min_range = 0.0;  // nearest raw range reading after the step
  double hd = 1.0;         // heading alignment score in [0, 1]
};

/// Upper bound on the d_prev / d_curr exponent of the advanced shaping term.
inline constexpr double kMaxProgressExponent = 10.0;

double reward_basic(const TransitionFacts& facts, const RewardConfig& cfg);
double reward_advanced(const TransitionFacts& facts, const RewardConfig& cfg);
double reward(RewardKind kind, const TransitionFacts& facts, const RewardConfig& cfg);

/// 1 when facing the target, 0 when facing directly away, linear in |deviation|.
double heading_score(double heading_deviation);

const char* to_string(RewardKind kind);
RewardKind parse_reward_kind(const char* text);

}  // namespace navlab
