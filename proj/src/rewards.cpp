#include "navlab/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "navlab/errors.hpp"

namespace navlab {

void RewardConfig::validate() const {
  if (!(r_arrive > 0.0 && r_collision < 0.0)) {
    throw ConfigError("reward: require r_arrive > 0 > r_collision");
  }
  if (!(c_r > 0.0)) throw ConfigError("reward: c_r must be positive");
  if (!(c_p >= 0.0)) throw ConfigError("reward: c_p must be non-negative");
  if (!(c_d > 0.0) || !(c_o > 0.0)) throw ConfigError("reward: thresholds must be positive");
}

double reward_basic(const TransitionFacts& facts, const RewardConfig& cfg) {
  if (facts.d_curr < cfg.c_d) return cfg.r_arrive;
  if (facts.min_range < cfg.c_o) return cfg.r_collision;
  return cfg.c_r * (facts.d_prev - facts.d_curr);
}

double reward_advanced(const TransitionFacts& facts, const RewardConfig& cfg) {
  if (facts.d_curr < cfg.c_d) return cfg.r_arrive;
  if (facts.min_range < cfg.c_o) return cfg.r_collision;
  const double exponent = std::min(facts.d_prev / facts.d_curr, kMaxProgressExponent);
  return cfg.c_r * (facts.d_prev - facts.d_curr) * std::exp2(exponent) -
         cfg.c_p * (1.0 - facts.hd);
}

double reward(RewardKind kind, const TransitionFacts& facts, const RewardConfig& cfg) {
  return kind == RewardKind::Basic ? reward_basic(facts, cfg) : reward_advanced(facts, cfg);
}

double heading_score(double heading_deviation) {
  return std::clamp(1.0 - std::abs(heading_deviation) / std::numbers::pi, 0.0, 1.0);
}

const char* to_string(RewardKind kind) {
  return kind == RewardKind::Basic ? "basic" : "advanced";
}

RewardKind parse_reward_kind(const char* text) {
  if (std::strcmp(text, "basic") == 0) return RewardKind::Basic;
  if (std::strcmp(text, "advanced") == 0) return RewardKind::Advanced;
  throw ConfigError(std::string("unknown reward kind: ") + text);
}

}  // namespace navlab
