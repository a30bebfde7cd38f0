#include "navlab/policy.hpp"

#include <algorithm>
#include <cmath>

namespace navlab {

Eigen::Vector2d clamp_action(const Eigen::Vector2d& a) {
  return {std::clamp(a[0], 0.0, 1.0), std::clamp(a[1], -1.0, 1.0)};
}

ActionSample select_action(const nn::ActorParams& actor, const ObsVector& obs, ActionMode mode,
                           std::mt19937_64& rng, double noise_std) {
  const nn::ActorOutput out = nn::actor_forward(actor, obs);
  const Eigen::Vector2d mean{out.mean_linear, out.mean_angular};
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample s;
  switch (mode) {
    case ActionMode::Deterministic:
      s.sample = mean;
      s.log_prob = nn::gaussian_logprob(mean, out.log_std, mean);
      break;
    case ActionMode::Stochastic:
      for (int d = 0; d < 2; ++d) s.sample[d] = mean[d] + std::exp(out.log_std[d]) * normal(rng);
      s.log_prob = nn::gaussian_logprob(mean, out.log_std, s.sample);
      break;
    case ActionMode::DdpgExplore:
      for (int d = 0; d < 2; ++d) s.sample[d] = mean[d] + noise_std * normal(rng);
      break;
  }
  s.action = clamp_action(s.sample);
  return s;
}

}  // namespace navlab
