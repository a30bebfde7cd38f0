#pragma once

#include <random>

#include "navlab/buffers.hpp"
#include "navlab/nn.hpp"

namespace navlab {

struct DdpgConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double noise_std = 0.1;
  int batch = 128;
  int warmup = 1000;
  int capacity = 100000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;

  void validate() const;
};

/// Online and target networks. The critic scores concat(obs, action).
struct DdpgLearner {
  nn::ActorParams actor;
  nn::CriticParams critic;
  nn::ActorParams target_actor;
  nn::CriticParams target_critic;
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
};

inline constexpr nn::Index kCriticInputDim = kObservationDim + kActionDim;

DdpgLearner make_ddpg_learner(nn::BodyKind body, nn::Index hidden_width, const DdpgConfig& cfg,
                              std::mt19937_64& rng);

struct DdpgBatch {
  nn::Matrix obs;       // 16 x B
  nn::Matrix actions;   // 2 x B, executed (clamped) actions
  nn::Vector rewards;
  nn::Matrix next_obs;  // 16 x B
  nn::Vector dones;     // 1.0 for terminal transitions

  nn::Index size() const { return obs.cols(); }
};

DdpgBatch gather_batch(const ReplayBuffer& replay, std::span<const std::size_t> indices);

/// Stacks observations over actions into critic inputs.
nn::Matrix critic_inputs(const nn::Matrix& obs, const nn::Matrix& actions);

/// y = r + gamma * (1 - done) * Q_target(s', mu_target(s'))
nn::Vector ddpg_targets(const DdpgLearner& learner, const DdpgBatch& batch, double gamma);

/// mean (Q(s, a) - y)^2, gradients accumulated into `grads` when non-null.
double ddpg_critic_loss(const nn::CriticParams& critic, const DdpgBatch& batch,
                        const nn::Vector& targets, nn::CriticParams* grads = nullptr);

/// -mean Q(s, mu(s)); actor gradients flow through the critic's input.
double ddpg_actor_loss(const nn::ActorParams& actor, const nn::CriticParams& critic,
                       const nn::Matrix& obs, nn::ActorParams* grads = nullptr);

struct DdpgStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
};

/// One critic step, one actor step, then soft target updates. Requires
/// replay.size() >= cfg.warmup; throws NumericalError on non-finite losses.
DdpgStats ddpg_update(DdpgLearner& learner, const ReplayBuffer& replay, const DdpgConfig& cfg,
                      std::mt19937_64& rng);

}  // namespace navlab
