#include "navlab/ddpg.hpp"

#include <cmath>

#include "navlab/errors.hpp"

namespace navlab {

void DdpgConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ddpg: gamma must be in (0, 1]");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("ddpg: tau must be in (0, 1)");
  if (!(noise_std >= 0.0)) throw ConfigError("ddpg: noise_std must be non-negative");
  if (batch <= 0 || warmup < 0 || capacity <= 0) {
    throw ConfigError("ddpg: batch and capacity must be positive, warmup non-negative");
  }
  if (warmup > capacity) throw ConfigError("ddpg: warmup exceeds replay capacity");
  if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw ConfigError("ddpg: learning rates must be positive");
}

DdpgLearner make_ddpg_learner(nn::BodyKind body, nn::Index hidden_width, const DdpgConfig& cfg,
                              std::mt19937_64& rng) {
  DdpgLearner l;
  l.actor = nn::make_actor(body, kObservationDim, hidden_width, rng);
  l.critic = nn::make_critic(body, kCriticInputDim, hidden_width, rng);
  l.target_actor = l.actor;
  l.target_critic = l.critic;
  nn::AdamConfig actor_adam;
  actor_adam.lr = cfg.actor_lr;
  nn::AdamConfig critic_adam;
  critic_adam.lr = cfg.critic_lr;
  l.actor_opt = nn::make_adam(l.actor, actor_adam);
  l.critic_opt = nn::make_adam(l.critic, critic_adam);
  return l;
}

DdpgBatch gather_batch(const ReplayBuffer& replay, std::span<const std::size_t> indices) {
  const auto n = static_cast<nn::Index>(indices.size());
  DdpgBatch b;
  b.obs.resize(kObservationDim, n);
  b.actions.resize(2, n);
  b.rewards.resize(n);
  b.next_obs.resize(kObservationDim, n);
  b.dones.resize(n);
  for (nn::Index c = 0; c < n; ++c) {
    const Transition& t = replay[indices[static_cast<std::size_t>(c)]];
    b.obs.col(c) = t.obs;
    b.actions.col(c) = t.action;
    b.rewards[c] = t.reward;
    b.next_obs.col(c) = t.next_obs;
    b.dones[c] = t.done ? 1.0 : 0.0;
  }
  return b;
}

nn::Matrix critic_inputs(const nn::Matrix& obs, const nn::Matrix& actions) {
  nn::Matrix in(obs.rows() + actions.rows(), obs.cols());
  in.topRows(obs.rows()) = obs;
  in.bottomRows(actions.rows()) = actions;
  return in;
}

nn::Vector ddpg_targets(const DdpgLearner& learner, const DdpgBatch& batch, double gamma) {
  const nn::Matrix next_actions = nn::actor_mean(learner.target_actor, batch.next_obs);
  const nn::Matrix q_next =
      nn::critic_values(learner.target_critic, critic_inputs(batch.next_obs, next_actions));
  return batch.rewards.array() +
         gamma * (1.0 - batch.dones.array()) * q_next.row(0).transpose().array();
}

double ddpg_critic_loss(const nn::CriticParams& critic, const DdpgBatch& batch,
                        const nn::Vector& targets, nn::CriticParams* grads) {
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  nn::Tape tape;
  const nn::Matrix q = nn::critic_values(critic, critic_inputs(batch.obs, batch.actions),
                                         grads ? &tape : nullptr);
  const nn::Matrix err = q - targets.transpose();
  if (grads) nn::backward(critic.net, tape, (2.0 * inv_n) * err, grads->net);
  return err.squaredNorm() * inv_n;
}

double ddpg_actor_loss(const nn::ActorParams& actor, const nn::CriticParams& critic,
                       const nn::Matrix& obs, nn::ActorParams* grads) {
  const double inv_n = 1.0 / static_cast<double>(obs.cols());
  nn::Tape actor_tape;
  nn::Tape critic_tape;
  const nn::Matrix mean = nn::actor_mean(actor, obs, grads ? &actor_tape : nullptr);
  const nn::Matrix q =
      nn::critic_values(critic, critic_inputs(obs, mean), grads ? &critic_tape : nullptr);
  if (grads) {
    nn::CriticParams scratch = nn::zeros_like(critic);
    const nn::Matrix grad_q = nn::Matrix::Constant(1, obs.cols(), -inv_n);
    const nn::Matrix grad_in = nn::backward(critic.net, critic_tape, grad_q, scratch.net);
    nn::actor_mean_backward(actor, actor_tape, mean, grad_in.bottomRows(2), *grads);
  }
  return -q.sum() * inv_n;
}

DdpgStats ddpg_update(DdpgLearner& learner, const ReplayBuffer& replay, const DdpgConfig& cfg,
                      std::mt19937_64& rng) {
  if (replay.size() < static_cast<std::size_t>(std::max(cfg.warmup, 1))) {
    throw ContractViolation("ddpg_update: replay buffer below warmup size");
  }
  const auto idx = replay.sample_indices(static_cast<std::size_t>(cfg.batch), rng);
  const DdpgBatch batch = gather_batch(replay, idx);

  DdpgStats stats;
  const nn::Vector targets = ddpg_targets(learner, batch, cfg.gamma);
  nn::CriticParams critic_grads = nn::zeros_like(learner.critic);
  stats.critic_loss = ddpg_critic_loss(learner.critic, batch, targets, &critic_grads);
  if (!std::isfinite(stats.critic_loss) || !nn::all_finite(critic_grads)) {
    throw NumericalError("ddpg_update: non-finite critic loss");
  }
  nn::adam_step(learner.critic, critic_grads, learner.critic_opt);

  nn::ActorParams actor_grads = nn::zeros_like(learner.actor);
  stats.actor_loss = ddpg_actor_loss(learner.actor, learner.critic, batch.obs, &actor_grads);
  if (!std::isfinite(stats.actor_loss) || !nn::all_finite(actor_grads)) {
    throw NumericalError("ddpg_update: non-finite actor loss");
  }
  nn::adam_step(learner.actor, actor_grads, learner.actor_opt);
  stats.mean_q = -stats.actor_loss;

  nn::soft_update(learner.target_critic, learner.critic, cfg.tau);
  nn::soft_update(learner.target_actor, learner.actor, cfg.tau);
  return stats;
}

}  // namespace navlab
