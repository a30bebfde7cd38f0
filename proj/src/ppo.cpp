#include "navlab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "navlab/errors.hpp"

namespace navlab {

void PpoConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("ppo: clip must be in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must be in (0, 1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("ppo: lambda must be in (0, 1]");
  if (epochs <= 0 || minibatch <= 0 || rollout_length <= 0) {
    throw ConfigError("ppo: epochs, minibatch and rollout length must be positive");
  }
  if (!(lr > 0.0)) throw ConfigError("ppo: lr must be positive");
  if (!(value_coef >= 0.0 && entropy_coef >= 0.0)) {
    throw ConfigError("ppo: loss coefficients must be non-negative");
  }
}

double ppo_surrogate(double log_prob_new, double log_prob_old, double advantage, double clip) {
  const double ratio = std::exp(log_prob_new - log_prob_old);
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

double value_loss(std::span<const double> predicted, std::span<const double> returns) {
  if (predicted.size() != returns.size()) throw ContractViolation("value_loss: length mismatch");
  if (predicted.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - returns[i];
    sum += e * e;
  }
  return sum / static_cast<double>(predicted.size());
}

PpoLoss ppo_loss(const nn::ActorParams& actor, const nn::CriticParams& critic, const PpoBatch& batch,
                 const PpoConfig& cfg, nn::ActorParams* actor_grads,
                 nn::CriticParams* critic_grads) {
  const nn::Index n = batch.size();
  if (n == 0) throw ContractViolation("ppo_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::Vector2d sigma = actor.log_std.array().exp();
  const Eigen::Vector2d inv_var = sigma.array().square().inverse();

  nn::Tape actor_tape;
  const nn::Matrix mean = nn::actor_mean(actor, batch.obs, actor_grads ? &actor_tape : nullptr);

  PpoLoss loss;
  nn::Matrix grad_mean(2, n);
  Eigen::Vector2d grad_log_std = Eigen::Vector2d::Zero();
  double surrogate_sum = 0.0;
  int clipped = 0;
  for (nn::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d mu = mean.col(i);
    const Eigen::Vector2d a = batch.samples.col(i);
    const double lp = nn::gaussian_logprob(mu, actor.log_std, a);
    const double log_ratio = lp - batch.old_log_prob[i];
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages[i];
    const double unclipped_obj = ratio * adv;
    const double clipped_obj = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
    surrogate_sum += std::min(unclipped_obj, clipped_obj);
    loss.mean_ratio += ratio;
    loss.approx_kl += (ratio - 1.0) - log_ratio;
    if (std::abs(ratio - 1.0) > cfg.clip) ++clipped;

    // d(-obj / n)/d(lp): the clipped branch is flat in the ratio.
    const double d_lp = unclipped_obj <= clipped_obj ? -adv * ratio * inv_n : 0.0;
    const Eigen::Vector2d diff = a - mu;
    grad_mean.col(i) = d_lp * diff.cwiseProduct(inv_var);
    grad_log_std += d_lp * (diff.array().square() * inv_var.array() - 1.0).matrix();
  }
  loss.policy = -surrogate_sum * inv_n;
  loss.mean_ratio *= inv_n;
  loss.approx_kl *= inv_n;
  loss.clip_fraction = static_cast<double>(clipped) * inv_n;
  loss.entropy = nn::gaussian_entropy(actor.log_std);

  nn::Tape critic_tape;
  const nn::Matrix values =
      nn::critic_values(critic, batch.obs, critic_grads ? &critic_tape : nullptr);
  const nn::Matrix err = values - batch.returns.transpose();
  loss.value = err.squaredNorm() * inv_n;
  loss.total = loss.policy + cfg.value_coef * loss.value - cfg.entropy_coef * loss.entropy;

  if (actor_grads) {
    nn::actor_mean_backward(actor, actor_tape, mean, grad_mean, *actor_grads);
    actor_grads->log_std += grad_log_std;
    actor_grads->log_std.array() -= cfg.entropy_coef;
  }
  if (critic_grads) {
    const nn::Matrix grad_values = (2.0 * cfg.value_coef * inv_n) * err;
    nn::backward(critic.net, critic_tape, grad_values, critic_grads->net);
  }
  return loss;
}

PpoLearner make_ppo_learner(nn::BodyKind body, nn::Index hidden_width, const PpoConfig& cfg,
                            std::mt19937_64& rng) {
  PpoLearner l;
  l.actor = nn::make_actor(body, kObservationDim, hidden_width, rng);
  l.critic = nn::make_critic(body, kObservationDim, hidden_width, rng);
  nn::AdamConfig adam;
  adam.lr = cfg.lr;
  l.actor_opt = nn::make_adam(l.actor, adam);
  l.critic_opt = nn::make_adam(l.critic, adam);
  return l;
}

PpoBatch gather_batch(const TrajectoryBuffer& buffer, std::span<const double> advantages,
                      std::span<const std::size_t> order) {
  const auto n = static_cast<nn::Index>(order.size());
  PpoBatch b;
  b.obs.resize(kObservationDim, n);
  b.samples.resize(2, n);
  b.old_log_prob.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  const auto& ts = buffer.transitions();
  for (nn::Index c = 0; c < n; ++c) {
    const std::size_t k = order[static_cast<std::size_t>(c)];
    b.obs.col(c) = ts[k].obs;
    b.samples.col(c) = ts[k].sample;
    b.old_log_prob[c] = ts[k].log_prob;
    b.advantages[c] = advantages[k];
    b.returns[c] = buffer.returns()[k];
  }
  return b;
}

PpoStats ppo_update(PpoLearner& learner, const TrajectoryBuffer& buffer, const PpoConfig& cfg,
                    std::mt19937_64& rng) {
  if (!buffer.finalized()) throw ContractViolation("ppo_update: buffer not finalized");
  std::vector<double> advantages = buffer.advantages();
  normalize_advantages(advantages);

  std::vector<std::size_t> order(buffer.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto mb = static_cast<std::size_t>(cfg.minibatch);

  PpoStats stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t len = std::min(mb, order.size() - start);
      const PpoBatch batch =
          gather_batch(buffer, advantages, std::span(order).subspan(start, len));
      nn::ActorParams actor_grads = nn::zeros_like(learner.actor);
      nn::CriticParams critic_grads = nn::zeros_like(learner.critic);
      const PpoLoss loss = ppo_loss(learner.actor, learner.critic, batch, cfg, &actor_grads,
                                    &critic_grads);
      if (!std::isfinite(loss.total) || !nn::all_finite(actor_grads) ||
          !nn::all_finite(critic_grads)) {
        throw NumericalError("ppo_update: non-finite loss or gradient at epoch " +
                             std::to_string(epoch));
      }
      if (stats.minibatches == 0) stats.first_minibatch_ratio = loss.mean_ratio;
      nn::adam_step(learner.actor, actor_grads, learner.actor_opt);
      nn::adam_step(learner.critic, critic_grads, learner.critic_opt);

      ++stats.minibatches;
      stats.mean_ratio += loss.mean_ratio;
      stats.clip_fraction += loss.clip_fraction;
      stats.policy_loss += loss.policy;
      stats.value_loss += loss.value;
      stats.entropy += loss.entropy;
      stats.approx_kl += loss.approx_kl;
    }
  }
  if (!nn::all_finite(learner.actor) || !nn::all_finite(learner.critic)) {
    throw NumericalError("ppo_update: parameters became non-finite");
  }
  if (stats.minibatches > 0) {
    const double k = 1.0 / stats.minibatches;
    stats.mean_ratio *= k;
    stats.clip_fraction *= k;
    stats.policy_loss *= k;
    stats.value_loss *= k;
    stats.entropy *= k;
    stats.approx_kl *= k;
  }
  return stats;
}

}  // namespace navlab
