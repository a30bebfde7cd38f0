#pragma once

#include <random>
#include <span>

#include "navlab/buffers.hpp"
#include "navlab/nn.hpp"

namespace navlab {

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  int epochs = 10;
  int minibatch = 64;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  int rollout_length = 2048;
  double lr = 3e-4;

  void validate() const;
};

/// min(r * A, clip(r, 1 - eps, 1 + eps) * A) with r = exp(lp_new - lp_old).
double ppo_surrogate(double log_prob_new, double log_prob_old, double advantage, double clip);

/// Mean squared error between predicted values and returns.
double value_loss(std::span<const double> predicted, std::span<const double> returns);

/// Column-per-sample minibatch view of a finalized rollout.
struct PpoBatch {
  nn::Matrix obs;      // 16 x B
  nn::Matrix samples;  // 2 x B, unclamped Gaussian draws
  nn::Vector old_log_prob;
  nn::Vector advantages;
  nn::Vector returns;

  nn::Index size() const { return obs.cols(); }
};

struct PpoLoss {
  double total = 0.0;   // -surrogate + value_coef * value_loss - entropy_coef * entropy
  double policy = 0.0;  // -mean surrogate
  double value = 0.0;   // mean squared error
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;  // share of samples with |r - 1| > clip
  double approx_kl = 0.0;
};

/// Evaluates the PPO loss on a minibatch. When grad pointers are non-null,
/// exact gradients of `total` are accumulated into them.
PpoLoss ppo_loss(const nn::ActorParams& actor, const nn::CriticParams& critic, const PpoBatch& batch,
                 const PpoConfig& cfg, nn::ActorParams* actor_grads = nullptr,
                 nn::CriticParams* critic_grads = nullptr);

struct PpoLearner {
  nn::ActorParams actor;
  nn::CriticParams critic;
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
};

PpoLearner make_ppo_learner(nn::BodyKind body, nn::Index hidden_width, const PpoConfig& cfg,
                            std::mt19937_64& rng);

struct PpoStats {
  double first_minibatch_ratio = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
};

/// Gathers buffer rows (in `order`) into a batch; advantages are taken from
/// `advantages` rather than the buffer so callers can pass normalized ones.
PpoBatch gather_batch(const TrajectoryBuffer& buffer, std::span<const double> advantages,
                      std::span<const std::size_t> order);

/// Epochs of shuffled minibatch Adam steps on the clipped objective. The
/// buffer must be finalized. A non-finite loss or gradient throws
/// NumericalError before that step is applied.
PpoStats ppo_update(PpoLearner& learner, const TrajectoryBuffer& buffer, const PpoConfig& cfg,
                    std::mt19937_64& rng);

}  // namespace navlab
