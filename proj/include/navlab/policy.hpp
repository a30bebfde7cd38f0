#pragma once

#include <random>

#include "navlab/buffers.hpp"
#include "navlab/nn.hpp"

namespace navlab {

enum class ActionMode { Stochastic, Deterministic, DdpgExplore };

struct ActionSample {
  Eigen::Vector2d action = Eigen::Vector2d::Zero();  // clamped to [0,1] x [-1,1]
  Eigen::Vector2d sample = Eigen::Vector2d::Zero();  // before clamping
  double log_prob = 0.0;  // density of `sample` (stochastic mode only)
};

Eigen::Vector2d clamp_action(const Eigen::Vector2d& a);

/// Stochastic: Gaussian draw around the squashed mean, clamped, with the
/// log-density of the unclamped draw. Deterministic: the squashed mean.
/// DdpgExplore: the mean plus N(0, noise_std^2) per dimension, clamped.
ActionSample select_action(const nn::ActorParams& actor, const ObsVector& obs, ActionMode mode,
                           std::mt19937_64& rng, double noise_std = 0.1);

inline NormalizedAction to_normalized(const Eigen::Vector2d& a) { return {a[0], a[1]}; }

}  // namespace navlab
