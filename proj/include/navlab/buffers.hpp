#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "navlab/environment.hpp"

namespace navlab {

using ObsVector = Eigen::Matrix<double, kObservationDim, 1>;

ObsVector to_vector(const Observation& obs);

/// One environment interaction. `action` is the clamped action that was
/// executed; `sample` is the unclamped Gaussian draw whose density is
/// `log_prob` (equal to `action` for deterministic policies).
struct Transition {
  ObsVector obs = ObsVector::Zero();
  Eigen::Vector2d action = Eigen::Vector2d::Zero();
  Eigen::Vector2d sample = Eigen::Vector2d::Zero();
  double log_prob = 0.0;
  double reward = 0.0;
  ObsVector next_obs = ObsVector::Zero();
  bool done = false;
  double value = 0.0;  // V(obs) at collection time
};

struct ReturnsAdvantages {
  std::vector<double> returns;
  std::vector<double> advantages;
};

/// GAE over an ordered transition sequence:
///   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
///   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
///   R_t     = A_t + V(s_t)
/// V(s_{t+1}) is the next transition's stored value, or bootstrap_value
/// after the last transition. Throws ContractViolation on an empty input.
ReturnsAdvantages compute_returns_advantages(std::span<const Transition> transitions, double gamma,
                                             double lambda, double bootstrap_value);

/// Rescales to zero mean and unit variance (population statistics).
void normalize_advantages(std::vector<double>& advantages);

/// On-policy rollout storage for PPO.
class TrajectoryBuffer {
 public:
  void push(const Transition& t);
  void clear();
  /// Computes returns and advantages; bootstrap_value is V(s_T) for a
  /// truncated segment and ignored when the last transition is terminal.
  void finalize(double gamma, double lambda, double bootstrap_value);

  std::size_t size() const { return transitions_.size(); }
  bool empty() const { return transitions_.empty(); }
  bool finalized() const { return finalized_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<double>& returns() const { return returns_; }
  const std::vector<double>& advantages() const { return advantages_; }

 private:
  std::vector<Transition> transitions_;
  std::vector<double> returns_;
  std::vector<double> advantages_;
  bool finalized_ = false;
};

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return storage_.size(); }
  const Transition& operator[](std::size_t i) const { return storage_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::vector<Transition> storage_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
};

}  // namespace navlab
