#include "navlab/buffers.hpp"

#include <cmath>

#include "navlab/errors.hpp"

namespace navlab {

ObsVector to_vector(const Observation& obs) {
  const auto v = obs.values();
  return Eigen::Map<const ObsVector>(v.data());
}

ReturnsAdvantages compute_returns_advantages(std::span<const Transition> transitions, double gamma,
                                             double lambda, double bootstrap_value) {
  if (transitions.empty()) throw ContractViolation("compute_returns_advantages: empty buffer");
  const std::size_t n = transitions.size();
  ReturnsAdvantages out;
  out.returns.resize(n);
  out.advantages.resize(n);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& t = transitions[i];
    const double live = t.done ? 0.0 : 1.0;
    const double delta = t.reward + gamma * next_value * live - t.value;
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + t.value;
    next_value = t.value;
  }
  return out;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= n;
  const double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * scale;
}

void TrajectoryBuffer::push(const Transition& t) {
  transitions_.push_back(t);
  finalized_ = false;
}

void TrajectoryBuffer::clear() {
  transitions_.clear();
  returns_.clear();
  advantages_.clear();
  finalized_ = false;
}

void TrajectoryBuffer::finalize(double gamma, double lambda, double bootstrap_value) {
  auto ra = compute_returns_advantages(transitions_, gamma, lambda, bootstrap_value);
  returns_ = std::move(ra.returns);
  advantages_ = std::move(ra.advantages);
  finalized_ = true;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : storage_(capacity) {
  if (capacity == 0) throw ContractViolation("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  storage_[next_] = t;
  next_ = (next_ + 1) % storage_.size();
  if (size_ < storage_.size()) ++size_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      std::mt19937_64& rng) const {
  if (size_ == 0) throw ContractViolation("ReplayBuffer: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

}  // namespace navlab
