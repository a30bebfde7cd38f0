#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace navlab::nn {

/// Batches are column-major: one column per sample.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Activation { LeakyRelu, Linear, Tanh, Sigmoid };

inline constexpr double kLeakySlope = 0.01;
inline constexpr Index kDefaultHidden = 512;

Matrix activate(Activation act, const Matrix& pre);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::Linear;

  Index in_dim() const { return weights.cols(); }
  Index out_dim() const { return weights.rows(); }
};

DenseLayer zero_dense(Index in_dim, Index out_dim, Activation act);

/// activation(W x + b). Throws ContractViolation on a shape mismatch.
Vector dense_forward(const DenseLayer& layer, const Vector& input);
Matrix dense_forward(const DenseLayer& layer, const Matrix& batch);

/// Dense expansion, projection back to the input width, residual add,
/// LeakyReLU, then concatenation with the block input. Output width is
/// twice the input width.
struct ResConcatBlock {
  DenseLayer expand;   // in -> hidden, LeakyReLU
  DenseLayer project;  // hidden -> in

  Index in_dim() const { return expand.in_dim(); }
  Index out_dim() const { return 2 * expand.in_dim(); }
};

Vector res_block_forward(const ResConcatBlock& block, const Vector& input);

/// ResConcat: two ResConcatBlocks (in -> 2in -> 4in) then the head.
/// Mlp: two Dense-LeakyReLU hidden layers then the head (ablation body).
enum class BodyKind { ResConcat, Mlp };

const char* to_string(BodyKind body);

struct Network {
  BodyKind body = BodyKind::ResConcat;
  std::vector<ResConcatBlock> blocks;  // ResConcat body
  std::vector<DenseLayer> hidden;      // Mlp body
  DenseLayer head;

  Index input_dim() const;
  Index output_dim() const { return head.out_dim(); }
  Index hidden_width() const;
};

/// Zero-initialised network. The first block projects back linearly, the
/// second through LeakyReLU, mirroring the layer table the body follows.
Network make_network(BodyKind body, Index input_dim, Index output_dim,
                     Index hidden_width = kDefaultHidden, Activation head_activation = Activation::Linear);

/// He-style uniform(+-sqrt(6 / fan_in)) weights, zero biases; head at 1/100 scale.
void init_network(Network& net, std::mt19937_64& rng);

Network zeros_like(const Network& net);

struct LayerTape {
  Matrix input;
  Matrix pre;
  Matrix post;
};

struct BlockTape {
  LayerTape expand;
  LayerTape project;
  Matrix sum;  // project output + block input, before the LeakyReLU
};

/// Intermediate values kept by a forward pass for the reverse sweep.
struct Tape {
  std::vector<BlockTape> blocks;
  std::vector<LayerTape> hidden;
  LayerTape head;
};

Matrix forward(const Network& net, const Matrix& batch, Tape* tape = nullptr);

/// Reverse sweep for dLoss/dOutput = grad_out. Accumulates parameter
/// gradients into `grads` (shaped like `net`) and returns dLoss/dInput.
Matrix backward(const Network& net, const Tape& tape, const Matrix& grad_out, Network& grads);

// ---------------------------------------------------------------------------
// Actor / critic

/// Squashed Gaussian-mean policy: sigmoid on the linear output, tanh on the
/// angular one, plus a state-independent log standard deviation.
struct ActorParams {
  Network net;
  Eigen::Vector2d log_std = Eigen::Vector2d::Zero();
};

struct CriticParams {
  Network net;
};

inline const double kInitLogStd = std::log(0.3);

ActorParams make_actor(BodyKind body, Index obs_dim, Index hidden_width, std::mt19937_64& rng);
CriticParams make_critic(BodyKind body, Index input_dim, Index hidden_width, std::mt19937_64& rng);
ActorParams zeros_like(const ActorParams& p);
CriticParams zeros_like(const CriticParams& p);

/// 2 x batch squashed means.
Matrix actor_mean(const ActorParams& actor, const Matrix& obs, Tape* tape = nullptr);

/// Backprop through the squashing and the body. `mean` is actor_mean's output.
/// Accumulates into grads.net (log_std untouched) and returns dLoss/dObs.
Matrix actor_mean_backward(const ActorParams& actor, const Tape& tape, const Matrix& mean,
                           const Matrix& grad_mean, ActorParams& grads);

struct ActorOutput {
  double mean_linear = 0.0;   // (0, 1)
  double mean_angular = 0.0;  // (-1, 1)
  Eigen::Vector2d log_std = Eigen::Vector2d::Zero();
};

ActorOutput actor_forward(const ActorParams& actor, const Vector& obs);

/// 1 x batch values.
Matrix critic_values(const CriticParams& critic, const Matrix& inputs, Tape* tape = nullptr);
double critic_forward(const CriticParams& critic, const Vector& input);

/// Diagonal Gaussian log-density summed over dimensions.
double gaussian_logprob(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                        const Eigen::Vector2d& action);

/// Differential entropy of the diagonal Gaussian.
double gaussian_entropy(const Eigen::Vector2d& log_std);

// ---------------------------------------------------------------------------
// Parameter views

struct TensorRef {
  std::string name;
  double* data = nullptr;
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  Eigen::Map<Matrix> map() const { return {data, rows, cols}; }
};

struct ConstTensorRef {
  std::string name;
  const double* data = nullptr;
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  Eigen::Map<const Matrix> map() const { return {data, rows, cols}; }
};

std::vector<TensorRef> tensors(Network& net, const std::string& prefix = "");
std::vector<ConstTensorRef> tensors(const Network& net, const std::string& prefix = "");
std::vector<TensorRef> tensors(ActorParams& p, const std::string& prefix = "");
std::vector<ConstTensorRef> tensors(const ActorParams& p, const std::string& prefix = "");
std::vector<TensorRef> tensors(CriticParams& p, const std::string& prefix = "");
std::vector<ConstTensorRef> tensors(const CriticParams& p, const std::string& prefix = "");

template <class Params>
Index parameter_count(const Params& p) {
  Index n = 0;
  for (const auto& t : tensors(p)) n += t.size();
  return n;
}

/// True when every parameter is finite.
template <class Params>
bool all_finite(const Params& p) {
  for (const auto& t : tensors(p)) {
    if (!t.map().allFinite()) return false;
  }
  return true;
}

/// target <- tau * online + (1 - tau) * target
template <class Params>
void soft_update(Params& target, const Params& online, double tau) {
  auto dst = tensors(target);
  const auto src = tensors(online);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i].map() = tau * src[i].map() + (1.0 - tau) * dst[i].map();
  }
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
};

AdamState make_adam(const std::vector<ConstTensorRef>& params, AdamConfig config);
void adam_step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads,
               AdamState& state);

template <class Params>
AdamState make_adam(const Params& p, AdamConfig config) {
  return make_adam(tensors(p), config);
}

template <class Params>
void adam_step(Params& p, const Params& grads, AdamState& state) {
  adam_step(tensors(p), tensors(grads), state);
}

}  // namespace navlab::nn
