#include "navlab/nn.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "navlab/errors.hpp"

namespace navlab::nn {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// dLoss/dPre given dLoss/dPost.
Matrix activation_backward(Activation act, const Matrix& pre, const Matrix& post,
                           const Matrix& grad_post) {
  switch (act) {
    case Activation::Linear:
      return grad_post;
    case Activation::LeakyRelu:
      return grad_post.array() *
             (kLeakySlope + (1.0 - kLeakySlope) * (pre.array() > 0.0).cast<double>());
    case Activation::Tanh:
      return grad_post.array() * (1.0 - post.array().square());
    case Activation::Sigmoid:
      return grad_post.array() * post.array() * (1.0 - post.array());
  }
  return grad_post;
}

void check_input(const DenseLayer& layer, Index rows, const char* what) {
  if (rows != layer.in_dim()) {
    std::ostringstream os;
    os << what << ": input has " << rows << " rows, layer expects " << layer.in_dim();
    throw ContractViolation(os.str());
  }
}

Matrix layer_forward(const DenseLayer& layer, const Matrix& x, LayerTape* tape) {
  check_input(layer, x.rows(), "dense_forward");
  Matrix pre = layer.weights * x;
  pre.colwise() += layer.bias;
  Matrix post = activate(layer.activation, pre);
  if (tape) {
    tape->input = x;
    tape->pre = std::move(pre);
    tape->post = post;
  }
  return post;
}

Matrix layer_backward(const DenseLayer& layer, const LayerTape& tape, const Matrix& grad_post,
                      DenseLayer& grads) {
  const Matrix grad_pre = activation_backward(layer.activation, tape.pre, tape.post, grad_post);
  grads.weights.noalias() += grad_pre * tape.input.transpose();
  grads.bias += grad_pre.rowwise().sum();
  return layer.weights.transpose() * grad_pre;
}

Matrix block_forward(const ResConcatBlock& block, const Matrix& x, BlockTape* tape) {
  const Matrix h = layer_forward(block.expand, x, tape ? &tape->expand : nullptr);
  Matrix sum = layer_forward(block.project, h, tape ? &tape->project : nullptr);
  sum += x;
  Matrix out(2 * x.rows(), x.cols());
  out.topRows(x.rows()) = activate(Activation::LeakyRelu, sum);
  out.bottomRows(x.rows()) = x;
  if (tape) tape->sum = std::move(sum);
  return out;
}

Matrix block_backward(const ResConcatBlock& block, const BlockTape& tape, const Matrix& grad_out,
                      ResConcatBlock& grads) {
  const Index n = block.in_dim();
  const Matrix grad_sum = activation_backward(Activation::LeakyRelu, tape.sum, Matrix(),
                                              grad_out.topRows(n));
  Matrix grad_x = grad_out.bottomRows(n) + grad_sum;
  const Matrix grad_h = layer_backward(block.project, tape.project, grad_sum, grads.project);
  grad_x += layer_backward(block.expand, tape.expand, grad_h, grads.expand);
  return grad_x;
}

void init_layer(DenseLayer& layer, std::mt19937_64& rng, double scale) {
  const double bound = scale * std::sqrt(6.0 / static_cast<double>(layer.in_dim()));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Index j = 0; j < layer.weights.cols(); ++j) {
    for (Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = u(rng);
  }
  layer.bias.setZero();
}

template <class Ref, class NetT>
void collect(NetT& net, const std::string& prefix, std::vector<Ref>& out) {
  auto add = [&](const std::string& name, auto& m) {
    out.push_back(Ref{prefix + name, m.data(), m.rows(), m.cols()});
  };
  auto add_layer = [&](const std::string& name, auto& layer) {
    add(name + ".weight", layer.weights);
    add(name + ".bias", layer.bias);
  };
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    const std::string b = "block" + std::to_string(i);
    add_layer(b + ".expand", net.blocks[i].expand);
    add_layer(b + ".project", net.blocks[i].project);
  }
  for (std::size_t i = 0; i < net.hidden.size(); ++i) {
    add_layer("hidden" + std::to_string(i), net.hidden[i]);
  }
  add_layer("head", net.head);
}

}  // namespace

Matrix activate(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::Linear:
      return pre;
    case Activation::LeakyRelu:
      return pre.array().max(0.0) + kLeakySlope * pre.array().min(0.0);
    case Activation::Tanh:
      return pre.array().tanh();
    case Activation::Sigmoid:
      return pre.unaryExpr([](double v) { return sigmoid(v); });
  }
  return pre;
}

DenseLayer zero_dense(Index in_dim, Index out_dim, Activation act) {
  return DenseLayer{Matrix::Zero(out_dim, in_dim), Vector::Zero(out_dim), act};
}

Vector dense_forward(const DenseLayer& layer, const Vector& input) {
  return layer_forward(layer, input, nullptr);
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& batch) {
  return layer_forward(layer, batch, nullptr);
}

Vector res_block_forward(const ResConcatBlock& block, const Vector& input) {
  return block_forward(block, input, nullptr);
}

const char* to_string(BodyKind body) { return body == BodyKind::ResConcat ? "resconcat" : "mlp"; }

Index Network::input_dim() const {
  if (!blocks.empty()) return blocks.front().in_dim();
  if (!hidden.empty()) return hidden.front().in_dim();
  return head.in_dim();
}

Index Network::hidden_width() const {
  if (!blocks.empty()) return blocks.front().expand.out_dim();
  if (!hidden.empty()) return hidden.front().out_dim();
  return 0;
}

Network make_network(BodyKind body, Index input_dim, Index output_dim, Index hidden_width,
                     Activation head_activation) {
  Network net;
  net.body = body;
  if (body == BodyKind::ResConcat) {
    Index width = input_dim;
    const Activation project_act[] = {Activation::Linear, Activation::LeakyRelu};
    for (int b = 0; b < 2; ++b) {
      net.blocks.push_back({zero_dense(width, hidden_width, Activation::LeakyRelu),
                            zero_dense(hidden_width, width, project_act[b])});
      width *= 2;
    }
    net.head = zero_dense(width, output_dim, head_activation);
  } else {
    net.hidden.push_back(zero_dense(input_dim, hidden_width, Activation::LeakyRelu));
    net.hidden.push_back(zero_dense(hidden_width, hidden_width, Activation::LeakyRelu));
    net.head = zero_dense(hidden_width, output_dim, head_activation);
  }
  return net;
}

void init_network(Network& net, std::mt19937_64& rng) {
  for (auto& block : net.blocks) {
    init_layer(block.expand, rng, 1.0);
    init_layer(block.project, rng, 1.0);
  }
  for (auto& layer : net.hidden) init_layer(layer, rng, 1.0);
  init_layer(net.head, rng, 0.01);
}

Network zeros_like(const Network& net) {
  Network z = net;
  for (auto& t : tensors(z)) t.map().setZero();
  return z;
}

Matrix forward(const Network& net, const Matrix& batch, Tape* tape) {
  if (tape) {
    tape->blocks.resize(net.blocks.size());
    tape->hidden.resize(net.hidden.size());
  }
  Matrix x = batch;
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    x = block_forward(net.blocks[i], x, tape ? &tape->blocks[i] : nullptr);
  }
  for (std::size_t i = 0; i < net.hidden.size(); ++i) {
    x = layer_forward(net.hidden[i], x, tape ? &tape->hidden[i] : nullptr);
  }
  return layer_forward(net.head, x, tape ? &tape->head : nullptr);
}

Matrix backward(const Network& net, const Tape& tape, const Matrix& grad_out, Network& grads) {
  Matrix g = layer_backward(net.head, tape.head, grad_out, grads.head);
  for (std::size_t i = net.hidden.size(); i-- > 0;) {
    g = layer_backward(net.hidden[i], tape.hidden[i], g, grads.hidden[i]);
  }
  for (std::size_t i = net.blocks.size(); i-- > 0;) {
    g = block_backward(net.blocks[i], tape.blocks[i], g, grads.blocks[i]);
  }
  return g;
}

ActorParams make_actor(BodyKind body, Index obs_dim, Index hidden_width, std::mt19937_64& rng) {
  ActorParams p;
  p.net = make_network(body, obs_dim, 2, hidden_width);
  init_network(p.net, rng);
  p.log_std.setConstant(kInitLogStd);
  return p;
}

CriticParams make_critic(BodyKind body, Index input_dim, Index hidden_width, std::mt19937_64& rng) {
  CriticParams p;
  p.net = make_network(body, input_dim, 1, hidden_width);
  init_network(p.net, rng);
  return p;
}

ActorParams zeros_like(const ActorParams& p) {
  ActorParams z{zeros_like(p.net), Eigen::Vector2d::Zero()};
  return z;
}

CriticParams zeros_like(const CriticParams& p) { return CriticParams{zeros_like(p.net)}; }

Matrix actor_mean(const ActorParams& actor, const Matrix& obs, Tape* tape) {
  Matrix raw = forward(actor.net, obs, tape);
  Matrix mean(2, raw.cols());
  mean.row(0) = raw.row(0).unaryExpr([](double v) { return sigmoid(v); });
  mean.row(1) = raw.row(1).array().tanh();
  return mean;
}

Matrix actor_mean_backward(const ActorParams& actor, const Tape& tape, const Matrix& mean,
                           const Matrix& grad_mean, ActorParams& grads) {
  Matrix grad_raw(2, mean.cols());
  grad_raw.row(0) = grad_mean.row(0).array() * mean.row(0).array() * (1.0 - mean.row(0).array());
  grad_raw.row(1) = grad_mean.row(1).array() * (1.0 - mean.row(1).array().square());
  return backward(actor.net, tape, grad_raw, grads.net);
}

ActorOutput actor_forward(const ActorParams& actor, const Vector& obs) {
  const Matrix mean = actor_mean(actor, obs);
  return {mean(0, 0), mean(1, 0), actor.log_std};
}

Matrix critic_values(const CriticParams& critic, const Matrix& inputs, Tape* tape) {
  return forward(critic.net, inputs, tape);
}

double critic_forward(const CriticParams& critic, const Vector& input) {
  return critic_values(critic, input)(0, 0);
}

double gaussian_logprob(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                        const Eigen::Vector2d& action) {
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double total = 0.0;
  for (int d = 0; d < 2; ++d) {
    const double z = (action[d] - mean[d]) / std::exp(log_std[d]);
    total += -0.5 * z * z - log_std[d] - half_log_two_pi;
  }
  return total;
}

double gaussian_entropy(const Eigen::Vector2d& log_std) {
  const double per_dim = 0.5 + 0.5 * std::log(2.0 * std::numbers::pi);
  return 2.0 * per_dim + log_std.sum();
}

std::vector<TensorRef> tensors(Network& net, const std::string& prefix) {
  std::vector<TensorRef> out;
  collect<TensorRef>(net, prefix, out);
  return out;
}

std::vector<ConstTensorRef> tensors(const Network& net, const std::string& prefix) {
  std::vector<ConstTensorRef> out;
  collect<ConstTensorRef>(net, prefix, out);
  return out;
}

std::vector<TensorRef> tensors(ActorParams& p, const std::string& prefix) {
  auto out = tensors(p.net, prefix);
  out.push_back(TensorRef{prefix + "log_std", p.log_std.data(), 2, 1});
  return out;
}

std::vector<ConstTensorRef> tensors(const ActorParams& p, const std::string& prefix) {
  auto out = tensors(p.net, prefix);
  out.push_back(ConstTensorRef{prefix + "log_std", p.log_std.data(), 2, 1});
  return out;
}

std::vector<TensorRef> tensors(CriticParams& p, const std::string& prefix) {
  return tensors(p.net, prefix);
}

std::vector<ConstTensorRef> tensors(const CriticParams& p, const std::string& prefix) {
  return tensors(p.net, prefix);
}

AdamState make_adam(const std::vector<ConstTensorRef>& params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& t : params) {
    state.first_moment.push_back(Matrix::Zero(t.rows, t.cols));
    state.second_moment.push_back(Matrix::Zero(t.rows, t.cols));
  }
  return state;
}

void adam_step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ContractViolation("adam_step: parameter/gradient/state count mismatch");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows != grads[i].rows || params[i].cols != grads[i].cols ||
        state.first_moment[i].rows() != params[i].rows ||
        state.first_moment[i].cols() != params[i].cols) {
      throw ContractViolation("adam_step: shape mismatch for " + params[i].name);
    }
    auto g = grads[i].map().array();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = c.beta1 * m.array() + (1.0 - c.beta1) * g;
    v = c.beta2 * v.array() + (1.0 - c.beta2) * g.square();
    params[i].map().array() -=
        c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.epsilon);
  }
}

}  // namespace navlab::nn
