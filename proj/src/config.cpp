#include "navlab/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "navlab/errors.hpp"
#include "navlab/world_io.hpp"

#ifndef NAVLAB_DATA_DIR
#define NAVLAB_DATA_DIR "data"
#endif

namespace navlab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double as_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
  return out;
}

long long as_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool as_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects true/false");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <class T>
Field dbl(T RunConfig::*group, double T::*member) {
  return {[=](RunConfig& c, std::string_view k, std::string_view v) { (c.*group).*member = as_double(k, v); },
          [=](const RunConfig& c) { return num((c.*group).*member); }};
}

template <class T>
Field integer(T RunConfig::*group, int T::*member) {
  return {[=](RunConfig& c, std::string_view k, std::string_view v) {
            (c.*group).*member = static_cast<int>(as_int(k, v));
          },
          [=](const RunConfig& c) { return std::to_string((c.*group).*member); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> t;
    t["run.algo"] = {[](RunConfig& c, std::string_view, std::string_view v) { c.algo = parse_algo(v); },
                     [](const RunConfig& c) { return std::string(to_string(c.algo)); }};
    t["run.world"] = {[](RunConfig& c, std::string_view, std::string_view v) { c.world_path = std::string(v); },
                      [](const RunConfig& c) { return c.world_path.string(); }};
    t["run.reward"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                         c.env.reward = parse_reward_kind(std::string(v).c_str());
                       },
                       [](const RunConfig& c) { return std::string(to_string(c.env.reward)); }};
    t["run.seed"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                       c.seed = static_cast<std::uint64_t>(as_int(k, v));
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
    t["run.episodes"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                           c.episodes = static_cast<int>(as_int(k, v));
                         },
                         [](const RunConfig& c) { return std::to_string(c.episodes); }};
    t["run.output"] = {[](RunConfig& c, std::string_view, std::string_view v) { c.output_dir = std::string(v); },
                       [](const RunConfig& c) { return c.output_dir.string(); }};
    t["run.checkpoint_every"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                   c.checkpoint_every = static_cast<int>(as_int(k, v));
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.checkpoint_every); }};
    t["run.step_budget"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                              c.step_budget = static_cast<int>(as_int(k, v));
                            },
                            [](const RunConfig& c) { return std::to_string(c.step_budget); }};
    t["run.wall_clock"] = {[](RunConfig& c, std::string_view k, std::string_view v) { c.wall_clock = as_bool(k, v); },
                           [](const RunConfig& c) { return std::string(c.wall_clock ? "true" : "false"); }};
    t["nn.hidden"] = {[](RunConfig& c, std::string_view k, std::string_view v) { c.hidden_width = as_int(k, v); },
                      [](const RunConfig& c) { return std::to_string(c.hidden_width); }};

    t["env.dt"] = dbl(&RunConfig::env, &EnvConfig::dt);
    t["env.max_steps"] = integer(&RunConfig::env, &EnvConfig::max_steps);
    t["env.max_range"] = dbl(&RunConfig::env, &EnvConfig::max_range);
    t["env.robot_radius"] = dbl(&RunConfig::env, &EnvConfig::robot_radius);
    t["env.target_clearance"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                   c.target_clearance = as_double(k, v);
                                 },
                                 [](const RunConfig& c) { return num(c.target_clearance); }};

    auto reward_field = [](double RewardConfig::*member) {
      return Field{[=](RunConfig& c, std::string_view k, std::string_view v) { c.env.rewards.*member = as_double(k, v); },
                   [=](const RunConfig& c) { return num(c.env.rewards.*member); }};
    };
    t["reward.r_arrive"] = reward_field(&RewardConfig::r_arrive);
    t["reward.r_collision"] = reward_field(&RewardConfig::r_collision);
    t["reward.c_r"] = reward_field(&RewardConfig::c_r);
    t["reward.c_p"] = reward_field(&RewardConfig::c_p);
    t["reward.c_d"] = reward_field(&RewardConfig::c_d);
    t["reward.c_o"] = reward_field(&RewardConfig::c_o);

    t["ppo.clip"] = dbl(&RunConfig::ppo, &PpoConfig::clip);
    t["ppo.gamma"] = dbl(&RunConfig::ppo, &PpoConfig::gamma);
    t["ppo.lambda"] = dbl(&RunConfig::ppo, &PpoConfig::lambda);
    t["ppo.epochs"] = integer(&RunConfig::ppo, &PpoConfig::epochs);
    t["ppo.minibatch"] = integer(&RunConfig::ppo, &PpoConfig::minibatch);
    t["ppo.value_coef"] = dbl(&RunConfig::ppo, &PpoConfig::value_coef);
    t["ppo.entropy_coef"] = dbl(&RunConfig::ppo, &PpoConfig::entropy_coef);
    t["ppo.rollout"] = integer(&RunConfig::ppo, &PpoConfig::rollout_length);
    t["ppo.lr"] = dbl(&RunConfig::ppo, &PpoConfig::lr);

    t["ddpg.gamma"] = dbl(&RunConfig::ddpg, &DdpgConfig::gamma);
    t["ddpg.tau"] = dbl(&RunConfig::ddpg, &DdpgConfig::tau);
    t["ddpg.noise_std"] = dbl(&RunConfig::ddpg, &DdpgConfig::noise_std);
    t["ddpg.batch"] = integer(&RunConfig::ddpg, &DdpgConfig::batch);
    t["ddpg.warmup"] = integer(&RunConfig::ddpg, &DdpgConfig::warmup);
    t["ddpg.capacity"] = integer(&RunConfig::ddpg, &DdpgConfig::capacity);
    t["ddpg.actor_lr"] = dbl(&RunConfig::ddpg, &DdpgConfig::actor_lr);
    t["ddpg.critic_lr"] = dbl(&RunConfig::ddpg, &DdpgConfig::critic_lr);
    return t;
  }();
  return table;
}

}  // namespace

const char* to_string(Algo algo) {
  switch (algo) {
    case Algo::PpoRes: return "ppo_res";
    case Algo::PpoMlp: return "ppo_mlp";
    case Algo::Ddpg: return "ddpg";
  }
  return "ppo_res";
}

Algo parse_algo(std::string_view text) {
  if (text == "ppo_res") return Algo::PpoRes;
  if (text == "ppo_mlp") return Algo::PpoMlp;
  if (text == "ddpg") return Algo::Ddpg;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (expected ppo_res, ppo_mlp or ddpg)");
}

nn::BodyKind body_for(Algo algo) {
  return algo == Algo::PpoMlp ? nn::BodyKind::Mlp : nn::BodyKind::ResConcat;
}

void RunConfig::validate() const {
  if (episodes <= 0) throw ConfigError("run: episodes must be positive");
  if (checkpoint_every <= 0) throw ConfigError("run: checkpoint_every must be positive");
  if (step_budget <= 0) throw ConfigError("run: step_budget must be positive");
  if (hidden_width <= 0) throw ConfigError("nn: hidden width must be positive");
  env.validate();
  ppo.validate();
  ddpg.validate();
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = fields();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("config: unknown key '" + std::string(key) + "'");
  it->second.set(cfg, key, trim(value));
}

void apply_config_text(RunConfig& cfg, std::string_view text, std::string_view source) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str(), path.string());
}

std::string describe(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, field] : fields()) os << key << " = " << field.get(cfg) << '\n';
  return os.str();
}

std::filesystem::path resolve_world_path(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) return path;
  const auto bundled = std::filesystem::path(NAVLAB_DATA_DIR) / path;
  if (path.is_relative() && std::filesystem::exists(bundled)) return bundled;
  throw ConfigError("world file not found: " + path.string());
}

void load_world(RunConfig& cfg) {
  cfg.env.world = parse_world(resolve_world_path(cfg.world_path));
  cfg.env.world.min_target_clearance = cfg.target_clearance;
}

}  // namespace navlab
