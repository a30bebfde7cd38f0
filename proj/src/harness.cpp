#include "navlab/harness.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#ifdef __GLIBC__
#include <malloc.h>
#endif
#include <ostream>

#include "navlab/errors.hpp"
#include "navlab/policy.hpp"

namespace navlab {

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kActionStream = 1;
constexpr std::uint64_t kUpdateStream = 2;
constexpr std::uint64_t kEpisodeStream = 1000;

const char* kUpdatesHeaderPpo = "update,env_steps,policy_loss,value_loss,entropy,approx_kl,clip_fraction,mean_ratio";
const char* kUpdatesHeaderDdpg = "update,env_steps,critic_loss,actor_loss,mean_q";

nn::Index hidden_width_of(const TensorArchive& archive) {
  if (archive.has("actor.block0.expand.weight")) return archive.get("actor.block0.expand.weight").rows();
  if (archive.has("actor.hidden0.weight")) return archive.get("actor.hidden0.weight").rows();
  throw ConfigError("checkpoint has no recognizable actor network");
}

std::string row(std::initializer_list<double> values, long long a, long long b) {
  std::string s = std::to_string(a) + "," + std::to_string(b);
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, ",%.9g", v);
    s += buf;
  }
  return s;
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

struct Outputs {
  std::optional<MetricsWriter> metrics;
  std::ofstream updates;
  std::filesystem::path checkpoint;
  std::ostream* progress = nullptr;

  Outputs(const RunConfig& cfg, std::ostream* log) : progress(log) {
    if (cfg.output_dir.empty()) return;
    std::filesystem::create_directories(cfg.output_dir);
    {
      std::ofstream meta(cfg.output_dir / "run.meta", std::ios::binary | std::ios::trunc);
      meta << "# navlab run, " << (cfg.wall_clock ? "wall-clock timings (not byte-reproducible)" : "deterministic")
           << '\n'
           << describe(cfg);
    }
    metrics.emplace(cfg.output_dir / "metrics.csv");
    updates.open(cfg.output_dir / "updates.csv", std::ios::binary | std::ios::trunc);
    updates << (cfg.algo == Algo::Ddpg ? kUpdatesHeaderDdpg : kUpdatesHeaderPpo) << '\n';
    checkpoint = cfg.output_dir / "checkpoint.bin";
  }

  bool enabled() const { return metrics.has_value(); }
};

void log_progress(std::ostream* progress, const RunConfig& cfg, const std::vector<EpisodeRecord>& eps) {
  if (!progress || eps.size() % 10 != 0) return;
  const auto n = std::min<std::size_t>(eps.size(), 50);
  *progress << to_string(cfg.algo) << " seed " << cfg.seed << " episode " << eps.size() << "/" << cfg.episodes
            << " last reward " << eps.back().cum_reward << " success(last " << n
            << ") " << success_percent(eps, n) << "%\n";
  progress->flush();
}

void train_ppo(const RunConfig& cfg, TrainResult& result, Outputs& out) {
  NavigationEnv env(cfg.env);
  std::mt19937_64 action_rng(derive_seed(cfg.seed, kActionStream));
  std::mt19937_64 update_rng(derive_seed(cfg.seed, kUpdateStream));
  PpoLearner& learner = result.agent.ppo;
  TrajectoryBuffer buffer;
  const PpoConfig& pc = cfg.ppo;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Stopwatch watch(cfg.wall_clock);
    Observation obs = env.reset(derive_seed(cfg.seed, kEpisodeStream + static_cast<std::uint64_t>(ep)));
    EpisodeRecord rec;
    rec.episode = ep;
    while (true) {
      const ObsVector ov = to_vector(obs);
      const ActionSample a = select_action(learner.actor, ov, ActionMode::Stochastic, action_rng);
      const double value = nn::critic_forward(learner.critic, ov);
      const StepResult res = env.step(to_normalized(a.action));
      ++result.env_steps;
      rec.cum_reward += res.reward;
      rec.steps = env.steps();
      if (res.arrived) ++rec.arrivals;

      Transition t;
      t.obs = ov;
      t.action = a.action;
      t.sample = a.sample;
      t.log_prob = a.log_prob;
      t.reward = res.reward;
      t.next_obs = to_vector(res.observation);
      t.done = res.done;
      t.value = value;
      // Timeouts truncate rather than terminate: fold V(s') into the reward.
      if (res.event == StepEvent::Timeout) t.reward += pc.gamma * nn::critic_forward(learner.critic, t.next_obs);
      buffer.push(t);

      if (static_cast<int>(buffer.size()) >= pc.rollout_length) {
        const double bootstrap = res.done ? 0.0 : nn::critic_forward(learner.critic, t.next_obs);
        buffer.finalize(pc.gamma, pc.lambda, bootstrap);
        const PpoStats s = ppo_update(learner, buffer, pc, update_rng);
        buffer.clear();
        ++result.updates;
        if (out.enabled()) {
          out.updates << row({s.policy_loss, s.value_loss, s.entropy, s.approx_kl, s.clip_fraction, s.mean_ratio},
                             result.updates, result.env_steps)
                      << '\n';
          out.updates.flush();
        }
      }
      if (res.done) {
        rec.event = res.event;
        break;
      }
      obs = res.observation;
    }
    rec.wall_ms = watch.ms();
    result.episodes.push_back(rec);
    if (out.enabled()) {
      out.metrics->append(rec);
      if ((ep + 1) % cfg.checkpoint_every == 0) save_agent(result.agent, out.checkpoint);
    }
    log_progress(out.progress, cfg, result.episodes);
  }
}

void train_ddpg(const RunConfig& cfg, TrainResult& result, Outputs& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NavigationEnv env(cfg.env);
  std::mt19937_64 action_rng(derive_seed(cfg.seed, kActionStream));
  std::mt19937_64 update_rng(derive_seed(cfg.seed, kUpdateStream));
  DdpgLearner& learner = result.agent.ddpg;
  const DdpgConfig& dc = cfg.ddpg;
  ReplayBuffer replay(static_cast<std::size_t>(dc.capacity));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Stopwatch watch(cfg.wall_clock);
    Observation obs = env.reset(derive_seed(cfg.seed, kEpisodeStream + static_cast<std::uint64_t>(ep)));
    EpisodeRecord rec;
    rec.episode = ep;
    DdpgStats sum;
    int updates = 0;
    while (true) {
      const ObsVector ov = to_vector(obs);
      // Until the replay buffer holds `warmup` transitions, actions are uniform over the box.
      ActionSample a;
      if (static_cast<int>(replay.size()) < dc.warmup) {
        a.action = {unit(action_rng), 2.0 * unit(action_rng) - 1.0};
      } else {
        a = select_action(learner.actor, ov, ActionMode::DdpgExplore, action_rng, dc.noise_std);
      }
      const StepResult res = env.step(to_normalized(a.action));
      ++result.env_steps;
      rec.cum_reward += res.reward;
      rec.steps = env.steps();
      if (res.arrived) ++rec.arrivals;

      Transition t;
      t.obs = ov;
      t.action = a.action;
      t.sample = a.action;
      t.reward = res.reward;
      t.next_obs = to_vector(res.observation);
      // Only collisions are terminal; a timeout still bootstraps from s'.
      t.done = res.event == StepEvent::Collided;
      replay.push(t);

      if (static_cast<int>(replay.size()) >= dc.warmup) {
        const DdpgStats s = ddpg_update(learner, replay, dc, update_rng);
        sum.critic_loss += s.critic_loss;
        sum.actor_loss += s.actor_loss;
        sum.mean_q += s.mean_q;
        ++updates;
        ++result.updates;
      }
      if (res.done) {
        rec.event = res.event;
        break;
      }
      obs = res.observation;
    }
    rec.wall_ms = watch.ms();
    result.episodes.push_back(rec);
    if (out.enabled()) {
      out.metrics->append(rec);
      if (updates > 0) {
        const double n = updates;
        out.updates << row({sum.critic_loss / n, sum.actor_loss / n, sum.mean_q / n}, result.updates, result.env_steps)
                    << '\n';
        out.updates.flush();
      }
      if ((ep + 1) % cfg.checkpoint_every == 0) save_agent(result.agent, out.checkpoint);
    }
    log_progress(out.progress, cfg, result.episodes);
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Agent make_agent(const RunConfig& cfg, std::mt19937_64& rng) {
  Agent agent;
  agent.algo = cfg.algo;
  if (cfg.algo == Algo::Ddpg) {
    agent.ddpg = make_ddpg_learner(nn::BodyKind::ResConcat, cfg.hidden_width, cfg.ddpg, rng);
  } else {
    agent.ppo = make_ppo_learner(body_for(cfg.algo), cfg.hidden_width, cfg.ppo, rng);
  }
  return agent;
}

TensorArchive agent_archive(const Agent& agent) {
  TensorArchive archive;
  archive.arch = to_string(agent.algo);
  if (agent.algo == Algo::Ddpg) {
    const DdpgLearner& l = agent.ddpg;
    store_tensors(archive, nn::tensors(l.actor, "actor."));
    store_tensors(archive, nn::tensors(l.critic, "critic."));
    store_tensors(archive, nn::tensors(l.target_actor, "target_actor."));
    store_tensors(archive, nn::tensors(l.target_critic, "target_critic."));
    store_adam(archive, "actor_opt.", l.actor_opt);
    store_adam(archive, "critic_opt.", l.critic_opt);
  } else {
    const PpoLearner& l = agent.ppo;
    store_tensors(archive, nn::tensors(l.actor, "actor."));
    store_tensors(archive, nn::tensors(l.critic, "critic."));
    store_adam(archive, "actor_opt.", l.actor_opt);
    store_adam(archive, "critic_opt.", l.critic_opt);
  }
  return archive;
}

Agent agent_from_archive(const TensorArchive& archive) {
  RunConfig cfg;
  cfg.algo = parse_algo(archive.arch);
  cfg.hidden_width = hidden_width_of(archive);
  std::mt19937_64 rng(0);
  Agent agent = make_agent(cfg, rng);
  if (agent.algo == Algo::Ddpg) {
    DdpgLearner& l = agent.ddpg;
    restore_tensors(archive, nn::tensors(l.actor, "actor."));
    restore_tensors(archive, nn::tensors(l.critic, "critic."));
    restore_tensors(archive, nn::tensors(l.target_actor, "target_actor."));
    restore_tensors(archive, nn::tensors(l.target_critic, "target_critic."));
    restore_adam(archive, "actor_opt.", l.actor_opt);
    restore_adam(archive, "critic_opt.", l.critic_opt);
  } else {
    PpoLearner& l = agent.ppo;
    restore_tensors(archive, nn::tensors(l.actor, "actor."));
    restore_tensors(archive, nn::tensors(l.critic, "critic."));
    restore_adam(archive, "actor_opt.", l.actor_opt);
    restore_adam(archive, "critic_opt.", l.critic_opt);
  }
  return agent;
}

void save_agent(const Agent& agent, const std::filesystem::path& path) { save_archive(agent_archive(agent), path); }

Agent load_agent(const std::filesystem::path& path, std::optional<Algo> expected) {
  const TensorArchive archive = load_archive(path);
  if (expected && archive.arch != to_string(*expected)) {
    throw ConfigError("checkpoint architecture '" + archive.arch + "' does not match requested '" +
                      to_string(*expected) + "'");
  }
  return agent_from_archive(archive);
}

TrainResult train(const RunConfig& cfg, std::ostream* progress) {
  cfg.validate();
  TrainResult result;
  std::mt19937_64 init_rng(derive_seed(cfg.seed, kInitStream));
  result.agent = make_agent(cfg, init_rng);
  Outputs out(cfg, progress);

  RunConfig run = cfg;
  run.env.seed = cfg.seed;
  if (cfg.algo == Algo::Ddpg) {
    train_ddpg(run, result, out);
  } else {
    train_ppo(run, result, out);
  }
  if (out.enabled()) save_agent(result.agent, out.checkpoint);
  return result;
}

std::vector<EpisodeRecord> evaluate(const Agent& agent, const EnvConfig& env_cfg, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("eval: episodes must be at least 1");
  NavigationEnv env(env_cfg);
  std::mt19937_64 rng(derive_seed(seed, kActionStream));
  std::vector<EpisodeRecord> out;
  for (int ep = 0; ep < episodes; ++ep) {
    Observation obs = env.reset(derive_seed(seed, kEpisodeStream + static_cast<std::uint64_t>(ep)));
    EpisodeRecord rec;
    rec.episode = ep;
    while (true) {
      const ActionSample a = select_action(agent.actor(), to_vector(obs), ActionMode::Deterministic, rng);
      const StepResult res = env.step(to_normalized(a.action));
      rec.cum_reward += res.reward;
      rec.steps = env.steps();
      if (res.arrived) ++rec.arrivals;
      if (res.done) {
        rec.event = res.event;
        break;
      }
      obs = res.observation;
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<RunReport> collect_reports(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) throw ConfigError("compare: no run directories given");
  std::vector<RunReport> reports;
  for (const auto& dir : run_dirs) {
    const auto csv = dir / "metrics.csv";
    if (!std::filesystem::exists(csv)) throw ConfigError("compare: " + dir.string() + " holds no metrics.csv");
    RunConfig cfg;
    const auto meta = dir / "run.meta";
    if (std::filesystem::exists(meta)) apply_config_file(cfg, meta);
    const auto records = read_metrics(csv);
    if (records.empty()) throw ConfigError("compare: " + csv.string() + " has no episodes");
    std::string name = dir.filename().string();
    if (name.empty()) name = dir.parent_path().filename().string();
    reports.push_back(aggregate(records, name, cfg.step_budget));
  }
  return reports;
}

void configure_allocator() {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

std::filesystem::path default_output_root() {
  if (const char* root = std::getenv("NAVLAB_OUTPUT_ROOT"); root && *root) return root;
  return "runs";
}

std::filesystem::path default_run_dir(const RunConfig& cfg) {
  return default_output_root() / (std::string(to_string(cfg.algo)) + "_" + cfg.world_path.stem().string() + "_" +
                                  to_string(cfg.env.reward) + "_s" + std::to_string(cfg.seed));
}

}  // namespace navlab
