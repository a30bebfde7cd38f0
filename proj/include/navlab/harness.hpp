#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "navlab/checkpoint.hpp"
#include "navlab/config.hpp"
#include "navlab/ddpg.hpp"
#include "navlab/metrics.hpp"
#include "navlab/ppo.hpp"

namespace navlab {

/// Independent stream seed derived from a run seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Learner state for any algorithm. Only the member matching `algo` is populated.
struct Agent {
  Algo algo = Algo::PpoRes;
  PpoLearner ppo;
  DdpgLearner ddpg;

  const nn::ActorParams& actor() const { return algo == Algo::Ddpg ? ddpg.actor : ppo.actor; }
};

Agent make_agent(const RunConfig& cfg, std::mt19937_64& rng);

/// Architecture tag is the algorithm name; every network and optimizer tensor is stored.
TensorArchive agent_archive(const Agent& agent);
Agent agent_from_archive(const TensorArchive& archive);

void save_agent(const Agent& agent, const std::filesystem::path& path);
/// Throws ConfigError when `expected` is given and the stored tag differs.
Agent load_agent(const std::filesystem::path& path, std::optional<Algo> expected = std::nullopt);

struct TrainResult {
  Agent agent;
  std::vector<EpisodeRecord> episodes;
  long long env_steps = 0;
  int updates = 0;
};

/// Runs the episode loop. cfg.env.world must already be loaded. When
/// cfg.output_dir is non-empty, writes metrics.csv, updates.csv, run.meta
/// and checkpoint.bin there. `progress` receives a line every 10 episodes.
TrainResult train(const RunConfig& cfg, std::ostream* progress = nullptr);

/// Deterministic-policy episodes without learning. Requires episodes >= 1.
std::vector<EpisodeRecord> evaluate(const Agent& agent, const EnvConfig& env, int episodes, std::uint64_t seed);

/// Aggregates completed run directories (each holding metrics.csv).
std::vector<RunReport> collect_reports(const std::vector<std::filesystem::path>& run_dirs);

/// Keeps large matrix temporaries in the heap instead of fresh mmap'd pages
/// (glibc only; a no-op elsewhere). Training is several times faster with
/// it. Call once at program start.
void configure_allocator();

/// Default output root: $NAVLAB_OUTPUT_ROOT, else "runs".
std::filesystem::path default_output_root();
std::filesystem::path default_run_dir(const RunConfig& cfg);

}  // namespace navlab
