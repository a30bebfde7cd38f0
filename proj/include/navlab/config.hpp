#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "navlab/ddpg.hpp"
#include "navlab/environment.hpp"
#include "navlab/nn.hpp"
#include "navlab/ppo.hpp"

namespace navlab {

enum class Algo { PpoRes, PpoMlp, Ddpg };

const char* to_string(Algo algo);
Algo parse_algo(std::string_view text);
nn::BodyKind body_for(Algo algo);

/// Everything that determines a training run. `env.world` is loaded from
/// `world_path` by load_world().
struct RunConfig {
  Algo algo = Algo::PpoRes;
  std::filesystem::path world_path = "simple.world";
  std::uint64_t seed = 1;
  int episodes = 300;
  std::filesystem::path output_dir;
  int checkpoint_every = 25;
  /// Episodes completed within this many environment steps are reported
  /// alongside the total episode count.
  int step_budget = 50000;
  /// Records real elapsed milliseconds per episode; output is then no
  /// longer byte-reproducible.
  bool wall_clock = false;
  nn::Index hidden_width = nn::kDefaultHidden;
  /// Default min_target_clearance applied to the loaded world.
  double target_clearance = 0.6;

  EnvConfig env;
  PpoConfig ppo;
  DdpgConfig ddpg;

  void validate() const;
};

/// Applies one dotted `key = value` setting, e.g. "ppo.clip" = "0.2".
/// Unknown keys and malformed values throw ConfigError.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Line-oriented `key = value` text with '#' comments.
void apply_config_text(RunConfig& cfg, std::string_view text, std::string_view source = "<config>");
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Serializes every setting as `key = value` lines; re-applying the text to a
/// default RunConfig reproduces `cfg`.
std::string describe(const RunConfig& cfg);

/// Resolves a world path: as given if it exists, otherwise relative to the
/// bundled data directory.
std::filesystem::path resolve_world_path(const std::filesystem::path& path);

/// Parses the world file into cfg.env.world and applies target_clearance.
void load_world(RunConfig& cfg);

}  // namespace navlab
