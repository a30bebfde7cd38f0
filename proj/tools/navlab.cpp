// navlab command-line front end: train, eval, compare, plot, world check.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "navlab/config.hpp"
#include "navlab/errors.hpp"
#include "navlab/harness.hpp"
#include "navlab/plot.hpp"
#include "navlab/world_io.hpp"
#include "navlab/worlds.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::string> algo;
  std::optional<std::string> world;
  std::optional<std::string> reward;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<std::string> output;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--algo", f.algo, "ppo_res, ppo_mlp or ddpg");
  cmd->add_option("--world", f.world, "world file (bundled: simple.world, complex.world)");
  cmd->add_option("--reward", f.reward, "basic or advanced");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--episodes", f.episodes, "episode count");
  cmd->add_option("--set", f.sets, "extra key=value override (repeatable)");
}

// File values first, then explicit flags.
navlab::RunConfig build_config(const CommonFlags& f) {
  navlab::RunConfig cfg;
  if (!f.config.empty()) navlab::apply_config_file(cfg, f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw navlab::ConfigError("--set expects key=value, got '" + kv + "'");
    navlab::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.algo) navlab::apply_setting(cfg, "run.algo", *f.algo);
  if (f.world) navlab::apply_setting(cfg, "run.world", *f.world);
  if (f.reward) navlab::apply_setting(cfg, "run.reward", *f.reward);
  if (f.seed) cfg.seed = *f.seed;
  if (f.episodes) cfg.episodes = *f.episodes;
  if (f.output) cfg.output_dir = *f.output;
  navlab::load_world(cfg);
  return cfg;
}

int run_train(const CommonFlags& f) {
  navlab::RunConfig cfg = build_config(f);
  if (cfg.output_dir.empty()) cfg.output_dir = navlab::default_run_dir(cfg);
  const auto result = navlab::train(cfg, &std::cerr);
  const auto report = navlab::aggregate(result.episodes, cfg.output_dir.filename().string(), cfg.step_budget);
  std::cout << navlab::markdown_table({report});
  std::cout << "final-50 success %: " << navlab::success_percent(result.episodes, 50) << "\n";
  std::cout << "output: " << cfg.output_dir.string() << "\n";
  return 0;
}

int run_eval(const CommonFlags& f, const std::string& checkpoint, const std::string& csv) {
  navlab::RunConfig cfg = build_config(f);
  std::optional<navlab::Algo> expected;
  if (f.algo) expected = cfg.algo;
  const navlab::Agent agent = navlab::load_agent(checkpoint, expected);
  cfg.env.seed = cfg.seed;
  const auto records = navlab::evaluate(agent, cfg.env, cfg.episodes, cfg.seed);
  if (!csv.empty()) {
    navlab::MetricsWriter writer(csv);
    for (const auto& r : records) writer.append(r);
  }
  std::cout << navlab::markdown_table({navlab::aggregate(records, "eval", cfg.step_budget)});
  return 0;
}

int run_world_check(const std::string& path) {
  const navlab::World world = navlab::parse_world(navlab::resolve_world_path(path));
  const auto report = navlab::check_world(world);
  std::cout << path << ": " << world.obstacles.size() << " obstacles, " << report.reachable_cells << "/"
            << report.free_cells << " free cells reachable\n";
  for (const auto& p : report.problems) std::cout << "  problem: " << p << "\n";
  std::cout << (report.ok ? "ok" : "FAILED") << "\n";
  return report.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  navlab::configure_allocator();
  CLI::App app{"navlab: 2D mapless navigation training lab"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  auto* train = app.add_subcommand("train", "train an agent and write metrics/checkpoints");
  add_common(train, train_flags);
  train->add_option("--output", train_flags.output, "run directory (default: $NAVLAB_OUTPUT_ROOT/<run name>)");

  CommonFlags eval_flags;
  std::string checkpoint;
  std::string eval_csv;
  auto* eval = app.add_subcommand("eval", "run the deterministic policy from a checkpoint");
  add_common(eval, eval_flags);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--csv", eval_csv, "per-episode metrics output");

  std::vector<std::string> run_dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "markdown table over run directories");
  compare->add_option("runs", run_dirs, "run directories")->required();
  compare->add_option("--output", compare_out, "write the table to a file");

  std::string plot_csv;
  std::string plot_out;
  int plot_window = navlab::kDefaultSmoothingWindow;
  auto* plot = app.add_subcommand("plot", "SVG learning curve from a metrics CSV");
  plot->add_option("metrics", plot_csv, "metrics.csv")->required();
  plot->add_option("--output", plot_out, "SVG path")->required();
  plot->add_option("--window", plot_window, "moving-average window (0 disables)");

  std::string world_path;
  auto* world = app.add_subcommand("world", "world file utilities");
  world->require_subcommand(1);
  auto* check = world->add_subcommand("check", "validate a world file");
  check->add_option("path", world_path, "world file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return run_train(train_flags);
    if (*eval) return run_eval(eval_flags, checkpoint, eval_csv);
    if (*compare) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      const std::string table = navlab::markdown_table(navlab::collect_reports(dirs));
      if (compare_out.empty()) {
        std::cout << table;
      } else {
        std::ofstream(compare_out, std::ios::binary | std::ios::trunc) << table;
      }
      return 0;
    }
    if (*plot) {
      navlab::emit_learning_curve(plot_csv, plot_out, plot_window);
      return 0;
    }
    if (*check) return run_world_check(world_path);
  } catch (const navlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const navlab::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const navlab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
