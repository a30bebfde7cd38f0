#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "navlab/buffers.hpp"
#include "navlab/config.hpp"
#include "navlab/errors.hpp"
#include "navlab/harness.hpp"
#include "navlab/metrics.hpp"
#include "navlab/plot.hpp"
#include "navlab/policy.hpp"
#include "navlab/world_io.hpp"
#include "navlab/worlds.hpp"

using namespace navlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("navlab_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

RunConfig small_run(Algo algo, int episodes) {
  RunConfig cfg;
  cfg.algo = algo;
  cfg.episodes = episodes;
  cfg.hidden_width = 32;
  cfg.ppo.rollout_length = 256;
  cfg.ppo.minibatch = 64;
  cfg.ppo.epochs = 2;
  cfg.ddpg.warmup = 100;
  cfg.ddpg.batch = 32;
  cfg.env.max_steps = 200;
  load_world(cfg);
  return cfg;
}

// Polyline points for the given class, as (x, y) pairs.
std::vector<std::pair<double, double>> points_of(const std::string& svg, const std::string& cls) {
  const std::regex re("<polyline class=\"" + cls + "\"[^>]*points=\"([^\"]*)\"");
  std::smatch m;
  std::vector<std::pair<double, double>> out;
  if (!std::regex_search(svg, m, re)) return out;
  std::istringstream is(m[1].str());
  std::string pair;
  while (is >> pair) {
    const auto comma = pair.find(',');
    out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  return out;
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// World files

TEST(WorldIo, BoundsOnlyIsRejected) {
  EXPECT_THROW(parse_world_text("BOUNDS -5 -5 5 5\n"), ConfigError);
}

TEST(WorldIo, UnknownDirectiveNamesLine) {
  try {
    parse_world_text("BOUNDS -5 -5 5 5\nSPAWN 0 0 0\nTARGET_REGION -4 -4 4 4\nBOX 1 2 3\n", "w");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
}

TEST(WorldIo, MalformedNumberIsRejected) {
  EXPECT_THROW(parse_world_text("BOUNDS -5 -5 5 five\nSPAWN 0 0 0\nTARGET_REGION -4 -4 4 4\n"), ConfigError);
}

TEST(WorldIo, SerializeRoundTrips) {
  for (const World& w : {simple_arena(), complex_arena(), random_arena(3, 4)}) {
    EXPECT_EQ(parse_world_text(serialize_world(w)), w);
  }
}

// ---------------------------------------------------------------------------
// Config

TEST(Config, TextAndOverrideOrder) {
  RunConfig cfg;
  apply_config_text(cfg, "# comment\nppo.clip = 0.3\nrun.seed = 7\n\nrun.algo = ppo_mlp\n");
  apply_setting(cfg, "run.seed", "9");
  EXPECT_DOUBLE_EQ(cfg.ppo.clip, 0.3);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.algo, Algo::PpoMlp);
}

TEST(Config, UnknownKeyAndBadValueThrow) {
  RunConfig cfg;
  EXPECT_THROW(apply_setting(cfg, "ppo.clipp", "0.2"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "ppo.clip", "abc"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "run.algo", "sac"), ConfigError);
  EXPECT_THROW(apply_config_text(cfg, "no equals sign\n"), ConfigError);
}

TEST(Config, DescribeRoundTrips) {
  RunConfig cfg;
  apply_config_text(cfg, "ddpg.tau = 0.01\nreward.c_r = 0.123456789012345\nrun.reward = advanced\nnn.hidden = 64\n");
  RunConfig back;
  apply_config_text(back, describe(cfg));
  EXPECT_EQ(describe(back), describe(cfg));
  EXPECT_EQ(back.env.rewards.c_r, cfg.env.rewards.c_r);
}

TEST(Config, DefaultsValidate) {
  RunConfig cfg;
  load_world(cfg);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.env.world, simple_arena());
}

// ---------------------------------------------------------------------------
// Metrics

TEST(Metrics, FormatAndParseAgree) {
  const EpisodeRecord r{4, -1.25, 312, 2, StepEvent::Collided, 0.0};
  EXPECT_EQ(format_record(r), "4,-1.250000,312,2,collided,0.000");
  const auto back = parse_metrics_text(std::string(kMetricsHeader) + "\n" + format_record(r) + "\n");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].steps, 312);
  EXPECT_EQ(back[0].event, StepEvent::Collided);
}

TEST(Metrics, RejectsBadHeaderAndShortRows) {
  EXPECT_THROW(parse_metrics_text("episode,reward\n"), ConfigError);
  EXPECT_THROW(parse_metrics_text(std::string(kMetricsHeader) + "\n1,2,3\n"), ConfigError);
}

TEST(Metrics, SuccessNeedsArrivalWithoutCollision) {
  EXPECT_TRUE(is_success({0, 0, 500, 1, StepEvent::Timeout, 0}));
  EXPECT_FALSE(is_success({0, 0, 500, 0, StepEvent::Timeout, 0}));
  EXPECT_FALSE(is_success({0, 0, 90, 3, StepEvent::Collided, 0}));
}

// Two synthetic runs with every aggregate worked out by hand.
TEST(Compare, MatchesHandComputedTable) {
  const fs::path root = scratch("compare");
  fs::create_directories(root / "alpha");
  fs::create_directories(root / "beta");
  const std::string h = std::string(kMetricsHeader) + "\n";
  write(root / "alpha" / "metrics.csv",
        h + "0,1.5,100,1,timeout,0\n1,-2.0,50,0,collided,0\n2,3.25,200,2,collided,0\n");
  write(root / "beta" / "metrics.csv", h + "0,10,500,3,timeout,0\n1,5,400,1,timeout,0\n");
  write(root / "alpha" / "run.meta", "run.step_budget = 150\n");
  write(root / "beta" / "run.meta", "run.step_budget = 150\n");

  const auto reports = collect_reports({root / "alpha", root / "beta"});
  EXPECT_EQ(markdown_table(reports),
            "| Run | Avg. Reward | Episodes | Success % | Avg. Steps/Ep | Episodes within budget |\n"
            "|---|---:|---:|---:|---:|---:|\n"
            "| beta | 7.50 | 2 | 100.00 | 450.00 | 0 (150 steps) |\n"
            "| alpha | 0.92 | 3 | 33.33 | 116.67 | 2 (150 steps) |\n");
}

TEST(Compare, SingleRunGivesOneRow) {
  const fs::path root = scratch("compare_one");
  write(root / "metrics.csv", std::string(kMetricsHeader) + "\n0,1,10,1,timeout,0\n");
  const std::string table = markdown_table(collect_reports({root}));
  EXPECT_EQ(count(table, "\n"), 3);
}

TEST(Compare, EmptyOrMissingRunsAreErrors) {
  const fs::path root = scratch("compare_empty");
  EXPECT_THROW(collect_reports({}), ConfigError);
  EXPECT_THROW(collect_reports({root}), ConfigError);
  write(root / "metrics.csv", std::string(kMetricsHeader) + "\n");
  EXPECT_THROW(collect_reports({root}), ConfigError);
}

// ---------------------------------------------------------------------------
// Plot

TEST(Plot, MovingAverageOfRamp) {
  const std::vector<double> ramp{0, 1, 2, 3, 4, 5};
  const auto avg = moving_average(ramp, 3);
  const std::vector<double> expected{0, 0.5, 1, 2, 3, 4};
  EXPECT_EQ(avg, expected);
}

TEST(Plot, TwoRowsGiveOneCurve) {
  const std::vector<EpisodeRecord> rows{{0, 1, 10, 0, StepEvent::Timeout, 0}, {1, 2, 10, 0, StepEvent::Timeout, 0}};
  const std::string svg = learning_curve_svg(rows);
  EXPECT_EQ(count(svg, "<polyline"), 1);
  EXPECT_EQ(points_of(svg, "reward").size(), 2u);
}

TEST(Plot, ConstantRewardIsHorizontal) {
  std::vector<EpisodeRecord> rows;
  for (int i = 0; i < 20; ++i) rows.push_back({i, 3.0, 10, 0, StepEvent::Timeout, 0});
  const std::string svg = learning_curve_svg(rows);
  EXPECT_EQ(count(svg, "<polyline"), 2);
  const auto pts = points_of(svg, "reward");
  ASSERT_EQ(pts.size(), 20u);
  for (const auto& p : pts) EXPECT_EQ(p.second, pts[0].second);
}

TEST(Plot, SingleRowIsRejected) {
  const std::vector<EpisodeRecord> rows{{0, 1, 10, 0, StepEvent::Timeout, 0}};
  EXPECT_THROW(learning_curve_svg(rows), ConfigError);
}

// ---------------------------------------------------------------------------
// Training runs

TEST(Train, SameSeedGivesByteIdenticalOutputs) {
  for (Algo algo : {Algo::PpoRes, Algo::Ddpg}) {
    RunConfig cfg = small_run(algo, 4);
    const fs::path dir_a = scratch(std::string("det_a_") + to_string(algo));
    const fs::path dir_b = scratch(std::string("det_b_") + to_string(algo));
    cfg.output_dir = dir_a;
    const TrainResult a = train(cfg);
    cfg.output_dir = dir_b;
    train(cfg);
    EXPECT_GT(a.updates, 0) << to_string(algo);
    for (const char* f : {"metrics.csv", "updates.csv", "checkpoint.bin"}) {
      EXPECT_EQ(slurp(dir_a / f), slurp(dir_b / f)) << to_string(algo) << " " << f;
    }
    EXPECT_EQ(read_metrics(dir_a / "metrics.csv").size(), 4u);
  }
}

TEST(Train, DifferentSeedsDiverge) {
  RunConfig cfg = small_run(Algo::PpoRes, 2);
  const auto a = train(cfg);
  cfg.seed = 2;
  const auto b = train(cfg);
  EXPECT_NE(format_record(a.episodes[0]), format_record(b.episodes[0]));
}

TEST(Checkpoint, ReloadedAgentReplaysActions) {
  for (Algo algo : {Algo::PpoRes, Algo::PpoMlp, Algo::Ddpg}) {
    RunConfig cfg = small_run(algo, 2);
    const TrainResult run = train(cfg);
    const fs::path file = scratch("ckpt") / "agent.bin";
    save_agent(run.agent, file);
    const Agent back = load_agent(file, algo);

    NavigationEnv env(cfg.env);
    std::mt19937_64 rng_a(5), rng_b(5);
    Observation obs = env.reset(11);
    for (int i = 0; i < 100 && !env.done(); ++i) {
      const ObsVector ov = to_vector(obs);
      const auto x = select_action(run.agent.actor(), ov, ActionMode::Stochastic, rng_a);
      const auto y = select_action(back.actor(), ov, ActionMode::Stochastic, rng_b);
      ASSERT_EQ(x.action, y.action) << to_string(algo) << " step " << i;
      obs = env.step(to_normalized(x.action)).observation;
    }
    EXPECT_EQ(agent_archive(back).entries.size(), agent_archive(run.agent).entries.size());
  }
}

TEST(Checkpoint, ArchitectureMismatchIsRefused) {
  RunConfig cfg = small_run(Algo::PpoRes, 1);
  std::mt19937_64 rng(1);
  const fs::path file = scratch("ckpt_arch") / "agent.bin";
  save_agent(make_agent(cfg, rng), file);
  EXPECT_THROW(load_agent(file, Algo::PpoMlp), ConfigError);
  EXPECT_THROW(load_agent(file, Algo::Ddpg), ConfigError);
  EXPECT_NO_THROW(load_agent(file, Algo::PpoRes));
}

// With every parameter zero the mean action is sigmoid(0), tanh(0) = (0.5, 0),
// so the robot drives straight ahead at half speed.
TEST(Eval, ZeroPolicyDrivesStraightAtHalfSpeed) {
  RunConfig cfg = small_run(Algo::PpoRes, 1);
  cfg.env.max_steps = 500;
  std::mt19937_64 rng(1);
  Agent agent = make_agent(cfg, rng);
  for (auto& t : nn::tensors(agent.ppo.actor)) t.map().setZero();
  const fs::path file = scratch("zero") / "agent.bin";
  save_agent(agent, file);
  const Agent back = load_agent(file);

  NavigationEnv env(cfg.env);
  const Observation obs = env.reset(3);
  const auto a = select_action(back.actor(), to_vector(obs), ActionMode::Deterministic, rng);
  EXPECT_EQ(a.action, Eigen::Vector2d(0.5, 0.0));
  const TwistCommand cmd = TwistCommand::from_normalized(to_normalized(a.action));
  EXPECT_EQ(cmd.linear(), 0.125);
  EXPECT_EQ(cmd.angular(), 0.0);
  env.step(to_normalized(a.action));
  EXPECT_DOUBLE_EQ(env.pose().position.x, 0.0125);
  EXPECT_EQ(env.pose().position.y, 0.0);

  const auto records = evaluate(back, cfg.env, 2, 3);
  ASSERT_EQ(records.size(), 2u);
  // Straight ahead from the center reaches the east wall within 500 steps of 0.0125 m.
  for (const auto& r : records) {
    if (r.arrivals == 0) {
      EXPECT_EQ(r.event, StepEvent::Collided);
    }
  }
}

TEST(Eval, ZeroEpisodesIsAnError) {
  RunConfig cfg = small_run(Algo::PpoRes, 1);
  std::mt19937_64 rng(1);
  EXPECT_THROW(evaluate(make_agent(cfg, rng), cfg.env, 0, 1), ConfigError);
}

TEST(Eval, IsDeterministic) {
  RunConfig cfg = small_run(Algo::Ddpg, 1);
  std::mt19937_64 rng(4);
  const Agent agent = make_agent(cfg, rng);
  const auto a = evaluate(agent, cfg.env, 3, 8);
  const auto b = evaluate(agent, cfg.env, 3, 8);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(format_record(a[i]), format_record(b[i]));
}

TEST(RunDir, NameAndRootOverride) {
  RunConfig cfg;
  cfg.algo = Algo::Ddpg;
  cfg.world_path = "complex.world";
  cfg.env.reward = RewardKind::Advanced;
  cfg.seed = 3;
  ::setenv("NAVLAB_OUTPUT_ROOT", "/tmp/elsewhere", 1);
  EXPECT_EQ(default_run_dir(cfg), fs::path("/tmp/elsewhere/ddpg_complex_advanced_s3"));
  ::unsetenv("NAVLAB_OUTPUT_ROOT");
  EXPECT_EQ(default_run_dir(cfg), fs::path("runs/ddpg_complex_advanced_s3"));
}
