// Acceptance suite: one PASS/FAIL line per criterion. Exact property checks
// run first, then the training-trend reproductions (these take a while on
// a single core; see README for timings).
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "navlab/buffers.hpp"
#include "navlab/config.hpp"
#include "navlab/environment.hpp"
#include "navlab/harness.hpp"
#include "navlab/metrics.hpp"
#include "navlab/policy.hpp"
#include "navlab/ppo.hpp"
#include "navlab/worlds.hpp"
#include "oracles.hpp"
#include "reward_cases.hpp"

using namespace navlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path runs_dir = "acceptance_runs";
  std::string cli;
  std::set<int> only;
  bool reuse = false;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// --- 1 -------------------------------------------------------------------

Outcome gradients() {
  double worst = 0.0;
  long checked = 0, skipped = 0;
  for (auto body : {nn::BodyKind::ResConcat, nn::BodyKind::Mlp}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (const auto& r : {gradcheck::ppo(body, 1000 + seed, 32), gradcheck::ddpg(body, 2000 + seed, 32)}) {
        worst = std::max(worst, r.max_rel_error());
        checked += r.checked();
        skipped += r.skipped();
      }
    }
  }
  return {worst <= 1e-4, "max rel error " + fmt("%.2e", worst) + " over " + std::to_string(checked) +
                             " coordinates (" + std::to_string(skipped) + " kink-straddling skipped)"};
}

// --- 2 -------------------------------------------------------------------

Outcome geometry() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> pos(-4.0, 4.0), ang(-std::numbers::pi, std::numbers::pi);
  double worst_ray = 0.0;
  int scenes = 0;
  while (scenes < 100) {
    const World w = oracle::random_scene(rng);
    const Vec2 o{pos(rng), pos(rng)};
    if (clearance(o, w) < 1e-3) continue;
    const double a = ang(rng);
    const Vec2 d{std::cos(a), std::sin(a)};
    worst_ray = std::max(worst_ray, std::abs(ray_cast(o, d, w, 3.5) - oracle::ray_march(o, d, w, 3.5)));
    ++scenes;
  }
  std::uniform_real_distribution<double> wide(-5.2, 5.2);
  int disagreements = 0;
  for (int scene = 0; scene < 10; ++scene) {
    const World w = oracle::random_scene(rng);
    for (int i = 0; i < 100; ++i) {
      const Pose p{{wide(rng), wide(rng)}, ang(rng)};
      if (collision(p, 0.105, w) != oracle::collides(p, 0.105, w)) ++disagreements;
    }
  }
  return {worst_ray <= 1e-3 && disagreements == 0,
          "ray max |diff| " + fmt("%.2e", worst_ray) + " m on 100 scenes; " + std::to_string(disagreements) +
              " collision disagreements on 1000 poses"};
}

// --- 3 -------------------------------------------------------------------

Outcome rewards() {
  const RewardConfig cfg;
  int worked_bad = 0;
  for (const auto& c : reward_cases::kWorked) {
    if (reward(c.kind, c.facts, cfg) != c.expected) ++worked_bad;
  }
  std::mt19937_64 rng(31337);
  int fuzz_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const TransitionFacts f = reward_cases::straddling(i, rng, cfg);
    for (RewardKind kind : {RewardKind::Basic, RewardKind::Advanced}) {
      const double got = reward(kind, f, cfg);
      const double want = reward_cases::oracle(kind, f, cfg);
      const bool terminal = f.d_curr < cfg.c_d || f.min_range < cfg.c_o;
      if (terminal ? got != want : !reward_cases::agrees(got, want)) ++fuzz_bad;
    }
  }
  return {worked_bad == 0 && fuzz_bad == 0,
          std::to_string(reward_cases::kWorked.size() - worked_bad) + "/" +
              std::to_string(reward_cases::kWorked.size()) + " worked examples exact; " + std::to_string(fuzz_bad) +
              " branch violations in 10000 fuzz inputs x 2 rewards"};
}

// --- 4 -------------------------------------------------------------------

Outcome clip_identity() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> adv(-100, 100), eps(0.01, 0.99), lp(-10, 2);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = adv(rng), l = lp(rng);
    if (ppo_surrogate(l, l, a, eps(rng)) != a) ++bad;
  }
  const double pos = ppo_surrogate(std::log(1.5), 0.0, 1.0, 0.2);
  const double neg = ppo_surrogate(std::log(0.5), 0.0, -1.0, 0.2);
  const bool worked = pos == 1.2 && neg == -0.8;
  return {bad == 0 && worked, std::to_string(bad) + " identity failures in 10000; clipped cases " +
                                  fmt("%.17g", pos) + ", " + fmt("%.17g", neg)};
}

// --- 5 -------------------------------------------------------------------

Outcome observations() {
  std::mt19937_64 rng(555);
  std::uniform_real_distribution<double> pos(-4.9, 4.9), yaw(-10, 10), lin(0, 1), ang(-1, 1);
  int bad_bounds = 0, bad_pool = 0, checked = 0;
  World w = complex_arena();
  while (checked < 10000) {
    if (checked % 100 == 0) w = checked % 200 == 0 ? complex_arena() : oracle::random_scene(rng);
    const Pose p{{pos(rng), pos(rng)}, normalize_angle(yaw(rng))};
    if (clearance(p.position, w) < 1e-6) continue;
    const Vec2 target{pos(rng), pos(rng)};
    const LidarScan scan = cast_scan(p, w, 3.5);
    const Observation obs = build_observation(p, scan, {lin(rng), ang(rng)}, target, 3.5, w.bounds.diagonal());
    if (obs.values().size() != 16 || !obs.within_bounds()) ++bad_bounds;
    if (min_pool(scan) != oracle::min_pool(scan)) ++bad_pool;
    ++checked;
  }
  return {bad_bounds == 0 && bad_pool == 0, std::to_string(bad_bounds) + " out-of-bounds observations, " +
                                                std::to_string(bad_pool) + " min-pool mismatches in 10000 states"};
}

// --- 6 -------------------------------------------------------------------

Outcome determinism(const Options& opt) {
  std::vector<std::string> problems;
  for (auto [algo, episodes] : {std::pair{Algo::PpoRes, 5}, std::pair{Algo::Ddpg, 3}}) {
    RunConfig cfg;
    cfg.algo = algo;
    cfg.episodes = episodes;
    load_world(cfg);
    std::string csv[2];
    TrainResult run;
    for (int k = 0; k < 2; ++k) {
      cfg.output_dir = opt.runs_dir / "determinism" / (std::string(to_string(algo)) + (k ? "_b" : "_a"));
      fs::remove_all(cfg.output_dir);
      run = train(cfg);
      csv[k] = slurp(cfg.output_dir / "metrics.csv");
    }
    if (csv[0].empty() || csv[0] != csv[1]) problems.push_back(std::string(to_string(algo)) + " metrics differ");

    // In-memory agent from the finished run against its reloaded checkpoint.
    const Agent& before = run.agent;
    const Agent after = load_agent(cfg.output_dir / "checkpoint.bin", algo);
    NavigationEnv env(cfg.env);
    std::mt19937_64 ra(77), rb(77);
    Observation obs = env.reset(derive_seed(9, 1000));
    int mismatches = 0;
    for (int i = 0; i < 300 && !env.done(); ++i) {
      const ObsVector ov = to_vector(obs);
      const auto mode = algo == Algo::Ddpg ? ActionMode::DdpgExplore : ActionMode::Stochastic;
      const auto x = select_action(before.actor(), ov, mode, ra);
      const auto y = select_action(after.actor(), ov, mode, rb);
      if (x.action != y.action || x.log_prob != y.log_prob) ++mismatches;
      obs = env.step(to_normalized(x.action)).observation;
    }
    const auto ea = evaluate(before, cfg.env, 3, 21);
    const auto eb = evaluate(after, cfg.env, 3, 21);
    for (std::size_t i = 0; i < ea.size(); ++i) {
      if (format_record(ea[i]) != format_record(eb[i])) ++mismatches;
    }
    if (mismatches) problems.push_back(std::string(to_string(algo)) + " action tape differs after reload");
  }
  std::string detail = problems.empty() ? "metrics byte-identical, reloaded action tapes identical (ppo_res, ddpg)"
                                        : "";
  for (const auto& p : problems) detail += p + "; ";
  return {problems.empty(), detail};
}

// --- training runs ----------------------------------------------------------

struct RunKey {
  Algo algo;
  std::string world;
  RewardKind reward;
  std::uint64_t seed;
  int episodes;
};

struct RunOutcome {
  fs::path dir;
  double final50 = 0.0;
  double seconds = 0.0;
};

RunOutcome training_run(const Options& opt, const RunKey& k) {
  RunConfig cfg;
  cfg.algo = k.algo;
  cfg.world_path = k.world;
  cfg.env.reward = k.reward;
  cfg.seed = k.seed;
  cfg.episodes = k.episodes;
  load_world(cfg);
  cfg.output_dir = opt.runs_dir / (std::string(to_string(k.algo)) + "_" + fs::path(k.world).stem().string() + "_" +
                                   to_string(k.reward) + "_s" + std::to_string(k.seed));
  RunOutcome out;
  out.dir = cfg.output_dir;
  const fs::path csv = cfg.output_dir / "metrics.csv";
  if (opt.reuse && fs::exists(csv) && fs::exists(cfg.output_dir / "checkpoint.bin")) {
    const auto records = read_metrics(csv);
    const std::string meta = slurp(cfg.output_dir / "run.meta");
    if (static_cast<int>(records.size()) == k.episodes && meta.find(describe(cfg)) != std::string::npos) {
      out.final50 = success_percent(records, 50);
      std::cout << "    reused " << cfg.output_dir.filename().string() << ": final-50 success "
                << fmt("%.0f", out.final50) << "%\n"
                << std::flush;
      return out;
    }
  }
  fs::remove_all(cfg.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train(cfg);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.final50 = success_percent(r.episodes, 50);
  std::cout << "    " << cfg.output_dir.filename().string() << ": final-50 success " << fmt("%.0f", out.final50)
            << "% in " << fmt("%.0f", out.seconds) << " s\n"
            << std::flush;
  return out;
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3};

std::vector<RunOutcome> seeds(const Options& opt, Algo algo, const std::string& world, RewardKind reward,
                              int episodes) {
  std::vector<RunOutcome> out;
  for (auto s : kSeeds) out.push_back(training_run(opt, {algo, world, reward, s, episodes}));
  return out;
}

std::string percents(const std::vector<RunOutcome>& runs) {
  std::string s;
  for (const auto& r : runs) s += (s.empty() ? "" : "/") + fmt("%.0f", r.final50);
  return s;
}

std::map<std::string, std::vector<RunOutcome>> cache;

const std::vector<RunOutcome>& cached(const Options& opt, Algo algo, const std::string& world, RewardKind reward,
                                      int episodes) {
  const std::string key = std::string(to_string(algo)) + world + to_string(reward) + std::to_string(episodes);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, seeds(opt, algo, world, reward, episodes)).first;
  return it->second;
}

// --- 7 .. 10 ----------------------------------------------------------------

Outcome simple_trend(const Options& opt) {
  const auto& res = cached(opt, Algo::PpoRes, "simple.world", RewardKind::Basic, 300);
  int ok = 0;
  for (const auto& r : res) ok += r.final50 >= 80.0;
  return {ok >= 2, "ppo_res final-50 success " + percents(res) + " %; " + std::to_string(ok) + "/3 seeds >= 80"};
}

Outcome ablation(const Options& opt) {
  const auto& res = cached(opt, Algo::PpoRes, "simple.world", RewardKind::Basic, 300);
  const auto& mlp = cached(opt, Algo::PpoMlp, "simple.world", RewardKind::Basic, 300);
  int ok = 0;
  for (std::size_t i = 0; i < res.size(); ++i) ok += res[i].final50 > mlp[i].final50;
  return {ok >= 2, "ppo_res " + percents(res) + " vs ppo_mlp " + percents(mlp) + " %; res ahead on " +
                       std::to_string(ok) + "/3 seeds"};
}

Outcome shaping(const Options& opt) {
  const auto& basic = cached(opt, Algo::PpoRes, "complex.world", RewardKind::Basic, 600);
  const auto& adv = cached(opt, Algo::PpoRes, "complex.world", RewardKind::Advanced, 600);
  int ok = 0;
  for (std::size_t i = 0; i < basic.size(); ++i) ok += adv[i].final50 >= basic[i].final50;
  return {ok >= 2, "complex arena advanced " + percents(adv) + " vs basic " + percents(basic) +
                       " %; advanced >= basic on " + std::to_string(ok) + "/3 seeds"};
}

Outcome ddpg_smoke(const Options& opt) {
  const auto& runs = cached(opt, Algo::Ddpg, "simple.world", RewardKind::Basic, 300);
  int ok = 0;
  for (const auto& r : runs) ok += r.final50 >= 60.0;
  return {ok >= 2, "ddpg final-50 success " + percents(runs) + " %; " + std::to_string(ok) + "/3 seeds >= 60"};
}

// --- 11 ------------------------------------------------------------------

// Aggregates recomputed row by row the way a spreadsheet would: column sums,
// a COUNTIFS for successes and a running total for the step budget.
std::string spreadsheet_row(const std::string& name, const std::vector<std::vector<std::string>>& rows, int budget,
                            double& success_out) {
  double reward_sum = 0.0, steps_sum = 0.0;
  int successes = 0, within = 0;
  long running = 0;
  for (const auto& r : rows) {
    reward_sum += std::stod(r[1]);
    steps_sum += std::stod(r[2]);
    successes += std::stoi(r[3]) > 0 && r[4] != "collided";
    running += std::stol(r[2]);
    within += running <= budget;
  }
  const double n = static_cast<double>(rows.size());
  success_out = 100.0 * successes / n;
  char buf[256];
  std::snprintf(buf, sizeof buf, "| %s | %.2f | %zu | %.2f | %.2f | %d (%d steps) |\n", name.c_str(), reward_sum / n,
                rows.size(), success_out, steps_sum / n, within, budget);
  return buf;
}

Outcome compare_oracle(const Options& opt) {
  if (opt.cli.empty()) return {false, "no --cli executable given"};
  const fs::path root = opt.runs_dir / "compare_oracle";
  fs::remove_all(root);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rew(-120.0, 260.0);
  std::uniform_int_distribution<int> steps(1, 500), arrivals(0, 4), ev(0, 1);
  const int budget = 4000;
  struct Synthetic {
    std::string name;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    double success = 0.0;
  };
  std::vector<Synthetic> runs{{"run_a", {}, "", 0.0}, {"run_b", {}, "", 0.0}};
  const int counts[] = {37, 52};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    fs::create_directories(root / runs[k].name);
    std::ofstream csv(root / runs[k].name / "metrics.csv");
    csv << kMetricsHeader << "\n";
    for (int i = 0; i < counts[k]; ++i) {
      char reward_text[32];
      std::snprintf(reward_text, sizeof reward_text, "%.6f", rew(rng));
      std::vector<std::string> row{std::to_string(i), reward_text, std::to_string(steps(rng)),
                                   std::to_string(arrivals(rng)), ev(rng) ? "collided" : "timeout", "0.000"};
      for (std::size_t c = 0; c < row.size(); ++c) csv << (c ? "," : "") << row[c];
      csv << "\n";
      runs[k].rows.push_back(row);
    }
    std::ofstream(root / runs[k].name / "run.meta") << "run.step_budget = " << budget << "\n";
    runs[k].line = spreadsheet_row(runs[k].name, runs[k].rows, budget, runs[k].success);
  }
  std::string expected =
      "| Run | Avg. Reward | Episodes | Success % | Avg. Steps/Ep | Episodes within budget |\n"
      "|---|---:|---:|---:|---:|---:|\n";
  const bool b_first = runs[1].success > runs[0].success;
  expected += b_first ? runs[1].line + runs[0].line : runs[0].line + runs[1].line;

  const fs::path table = root / "table.md";
  const std::string cmd = "\"" + opt.cli + "\" compare \"" + (root / "run_a").string() + "\" \"" +
                          (root / "run_b").string() + "\" --output \"" + table.string() + "\"";
  const int code = std::system(cmd.c_str());
  const std::string got = slurp(table);
  if (code != 0) return {false, "compare exited with " + std::to_string(code)};
  return {got == expected, got == expected ? "table equals the spreadsheet oracle (37 + 52 rows)"
                                           : "table differs:\n" + got + "expected:\n" + expected};
}

// --- eval self-consistency ---------------------------------------------------

Outcome eval_consistency(const Options& opt) {
  const auto& res = cached(opt, Algo::PpoRes, "simple.world", RewardKind::Basic, 300);
  RunConfig cfg;
  load_world(cfg);
  const Agent agent = load_agent(res[0].dir / "checkpoint.bin", Algo::PpoRes);
  const auto records = evaluate(agent, cfg.env, 50, 7);
  const double eval_pct = success_percent(records, 50);
  return {std::abs(eval_pct - res[0].final50) <= 10.0, "seed 1 eval success " + fmt("%.0f", eval_pct) +
                                                           " % vs late training " + fmt("%.0f", res[0].final50) +
                                                           " %"};
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  Options opt;
  std::string runs_dir = opt.runs_dir.string();
  std::vector<int> only;
  CLI::App app{"navlab acceptance suite"};
  app.add_option("--runs-dir", runs_dir, "where training runs are written");
  app.add_option("--cli", opt.cli, "navlab executable, used by the compare check");
  app.add_option("--only", only, "criterion numbers to run (default: all)")->delimiter(',');
  app.add_flag("--reuse", opt.reuse, "reuse complete training runs from an earlier invocation");
  CLI11_PARSE(app, argc, argv);
  opt.runs_dir = runs_dir;
  opt.only.insert(only.begin(), only.end());
  fs::create_directories(opt.runs_dir);

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradients},
      {2, "geometry oracle", geometry},
      {3, "reward branch table", rewards},
      {4, "clip identity", clip_identity},
      {5, "observation contract", observations},
      {6, "determinism", [&] { return determinism(opt); }},
      {11, "aggregation correctness", [&] { return compare_oracle(opt); }},
      {7, "training trend, simple arena", [&] { return simple_trend(opt); }},
      {8, "ablation trend", [&] { return ablation(opt); }},
      {9, "reward-shaping trend, complex arena", [&] { return shaping(opt); }},
      {10, "ddpg smoke", [&] { return ddpg_smoke(opt); }},
      {12, "eval self-consistency (supplementary)", [&] { return eval_consistency(opt); }},
  };

  std::map<int, std::string> lines;
  int failures = 0;
  for (const auto& c : criteria) {
    if (!opt.only.empty() && !opt.only.count(c.id)) continue;
    std::cout << "running " << c.id << ": " << c.title << "\n" << std::flush;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    const std::string label = c.id == 12 ? "extra" : "criterion " + std::to_string(c.id);
    lines[c.id] = (o.pass ? "PASS  " : "FAIL  ") + label + "  " + c.title + ": " + o.detail + " [" +
                  fmt("%.1f", secs) + " s]";
    std::cout << lines[c.id] << "\n" << std::flush;
  }

  std::cout << "\n==== acceptance summary ====\n";
  for (const auto& [id, line] : lines) std::cout << line << "\n";

  std::vector<fs::path> dirs;
  for (const auto& [key, runs] : cache) {
    for (const auto& r : runs) dirs.push_back(r.dir);
  }
  if (!dirs.empty()) {
    const std::string table = markdown_table(collect_reports(dirs));
    std::ofstream(opt.runs_dir / "summary.md") << table;
    std::cout << "\n" << table;
  }
  return failures == 0 ? 0 : 1;
}
