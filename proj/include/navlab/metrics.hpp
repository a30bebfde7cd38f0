#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navlab/environment.hpp"

namespace navlab {

inline constexpr const char* kMetricsHeader = "episode,cum_reward,steps,arrivals,event,wall_ms";

struct EpisodeRecord {
  int episode = 0;
  double cum_reward = 0.0;
  int steps = 0;
  int arrivals = 0;
  StepEvent event = StepEvent::None;  // terminal event: collided or timeout
  double wall_ms = 0.0;
};

StepEvent parse_event(std::string_view text);

/// One CSV row without the trailing newline.
std::string format_record(const EpisodeRecord& record);

std::vector<EpisodeRecord> parse_metrics_text(std::string_view text, std::string_view source = "<metrics>");
std::vector<EpisodeRecord> read_metrics(const std::filesystem::path& path);

/// Appends rows to a metrics CSV, flushing after each so a clean shutdown
/// never leaves a partial row.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void append(const EpisodeRecord& record);

 private:
  std::ofstream out_;
};

/// At least one arrival and the episode did not end in a collision.
bool is_success(const EpisodeRecord& record);

/// Success percentage over the final `last_n` records (all when fewer).
double success_percent(std::span<const EpisodeRecord> records, std::size_t last_n);

struct RunReport {
  std::string name;
  double avg_reward = 0.0;
  int episodes = 0;
  double success_pct = 0.0;
  double avg_steps = 0.0;
  /// Episodes completed within the first `step_budget` environment steps.
  int budget_episodes = 0;
  int step_budget = 0;
};

RunReport aggregate(std::span<const EpisodeRecord> records, std::string name, int step_budget);

/// Markdown table, rows sorted by success % (highest first, ties keep input order).
std::string markdown_table(std::vector<RunReport> reports);

}  // namespace navlab
