#include "navlab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "navlab/errors.hpp"

namespace navlab {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

template <class T>
T parse_number(std::string_view field, const std::string& where) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ConfigError(where + ": malformed field '" + std::string(field) + "'");
  }
  return value;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

StepEvent parse_event(std::string_view text) {
  if (text == "none") return StepEvent::None;
  if (text == "arrived") return StepEvent::Arrived;
  if (text == "collided") return StepEvent::Collided;
  if (text == "timeout") return StepEvent::Timeout;
  throw ConfigError("unknown episode event '" + std::string(text) + "'");
}

std::string format_record(const EpisodeRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.6f,%d,%d,%s,%.3f", r.episode, r.cum_reward, r.steps, r.arrivals,
                to_string(r.event), r.wall_ms);
  return buf;
}

std::vector<EpisodeRecord> parse_metrics_text(std::string_view text, std::string_view source) {
  std::vector<EpisodeRecord> out;
  int line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!header_seen) {
      if (line != kMetricsHeader) throw ConfigError(where + ": unexpected metrics header");
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != 6) throw ConfigError(where + ": expected 6 fields");
    EpisodeRecord r;
    r.episode = parse_number<int>(fields[0], where);
    r.cum_reward = parse_number<double>(fields[1], where);
    r.steps = parse_number<int>(fields[2], where);
    r.arrivals = parse_number<int>(fields[3], where);
    try {
      r.event = parse_event(fields[4]);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    r.wall_ms = parse_number<double>(fields[5], where);
    out.push_back(r);
  }
  if (!header_seen) throw ConfigError(std::string(source) + ": empty metrics file");
  return out;
}

std::vector<EpisodeRecord> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open metrics file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_metrics_text(buf.str(), path.string());
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw ConfigError("cannot write metrics file: " + path.string());
  out_ << kMetricsHeader << '\n';
  out_.flush();
}

void MetricsWriter::append(const EpisodeRecord& record) {
  out_ << format_record(record) << '\n';
  out_.flush();
}

bool is_success(const EpisodeRecord& record) {
  return record.arrivals >= 1 && record.event != StepEvent::Collided;
}

double success_percent(std::span<const EpisodeRecord> records, std::size_t last_n) {
  const std::size_t n = std::min(last_n, records.size());
  if (n == 0) return 0.0;
  const auto tail = records.subspan(records.size() - n);
  const auto wins = std::count_if(tail.begin(), tail.end(), is_success);
  return 100.0 * static_cast<double>(wins) / static_cast<double>(n);
}

RunReport aggregate(std::span<const EpisodeRecord> records, std::string name, int step_budget) {
  RunReport report;
  report.name = std::move(name);
  report.step_budget = step_budget;
  report.episodes = static_cast<int>(records.size());
  if (records.empty()) return report;
  double reward = 0.0;
  double steps = 0.0;
  long long used = 0;
  for (const auto& r : records) {
    reward += r.cum_reward;
    steps += r.steps;
    used += r.steps;
    if (used <= step_budget) ++report.budget_episodes;
  }
  const auto n = static_cast<double>(records.size());
  report.avg_reward = reward / n;
  report.avg_steps = steps / n;
  report.success_pct = success_percent(records, records.size());
  return report;
}

std::string markdown_table(std::vector<RunReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const RunReport& a, const RunReport& b) { return a.success_pct > b.success_pct; });
  std::ostringstream os;
  os << "| Run | Avg. Reward | Episodes | Success % | Avg. Steps/Ep | Episodes within budget |\n";
  os << "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : reports) {
    os << "| " << r.name << " | " << fixed2(r.avg_reward) << " | " << r.episodes << " | "
       << fixed2(r.success_pct) << " | " << fixed2(r.avg_steps) << " | " << r.budget_episodes << " ("
       << r.step_budget << " steps) |\n";
  }
  return os.str();
}

}  // namespace navlab
