#include "navlab/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "navlab/errors.hpp"

namespace navlab {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 50.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

std::string polyline(const Frame& f, std::span<const double> xs, std::span<const double> ys,
                     const char* color, const char* cls) {
  std::ostringstream os;
  os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ' ';
    os << fmt(f.px(xs[i])) << ',' << fmt(f.py(ys[i]));
  }
  os << "\"/>\n";
  return os.str();
}

}  // namespace

std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window <= 0) throw ContractViolation("moving_average: window must be positive");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    const auto n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

std::string learning_curve_svg(std::span<const EpisodeRecord> records, int window) {
  if (records.size() < 2) throw ConfigError("learning curve needs at least two episodes");
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    xs.push_back(r.episode);
    ys.push_back(r.cum_reward);
  }
  Frame f{xs.front(), xs.back(), *std::min_element(ys.begin(), ys.end()), *std::max_element(ys.begin(), ys.end())};
  if (f.x1 == f.x0) f.x1 = f.x0 + 1.0;
  if (f.y1 == f.y0) {
    f.y0 -= 1.0;
    f.y1 += 1.0;
  }

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
     << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kHeight - kMargin
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">Episode</text>\n";
  os << "<text x=\"15\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 15 " << kHeight / 2
     << ")\" text-anchor=\"middle\">Cumulative reward</text>\n";
  os << "<text x=\"" << kMargin - 5 << "\" y=\"" << kMargin << "\" text-anchor=\"end\" font-size=\"10\">"
     << fmt(f.y1) << "</text>\n";
  os << "<text x=\"" << kMargin - 5 << "\" y=\"" << kHeight - kMargin << "\" text-anchor=\"end\" font-size=\"10\">"
     << fmt(f.y0) << "</text>\n";
  os << polyline(f, xs, ys, "steelblue", "reward");
  if (window > 0 && records.size() >= static_cast<std::size_t>(window)) {
    const auto avg = moving_average(ys, window);
    os << polyline(f, xs, avg, "darkorange", "moving-average");
  }
  os << "</svg>\n";
  return os.str();
}

void emit_learning_curve(const std::filesystem::path& metrics_csv, const std::filesystem::path& output, int window) {
  const auto records = read_metrics(metrics_csv);
  const auto svg = learning_curve_svg(records, window);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write chart: " + output.string());
  out << svg;
}

}  // namespace navlab
