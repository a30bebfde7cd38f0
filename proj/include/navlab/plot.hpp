#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "navlab/metrics.hpp"

namespace navlab {

inline constexpr int kDefaultSmoothingWindow = 10;

/// Trailing mean: out[i] averages values[max(0, i - window + 1) .. i].
std::vector<double> moving_average(std::span<const double> values, int window);

/// Self-contained SVG of cumulative reward per episode. A moving-average
/// overlay is drawn when window > 0 and there are at least `window` rows.
/// Requires at least two records.
std::string learning_curve_svg(std::span<const EpisodeRecord> records, int window = kDefaultSmoothingWindow);

void emit_learning_curve(const std::filesystem::path& metrics_csv, const std::filesystem::path& output,
                         int window = kDefaultSmoothingWindow);

}  // namespace navlab
