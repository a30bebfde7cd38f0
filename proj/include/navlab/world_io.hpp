#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "navlab/geometry.hpp"

namespace navlab {

/// Parses the line-oriented world format:
///
///   BOUNDS xmin ymin xmax ymax
///   WALL x1 y1 x2 y2
///   CIRCLE cx cy r
///   SPAWN x y yaw
///   TARGET_REGION xmin ymin xmax ymax
///
/// '#' starts a comment. BOUNDS, SPAWN and TARGET_REGION are required exactly
/// once; unknown directives, malformed numbers and out-of-bounds obstacles
/// throw ConfigError with the offending line number.
World parse_world_text(std::string_view text, std::string_view source = "<memory>");
World parse_world(const std::filesystem::path& path);

/// Inverse of parse_world_text; numbers are written with round-trip precision.
std::string serialize_world(const World& world);

}  // namespace navlab
