#include "navlab/world_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "navlab/errors.hpp"

namespace navlab {

namespace {

constexpr double kContainTol = 1e-9;

[[noreturn]] void fail(std::string_view source, int line, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  throw ConfigError(os.str());
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> to_double(std::string_view tok) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool inside(const Rect& r, Vec2 p) {
  return p.x >= r.min.x - kContainTol && p.x <= r.max.x + kContainTol &&
         p.y >= r.min.y - kContainTol && p.y <= r.max.y + kContainTol;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

World parse_world_text(std::string_view text, std::string_view source) {
  World world;
  std::optional<Rect> bounds;
  std::optional<Pose> spawn;
  std::optional<Rect> region;
  struct Pending {
    Obstacle obstacle;
    int line;
  };
  std::vector<Pending> pending;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    const std::string_view directive = tokens[0];
    std::vector<double> args;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      auto v = to_double(tokens[k]);
      if (!v) fail(source, line_no, "malformed number '" + std::string(tokens[k]) + "'");
      args.push_back(*v);
    }
    auto expect = [&](std::size_t n) {
      if (args.size() != n) {
        fail(source, line_no, std::string(directive) + " expects " + std::to_string(n) + " numbers");
      }
    };

    if (directive == "BOUNDS" || directive == "TARGET_REGION") {
      expect(4);
      Rect r{{args[0], args[1]}, {args[2], args[3]}};
      if (!(r.max.x > r.min.x && r.max.y > r.min.y)) fail(source, line_no, "empty rectangle");
      auto& slot = directive == "BOUNDS" ? bounds : region;
      if (slot) fail(source, line_no, "duplicate " + std::string(directive));
      slot = r;
    } else if (directive == "WALL") {
      expect(4);
      Segment s{{args[0], args[1]}, {args[2], args[3]}};
      if (s.a == s.b) fail(source, line_no, "wall endpoints coincide");
      pending.push_back({s, line_no});
    } else if (directive == "CIRCLE") {
      expect(3);
      if (!(args[2] > 0.0)) fail(source, line_no, "circle radius must be positive");
      pending.push_back({Circle{{args[0], args[1]}, args[2]}, line_no});
    } else if (directive == "SPAWN") {
      expect(3);
      if (spawn) fail(source, line_no, "duplicate SPAWN");
      spawn = Pose{{args[0], args[1]}, normalize_angle(args[2])};
    } else {
      fail(source, line_no, "unknown directive '" + std::string(directive) + "'");
    }
  }

  if (!bounds) fail(source, line_no, "missing BOUNDS");
  if (!spawn) fail(source, line_no, "missing SPAWN");
  if (!region) fail(source, line_no, "missing TARGET_REGION");

  world.bounds = *bounds;
  world.robot_spawn = *spawn;
  world.target_spawn_region = *region;
  if (!inside(world.bounds, spawn->position)) fail(source, line_no, "SPAWN outside BOUNDS");
  if (!inside(world.bounds, region->min) || !inside(world.bounds, region->max)) {
    fail(source, line_no, "TARGET_REGION outside BOUNDS");
  }
  for (const auto& p : pending) {
    bool ok = false;
    if (const auto* s = std::get_if<Segment>(&p.obstacle)) {
      ok = inside(world.bounds, s->a) && inside(world.bounds, s->b);
    } else {
      const auto& c = std::get<Circle>(p.obstacle);
      ok = inside(world.bounds, {c.center.x - c.radius, c.center.y - c.radius}) &&
           inside(world.bounds, {c.center.x + c.radius, c.center.y + c.radius});
    }
    if (!ok) fail(source, p.line, "obstacle outside BOUNDS");
    world.obstacles.push_back(p.obstacle);
  }
  world.target = {(region->min.x + region->max.x) / 2.0, (region->min.y + region->max.y) / 2.0};
  return world;
}

World parse_world(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open world file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_world_text(buf.str(), path.string());
}

std::string serialize_world(const World& world) {
  std::ostringstream os;
  const Rect& b = world.bounds;
  os << "BOUNDS " << fmt(b.min.x) << ' ' << fmt(b.min.y) << ' ' << fmt(b.max.x) << ' '
     << fmt(b.max.y) << '\n';
  for (const auto& obstacle : world.obstacles) {
    if (const auto* s = std::get_if<Segment>(&obstacle)) {
      os << "WALL " << fmt(s->a.x) << ' ' << fmt(s->a.y) << ' ' << fmt(s->b.x) << ' '
         << fmt(s->b.y) << '\n';
    } else {
      const auto& c = std::get<Circle>(obstacle);
      os << "CIRCLE " << fmt(c.center.x) << ' ' << fmt(c.center.y) << ' ' << fmt(c.radius)
         << '\n';
    }
  }
  const Pose& s = world.robot_spawn;
  os << "SPAWN " << fmt(s.position.x) << ' ' << fmt(s.position.y) << ' ' << fmt(s.yaw) << '\n';
  const Rect& r = world.target_spawn_region;
  os << "TARGET_REGION " << fmt(r.min.x) << ' ' << fmt(r.min.y) << ' ' << fmt(r.max.x) << ' '
     << fmt(r.max.y) << '\n';
  return os.str();
}

}  // namespace navlab
