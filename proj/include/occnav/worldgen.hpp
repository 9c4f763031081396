#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "occnav/error.hpp"
#include "occnav/geometry.hpp"
#include "occnav/grid.hpp"
#include "occnav/rng.hpp"
#include "occnav/text_util.hpp"

namespace occnav {

struct WorldSpec {
  std::uint64_t seed = 0;
  double width = 8.0;
  double height = 6.0;
  int min_obstacles = 4;
  int max_obstacles = 10;
  double min_obstacle_size = 0.3;
  double max_obstacle_size = 1.5;
  double min_clearance = 0.4;
  double wall_thickness = 0.1;
  double truth_cell = 0.05;
  int max_attempts = 1000;

  void validate() const {
    if (!(width > 2 * min_clearance + 2 * wall_thickness) || !(height > 2 * min_clearance + 2 * wall_thickness))
      throw config_error("world: width/height must exceed twice the clearance plus walls");
    if (min_obstacles < 0 || max_obstacles < min_obstacles)
      throw config_error("world: obstacle count range is empty");
    if (!(min_obstacle_size > 0) || max_obstacle_size < min_obstacle_size)
      throw config_error("world: obstacle size range must be positive and non-empty");
    if (!(min_clearance >= 0) || !(wall_thickness > 0) || !(truth_cell > 0))
      throw config_error("world: clearance, wall thickness and truth cell must be positive");
    if (max_attempts <= 0) throw config_error("world: max_attempts must be positive");
  }
};

enum class SolidKind : std::uint8_t { wall, obstacle };

struct Solid {
  Rect rect;
  SolidKind kind = SolidKind::obstacle;
};

struct Obstacle {
  int id = 0;
  Rect rect;
  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// A rectangular room. Walls are a band of wall_thickness along the inside
/// of the boundary; obstacles live in the interior.
///
/// truth_grid rows index y and columns index x, each cell truth_cell wide. A
/// cell is occupied iff its center lies inside (or on the edge of) any solid.
struct FloorPlan {
  std::uint64_t seed = 0;
  Rect boundary;
  double wall_thickness = 0.1;
  double truth_cell = 0.05;
  std::vector<Obstacle> obstacles;
  Grid<std::uint8_t> truth_grid;

  Rect interior() const {
    return {boundary.x0 + wall_thickness, boundary.y0 + wall_thickness, boundary.x1 - wall_thickness,
            boundary.y1 - wall_thickness};
  }

  std::vector<Solid> solids() const {
    const double t = wall_thickness;
    const Rect& b = boundary;
    std::vector<Solid> out = {
        {{b.x0, b.y0, b.x1, b.y0 + t}, SolidKind::wall},
        {{b.x0, b.y1 - t, b.x1, b.y1}, SolidKind::wall},
        {{b.x0, b.y0, b.x0 + t, b.y1}, SolidKind::wall},
        {{b.x1 - t, b.y0, b.x1, b.y1}, SolidKind::wall},
    };
    for (const auto& o : obstacles) out.push_back({o.rect, SolidKind::obstacle});
    return out;
  }

  /// Analytic solid test. Points outside the boundary count as solid.
  bool is_solid(Vec2 p) const {
    if (!boundary.contains(p)) return true;
    if (!interior().contains(p)) return true;
    return std::any_of(obstacles.begin(), obstacles.end(), [&](const Obstacle& o) { return o.rect.contains(p); });
  }

  bool operator==(const FloorPlan&) const = default;
};

/// Occupancy raster of a plan at an arbitrary cell size (center rule).
inline Grid<std::uint8_t> rasterize(const FloorPlan& plan, double cell) {
  const int cols = static_cast<int>(std::ceil(plan.boundary.width() / cell - 1e-9));
  const int rows = static_cast<int>(std::ceil(plan.boundary.height() / cell - 1e-9));
  Grid<std::uint8_t> g(rows, cols, 0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const Vec2 center{plan.boundary.x0 + (c + 0.5) * cell, plan.boundary.y0 + (r + 0.5) * cell};
      g.at(r, c) = plan.is_solid(center) ? 1 : 0;
    }
  return g;
}

inline Cell world_to_cell(const FloorPlan& plan, double cell, Vec2 p) {
  return {static_cast<int>(std::floor((p.y - plan.boundary.y0) / cell)),
          static_cast<int>(std::floor((p.x - plan.boundary.x0) / cell))};
}

inline Vec2 cell_center(const FloorPlan& plan, double cell, Cell c) {
  return {plan.boundary.x0 + (c.col + 0.5) * cell, plan.boundary.y0 + (c.row + 0.5) * cell};
}

inline FloorPlan make_floor_plan(std::uint64_t seed, Rect boundary, double wall_thickness, double truth_cell,
                                 std::vector<Obstacle> obstacles) {
  FloorPlan plan;
  plan.seed = seed;
  plan.boundary = boundary;
  plan.wall_thickness = wall_thickness;
  plan.truth_cell = truth_cell;
  plan.obstacles = std::move(obstacles);
  plan.truth_grid = rasterize(plan, truth_cell);
  return plan;
}

/// Places axis-aligned obstacles by rejection sampling. Each candidate keeps
/// min_clearance from the walls and from every obstacle already placed.
inline FloorPlan generate_world(const WorldSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Rect boundary{0.0, 0.0, spec.width, spec.height};
  const double t = spec.wall_thickness;
  const Rect inner{t + spec.min_clearance, t + spec.min_clearance, spec.width - t - spec.min_clearance,
                   spec.height - t - spec.min_clearance};

  const int target = static_cast<int>(rng.uniform_int(spec.min_obstacles, spec.max_obstacles));
  std::vector<Obstacle> placed;
  int attempts = 0;
  while (static_cast<int>(placed.size()) < target) {
    if (attempts++ >= spec.max_attempts)
      throw Error(ErrorKind::numeric, "world generation failed: could not place " + std::to_string(target) +
                                          " obstacles within " + std::to_string(spec.max_attempts) + " attempts");
    const double w = rng.uniform(spec.min_obstacle_size, spec.max_obstacle_size);
    const double h = rng.uniform(spec.min_obstacle_size, spec.max_obstacle_size);
    if (w > inner.width() || h > inner.height()) continue;
    const double x0 = rng.uniform(inner.x0, inner.x1 - w);
    const double y0 = rng.uniform(inner.y0, inner.y1 - h);
    const Rect cand{x0, y0, x0 + w, y0 + h};
    const bool clear = std::all_of(placed.begin(), placed.end(),
                                   [&](const Obstacle& o) { return rect_gap(o.rect, cand) >= spec.min_clearance; });
    if (!clear) continue;
    placed.push_back({static_cast<int>(placed.size()), cand});
  }
  return make_floor_plan(spec.seed, boundary, spec.wall_thickness, spec.truth_cell, std::move(placed));
}

/// 4-connected component of free cells (at the given cell size) containing
/// start, sorted by (row, col).
inline std::vector<Cell> reachable_cells(const FloorPlan& plan, double cell_size, Vec2 start) {
  const auto occ = rasterize(plan, cell_size);
  const Cell s = world_to_cell(plan, cell_size, start);
  if (!occ.in_bounds(s.row, s.col) || occ.at(s.row, s.col) || plan.is_solid(start))
    throw Error(ErrorKind::usage, "reachable_cells: start lies inside an obstacle");
  Grid<std::uint8_t> seen(occ.rows, occ.cols, 0);
  std::deque<Cell> queue{s};
  seen.at(s.row, s.col) = 1;
  std::vector<Cell> out;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    out.push_back(c);
    constexpr int dr[4] = {-1, 1, 0, 0};
    constexpr int dc[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int r = c.row + dr[k], cc = c.col + dc[k];
      if (!occ.in_bounds(r, cc) || occ.at(r, cc) || seen.at(r, cc)) continue;
      seen.at(r, cc) = 1;
      queue.push_back({r, cc});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Description file grammar, one record per line, '#' starts a comment:
//   seed <u64>
//   boundary <x0> <y0> <x1> <y1>
//   wall_thickness <m>
//   truth_cell <m>
//   obstacle <id> <x0> <y0> <x1> <y1>
// Numbers use shortest round-trip formatting so replay is bit-identical.

inline std::string describe_world(const FloorPlan& plan) {
  std::ostringstream os;
  os << "# occnav floor plan\n";
  os << "seed " << plan.seed << "\n";
  const auto& b = plan.boundary;
  os << "boundary " << format_double(b.x0) << ' ' << format_double(b.y0) << ' ' << format_double(b.x1) << ' '
     << format_double(b.y1) << "\n";
  os << "wall_thickness " << format_double(plan.wall_thickness) << "\n";
  os << "truth_cell " << format_double(plan.truth_cell) << "\n";
  for (const auto& o : plan.obstacles)
    os << "obstacle " << o.id << ' ' << format_double(o.rect.x0) << ' ' << format_double(o.rect.y0) << ' '
       << format_double(o.rect.x1) << ' ' << format_double(o.rect.y1) << "\n";
  return os.str();
}

inline FloorPlan parse_world(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::uint64_t seed = 0;
  Rect boundary;
  double wall = 0.1, cell = 0.05;
  bool have_boundary = false;
  std::vector<Obstacle> obstacles;
  std::set<int> ids;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto need = [&](std::size_t n) {
      if (tok.size() != n)
        throw format_error("world description line " + std::to_string(lineno) + ": expected " +
                           std::to_string(n - 1) + " values for '" + tok[0] + "'");
    };
    if (tok[0] == "seed") {
      need(2);
      seed = parse_uint(tok[1]);
    } else if (tok[0] == "boundary") {
      need(5);
      boundary = {parse_double(tok[1]), parse_double(tok[2]), parse_double(tok[3]), parse_double(tok[4])};
      have_boundary = true;
    } else if (tok[0] == "wall_thickness") {
      need(2);
      wall = parse_double(tok[1]);
    } else if (tok[0] == "truth_cell") {
      need(2);
      cell = parse_double(tok[1]);
    } else if (tok[0] == "obstacle") {
      need(6);
      Obstacle o{static_cast<int>(parse_int(tok[1])),
                 {parse_double(tok[2]), parse_double(tok[3]), parse_double(tok[4]), parse_double(tok[5])}};
      if (!ids.insert(o.id).second) throw format_error("world description: duplicate obstacle id");
      obstacles.push_back(o);
    } else {
      throw format_error("world description line " + std::to_string(lineno) + ": unknown key '" + tok[0] + "'");
    }
  }
  if (!have_boundary) throw format_error("world description: missing boundary");
  if (!(wall > 0) || !(cell > 0)) throw format_error("world description: non-positive wall or cell size");
  return make_floor_plan(seed, boundary, wall, cell, std::move(obstacles));
}

inline void save_world(const FloorPlan& plan, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path);
  f << describe_world(plan);
  if (!f) throw io_error("write failed: " + path);
}

inline FloorPlan load_world(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_world(ss.str());
}

}  // namespace occnav
