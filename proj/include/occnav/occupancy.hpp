#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "occnav/error.hpp"
#include "occnav/geometry.hpp"
#include "occnav/grid.hpp"
#include "occnav/sensor.hpp"

namespace occnav {

/// Robot-frame crop. The robot sits at the midpoint of the rear edge: column
/// 0 is nearest the robot and +forward runs along columns; row 0 is the
/// robot's far left (+lateral_extent/2).
struct GridSpec {
  double forward_extent = 5.0;
  double lateral_extent = 5.0;
  int resolution = 256;

  double cell_size() const { return forward_extent / resolution; }

  void validate() const {
    if (!(forward_extent > 0.0) || !(lateral_extent > 0.0)) throw config_error("grid: extents must be positive");
    if (resolution < 8) throw config_error("grid: resolution must be >= 8");
    if (forward_extent != lateral_extent) throw config_error("grid: cells must be square (equal extents)");
  }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct OccupancyConfig {
  double m = 0.01;
  int clip_counts = 10;
  double free_threshold = 0.495;
  double occupied_threshold = 0.505;
  double max_logodds = 10.0;

  void validate() const {
    if (!(m > 0.0)) throw config_error("occupancy: m must be positive");
    if (clip_counts <= 0) throw config_error("occupancy: clip_counts must be positive");
    if (!(free_threshold < 0.5 && 0.5 < occupied_threshold))
      throw config_error("occupancy: thresholds must straddle 0.5");
    if (!(max_logodds > 0.0)) throw config_error("occupancy: max_logodds must be positive");
  }
};

struct LogOddsGrid {
  GridSpec spec;
  Grid<float> values;

  LogOddsGrid() = default;
  explicit LogOddsGrid(const GridSpec& s) : spec(s), values(s.resolution, s.resolution, 0.0f) {}
  friend bool operator==(const LogOddsGrid&, const LogOddsGrid&) = default;
};

struct ProbGrid {
  GridSpec spec;
  Grid<float> values;

  ProbGrid() = default;
  explicit ProbGrid(const GridSpec& s, float fill = 0.5f) : spec(s), values(s.resolution, s.resolution, fill) {}
  friend bool operator==(const ProbGrid&, const ProbGrid&) = default;
};

struct CameraRig {
  double lateral_offset = 0.3;
  double inward_rotation_deg = 30.0;
  double height = 0.5;  // metadata only in the planar model

  void validate() const {
    if (!(lateral_offset >= 0.0)) throw config_error("rig: lateral_offset must be >= 0");
    if (!(inward_rotation_deg >= 0.0 && inward_rotation_deg < 90.0))
      throw config_error("rig: inward_rotation must be in [0, 90)");
  }
};

struct RigPoses {
  Pose2D center;
  Pose2D left;
  Pose2D right;
};

/// Side cameras sit lateral_offset to either side and turn inward so that
/// all three look at the area ahead of the robot.
inline RigPoses rig_poses(const Pose2D& robot, const CameraRig& rig) {
  const double c = std::cos(robot.yaw), s = std::sin(robot.yaw);
  const Vec2 left_axis{-s, c};
  const double rot = deg2rad(rig.inward_rotation_deg);
  const Vec2 lp = robot.position() + rig.lateral_offset * left_axis;
  const Vec2 rp = robot.position() - rig.lateral_offset * left_axis;
  return {robot, Pose2D(lp.x, lp.y, robot.yaw - rot), Pose2D(rp.x, rp.y, robot.yaw + rot)};
}

inline LabeledPoints to_robot_frame(const LabeledPoints& points, const Pose2D& robot) {
  const double c = std::cos(robot.yaw), s = std::sin(robot.yaw);
  LabeledPoints out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const Vec2 d = p.position - robot.position();
    out.push_back({{c * d.x + s * d.y, -s * d.x + c * d.y}, p.label});
  }
  return out;
}

/// Robot-frame point to crop cell; nullopt outside the crop.
inline std::optional<Cell> crop_cell(const GridSpec& spec, Vec2 p) {
  const double cell = spec.cell_size();
  if (!(p.x >= 0.0 && p.x < spec.forward_extent)) return std::nullopt;
  const double lat = spec.lateral_extent / 2.0 - p.y;
  if (!(lat >= 0.0 && lat < spec.lateral_extent)) return std::nullopt;
  const int col = std::min(static_cast<int>(p.x / cell), spec.resolution - 1);
  const int row = std::min(static_cast<int>(lat / cell), spec.resolution - 1);
  return Cell{row, col};
}

/// Robot-frame center of a crop cell.
inline Vec2 crop_cell_center(const GridSpec& spec, Cell c) {
  const double cell = spec.cell_size();
  return {(c.col + 0.5) * cell, spec.lateral_extent / 2.0 - (c.row + 0.5) * cell};
}

/// Signed point count per cell (obstacle +1, floor -1), clipped to
/// +-clip_counts, then scaled by m.
inline LogOddsGrid bin_points(const LabeledPoints& robot_frame_points, const GridSpec& spec,
                              const OccupancyConfig& cfg) {
  Grid<int> counts(spec.resolution, spec.resolution, 0);
  for (const auto& p : robot_frame_points) {
    const auto cell = crop_cell(spec, p.position);
    if (!cell) continue;
    counts.at(cell->row, cell->col) += p.label == PointLabel::obstacle ? 1 : -1;
  }
  LogOddsGrid out(spec);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int clipped = std::clamp(counts.data[i], -cfg.clip_counts, cfg.clip_counts);
    out.values.data[i] = static_cast<float>(cfg.m * clipped);
  }
  return out;
}

/// max(|a|, |b|, |c|) * sign(a + b + c) with sign(0) = 0.
///
/// The sum is taken in double over the values sorted ascending, so the result
/// does not depend on argument order.
inline float fuse_value(float a, float b, float c) {
  float v[3] = {a, b, c};
  std::sort(v, v + 3);
  const double sum = (static_cast<double>(v[0]) + v[1]) + v[2];
  const float mag = std::max({std::fabs(a), std::fabs(b), std::fabs(c)});
  if (sum > 0.0) return mag;
  if (sum < 0.0) return -mag;
  return 0.0f;
}

inline LogOddsGrid fuse3(const LogOddsGrid& oc, const LogOddsGrid& ol, const LogOddsGrid& orr) {
  if (!(oc.spec == ol.spec && oc.spec == orr.spec) || oc.values.size() != ol.values.size() ||
      oc.values.size() != orr.values.size())
    throw Error(ErrorKind::data_format, "fuse3: grid specs differ");
  LogOddsGrid out(oc.spec);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values.data[i] = fuse_value(oc.values.data[i], ol.values.data[i], orr.values.data[i]);
  return out;
}

inline float logodds_to_prob(float l) { return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(l)))); }

inline float prob_to_logodds(float p, double max_logodds = 10.0) {
  const double pd = p;
  if (!(pd > 0.0)) return static_cast<float>(-max_logodds);
  if (!(pd < 1.0)) return static_cast<float>(max_logodds);
  return static_cast<float>(std::clamp(std::log(pd / (1.0 - pd)), -max_logodds, max_logodds));
}

inline ProbGrid logodds_to_prob(const LogOddsGrid& g) {
  ProbGrid out(g.spec);
  std::transform(g.values.data.begin(), g.values.data.end(), out.values.data.begin(),
                 [](float l) { return logodds_to_prob(l); });
  return out;
}

inline LogOddsGrid prob_to_logodds(const ProbGrid& g, double max_logodds = 10.0) {
  LogOddsGrid out(g.spec);
  std::transform(g.values.data.begin(), g.values.data.end(), out.values.data.begin(),
                 [&](float p) { return prob_to_logodds(p, max_logodds); });
  return out;
}

enum class CellState : std::uint8_t { free, occupied, unknown };

inline CellState classify(double p, const OccupancyConfig& cfg) {
  if (p < cfg.free_threshold) return CellState::free;
  if (p >= cfg.occupied_threshold) return CellState::occupied;
  return CellState::unknown;
}

inline Grid<CellState> classify(const ProbGrid& g, const OccupancyConfig& cfg) {
  Grid<CellState> out(g.values.rows, g.values.cols, CellState::unknown);
  for (std::size_t i = 0; i < g.values.size(); ++i) out.data[i] = classify(g.values.data[i], cfg);
  return out;
}

inline bool is_known(double p, const OccupancyConfig& cfg) { return classify(p, cfg) != CellState::unknown; }

/// Camera at `camera` observes the plan; points land in the robot frame of `robot`.
inline LabeledPoints observe(const FloorPlan& plan, const Pose2D& camera, const Pose2D& robot,
                             const CameraIntrinsics& intr) {
  return to_robot_frame(sample_points(cast_rays(plan, camera, intr), camera, intr), robot);
}

inline LogOddsGrid camera_map(const FloorPlan& plan, const Pose2D& camera, const Pose2D& robot,
                              const CameraIntrinsics& intr, const GridSpec& spec, const OccupancyConfig& cfg) {
  return bin_points(observe(plan, camera, robot, intr), spec, cfg);
}

}  // namespace occnav
