#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "occnav/error.hpp"
#include "occnav/geometry.hpp"
#include "occnav/worldgen.hpp"

namespace occnav {

/// Planar depth camera. A column of depth pixels on an obstacle face all
/// project to the same top-down cell, which obstacle_points_per_hit models.
struct CameraIntrinsics {
  double hfov_deg = 90.0;
  int ray_count = 256;
  double max_range = 6.0;
  double sample_step = 0.05;
  int obstacle_points_per_hit = 4;

  void validate() const {
    if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) throw config_error("intrinsics: hfov must be in (0, 180)");
    if (ray_count < 2) throw config_error("intrinsics: ray_count must be >= 2");
    if (!(max_range > 0.0) || !(sample_step > 0.0))
      throw config_error("intrinsics: max_range and sample_step must be positive");
    if (obstacle_points_per_hit < 1) throw config_error("intrinsics: obstacle_points_per_hit must be >= 1");
  }
};

enum class HitLabel : std::uint8_t { none, wall, obstacle };

struct RayHit {
  double angle = 0.0;  // relative to the camera axis
  std::optional<double> distance;
  HitLabel label = HitLabel::none;
};

enum class PointLabel : std::uint8_t { floor, obstacle };

struct LabeledPoint {
  Vec2 position;
  PointLabel label = PointLabel::floor;
};

using LabeledPoints = std::vector<LabeledPoint>;

inline double ray_angle(const CameraIntrinsics& intr, int i) {
  const double half = deg2rad(intr.hfov_deg) / 2.0;
  return -half + deg2rad(intr.hfov_deg) * static_cast<double>(i) / static_cast<double>(intr.ray_count - 1);
}

/// Exact first intersection of every ray with the plan's solids.
inline std::vector<RayHit> cast_rays(const FloorPlan& plan, const Pose2D& pose, const CameraIntrinsics& intr) {
  const Vec2 origin = pose.position();
  if (plan.is_solid(origin)) throw Error(ErrorKind::usage, "cast_rays: camera pose lies inside a solid");
  const auto solids = plan.solids();
  std::vector<RayHit> hits;
  hits.reserve(intr.ray_count);
  for (int i = 0; i < intr.ray_count; ++i) {
    RayHit hit;
    hit.angle = ray_angle(intr, i);
    const double a = pose.yaw + hit.angle;
    const Vec2 dir{std::cos(a), std::sin(a)};
    double best = std::numeric_limits<double>::infinity();
    HitLabel label = HitLabel::none;
    for (const auto& s : solids) {
      const double t = ray_rect_entry(origin, dir, s.rect);
      if (t >= 0.0 && t < best) {
        best = t;
        label = s.kind == SolidKind::wall ? HitLabel::wall : HitLabel::obstacle;
      }
    }
    if (best <= intr.max_range) {
      hit.distance = best;
      hit.label = label;
    }
    hits.push_back(hit);
  }
  return hits;
}

/// Floor points every sample_step along each ray, stopping half a step short
/// of the hit (or at max_range), plus obstacle points at the hit.
inline LabeledPoints sample_points(const std::vector<RayHit>& hits, const Pose2D& pose, const CameraIntrinsics& intr) {
  LabeledPoints out;
  const Vec2 origin = pose.position();
  for (const auto& h : hits) {
    const double a = pose.yaw + h.angle;
    const Vec2 dir{std::cos(a), std::sin(a)};
    const double limit = h.distance ? *h.distance - intr.sample_step / 2.0 : intr.max_range;
    const int n = limit > 0.0 ? static_cast<int>(std::floor(limit / intr.sample_step + 1e-9)) : 0;
    for (int k = 1; k <= n; ++k) out.push_back({origin + (k * intr.sample_step) * dir, PointLabel::floor});
    if (h.distance)
      for (int k = 0; k < intr.obstacle_points_per_hit; ++k)
        out.push_back({origin + *h.distance * dir, PointLabel::obstacle});
  }
  return out;
}

}  // namespace occnav
