#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace occnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Planar pose. yaw is counterclockwise from +x, kept in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(normalize_angle(yaw_)) {}

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1] (closed).
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Euclidean gap between two rectangles (0 when they touch or overlap).
inline double rect_gap(const Rect& a, const Rect& b) {
  const double dx = std::max({0.0, b.x0 - a.x1, a.x0 - b.x1});
  const double dy = std::max({0.0, b.y0 - a.y1, a.y0 - b.y1});
  return std::hypot(dx, dy);
}

/// Smallest t >= 0 at which origin + t*dir enters the rectangle, or a negative
/// value if the ray misses. Slab method; dir need not be normalized.
inline double ray_rect_entry(Vec2 origin, Vec2 dir, const Rect& r) {
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  const double lo[2] = {r.x0, r.y0};
  const double hi[2] = {r.x1, r.y1};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (o[k] < lo[k] || o[k] > hi[k]) return -1.0;
      continue;
    }
    double t0 = (lo[k] - o[k]) / d[k];
    double t1 = (hi[k] - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return -1.0;
  }
  return t_near;
}

}  // namespace occnav
