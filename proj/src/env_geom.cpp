#include <algorithm>
#include <cmath>
#include <limits>

#include "barc/env.hpp"

namespace barc {

bool point_in_rect(const Rect& r, double x, double y) {
  return x >= r.x_lo && x <= r.x_hi && y >= r.y_lo && y <= r.y_hi;
}

namespace {

// Liang-Barsky clip of the segment against one slab; narrows [t0, t1].
bool clip_slab(double p0, double p1, double lo, double hi, double& t0, double& t1) {
  const double d = p1 - p0;
  if (std::abs(d) < 1e-300) return p0 >= lo && p0 <= hi;
  double ta = (lo - p0) / d;
  double tb = (hi - p0) / d;
  if (ta > tb) std::swap(ta, tb);
  t0 = std::max(t0, ta);
  t1 = std::min(t1, tb);
  return t0 <= t1;
}

}  // namespace

double segment_rect_entry(const Rect& r, double x0, double y0, double x1, double y1) {
  double t0 = 0.0, t1 = 1.0;
  if (!clip_slab(x0, x1, r.x_lo, r.x_hi, t0, t1)) return -1.0;
  if (!clip_slab(y0, y1, r.y_lo, r.y_hi, t0, t1)) return -1.0;
  return t0;
}

double segment_box_exit(double lo, double hi, double x0, double y0, double x1, double y1) {
  // Treat "outside the box" as hitting one of four half-plane walls.
  double best = -1.0;
  const double dx = x1 - x0, dy = y1 - y0;
  const auto consider = [&](double t) {
    if (t >= 0.0 && t <= 1.0 && (best < 0.0 || t < best)) best = t;
  };
  if (x0 < lo || x1 < lo) consider(std::abs(dx) > 0 ? (lo - x0) / dx : (x0 < lo ? 0.0 : -1.0));
  if (x0 > hi || x1 > hi) consider(std::abs(dx) > 0 ? (hi - x0) / dx : (x0 > hi ? 0.0 : -1.0));
  if (y0 < lo || y1 < lo) consider(std::abs(dy) > 0 ? (lo - y0) / dy : (y0 < lo ? 0.0 : -1.0));
  if (y0 > hi || y1 > hi) consider(std::abs(dy) > 0 ? (hi - y0) / dy : (y0 > hi ? 0.0 : -1.0));
  return best;
}

double ray_distance(double ox, double oy, double angle, const std::vector<Rect>& obstacles,
                    double wall_lo, double wall_hi, double max_range) {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  double best = max_range;

  // Walls: exit of the workspace box along the ray.
  const auto wall_hit = [&](double origin, double dir) {
    double t_exit = std::numeric_limits<double>::infinity();
    if (dir > 1e-300) t_exit = (wall_hi - origin) / dir;
    if (dir < -1e-300) t_exit = (wall_lo - origin) / dir;
    return t_exit;
  };
  best = std::min(best, wall_hit(ox, dx));
  best = std::min(best, wall_hit(oy, dy));

  for (const Rect& r : obstacles) {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    const auto clip = [&](double p, double d, double lo, double hi) {
      if (std::abs(d) < 1e-300) return p >= lo && p <= hi;
      double ta = (lo - p) / d;
      double tb = (hi - p) / d;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      return t0 <= t1;
    };
    if (!clip(ox, dx, r.x_lo, r.x_hi)) continue;
    if (!clip(oy, dy, r.y_lo, r.y_hi)) continue;
    if (t1 >= 0.0) best = std::min(best, std::max(t0, 0.0));
  }
  return std::max(0.0, std::min(best, max_range));
}

}  // namespace barc
