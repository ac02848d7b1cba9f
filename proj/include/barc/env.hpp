#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace barc {

enum class Terminal { None, Goal, Failure, Timeout };

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  Terminal terminal = Terminal::None;
};

/// Axis-aligned rectangular obstacle in the workspace plane.
struct Rect {
  double x_lo = 0.0, y_lo = 0.0, x_hi = 0.0, y_hi = 0.0;
};

bool point_in_rect(const Rect& r, double x, double y);

/// Earliest parameter t in [0,1] at which the segment p0 -> p1 touches the
/// rectangle, or a negative value when it misses. Starting inside gives 0.
double segment_rect_entry(const Rect& r, double x0, double y0, double x1, double y1);

/// Earliest t in [0,1] at which the segment leaves the box [lo,hi]^2, or a
/// negative value if it stays inside.
double segment_box_exit(double lo, double hi, double x0, double y0, double x1, double y1);

/// Distance along the ray (origin, angle) to the nearest obstacle or to the
/// workspace wall, capped at max_range.
double ray_distance(double ox, double oy, double angle, const std::vector<Rect>& obstacles,
                    double wall_lo, double wall_hi, double max_range);

/// Episode-stepped simulator consumed by the rollout collector. Actions at
/// the interface are normalized to [-1,1]^m and mapped affinely onto the
/// physical control bounds; `step_physical` bypasses the mapping (replay).
/// Each env owns its noise stream, reseeded per episode.
class Env {
 public:
  virtual ~Env() = default;

  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual int state_dim() const = 0;
  virtual int horizon() const = 0;

  virtual void seed(std::uint64_t s) = 0;
  virtual std::vector<double> reset(std::span<const double> state) = 0;
  virtual StepResult step(std::span<const double> normalized_action) = 0;
  virtual StepResult step_physical(std::span<const double> physical_action) = 0;
  virtual std::vector<double> physical_action(std::span<const double> normalized) const = 0;

  virtual std::vector<double> state() const = 0;
  virtual std::vector<double> observe() const = 0;
  virtual bool goal_test(std::span<const double> state) const = 0;
  /// Start-state validity for curriculum sampling (state limits, obstacles).
  virtual bool valid_start(std::span<const double> state) const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>()>;

// Fourth-order Runge-Kutta step of dx/dt = f(x) over dt, fixed step.
template <typename Deriv>
std::vector<double> rk4_step(std::span<const double> x, double dt, const Deriv& f) {
  const std::size_t n = x.size();
  std::vector<double> k1 = f(std::vector<double>(x.begin(), x.end()));
  std::vector<double> tmp(n);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  std::vector<double> k2 = f(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  std::vector<double> k3 = f(tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  std::vector<double> k4 = f(tmp);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace barc
