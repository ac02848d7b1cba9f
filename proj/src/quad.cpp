#include "barc/quad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "barc/grid.hpp"

namespace barc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

QuadState QuadState::from_vector(std::span<const double> s) {
  if (s.size() != 6) throw std::runtime_error("QuadState: expected 6 components");
  return QuadState{s[0], s[1], s[2], s[3], wrap_angle(s[4]), s[5]};
}

bool quad_goal_test(const QuadState& s, const QuadConfig& cfg) {
  return s.x >= cfg.goal_x && s.y >= cfg.goal_y;
}

QuadStepOutput quad_step(const QuadState& s, double t1, double t2, const QuadConfig& cfg) {
  t1 = std::clamp(t1, cfg.thrust_min, cfg.thrust_max);
  t2 = std::clamp(t2, cfg.thrust_min, cfg.thrust_max);

  const double m = cfg.mass, g = cfg.gravity, l = cfg.arm_length, iyy = cfg.inertia;
  const double cdv = cfg.drag_v, cdphi = cfg.drag_phi;
  // State layout inside the integrator: (x, y, vx, vy, phi, omega).
  const auto deriv = [&](const std::vector<double>& z) {
    const double sin_phi = std::sin(z[4]);
    const double cos_phi = std::cos(z[4]);
    return std::vector<double>{
        z[2],
        z[3],
        -cdv / m * z[2] - (t1 + t2) / m * sin_phi,
        -(m * g + cdv * z[3]) / m + (t1 + t2) / m * cos_phi,
        z[5],
        -cdphi / iyy * z[5] - l / iyy * t1 + l / iyy * t2,
    };
  };
  const std::vector<double> x0 = s.to_vector();
  std::vector<double> x1 = rk4_step(std::span<const double>(x0), cfg.dt, deriv);
  for (double c : x1) {
    if (!std::isfinite(c)) throw std::runtime_error("simulator blow-up: quad state non-finite");
  }

  QuadStepOutput out;
  out.next = QuadState{x1[0], x1[1], x1[2], x1[3], wrap_angle(x1[4]), x1[5]};
  out.reward = -cfg.control_cost * (t1 * t1 + t2 * t2);

  // Earliest goal entry vs earliest collision along the step's line segment.
  const double gx0 = s.x, gy0 = s.y, gx1 = out.next.x, gy1 = out.next.y;
  double t_goal = -1.0;
  {
    const Rect goal_rect{cfg.goal_x, cfg.goal_y, std::numeric_limits<double>::max(),
                         std::numeric_limits<double>::max()};
    t_goal = segment_rect_entry(goal_rect, gx0, gy0, gx1, gy1);
  }
  double t_coll = segment_box_exit(cfg.workspace_lo, cfg.workspace_hi, gx0, gy0, gx1, gy1);
  for (const Rect& r : cfg.obstacles) {
    const double t = segment_rect_entry(r, gx0, gy0, gx1, gy1);
    if (t >= 0.0 && (t_coll < 0.0 || t < t_coll)) t_coll = t;
  }

  if (t_goal >= 0.0 && (t_coll < 0.0 || t_goal <= t_coll)) {
    out.terminal = Terminal::Goal;
    out.reward += cfg.goal_reward;
  } else if (t_coll >= 0.0) {
    out.terminal = Terminal::Failure;
    out.reward -= cfg.collision_penalty();
  }

  if (cfg.smoothing_coef != 0.0) {
    const double cx = 0.5 * (cfg.goal_x + cfg.workspace_hi);
    const double cy = 0.5 * (cfg.goal_y + cfg.workspace_hi);
    const double dx = out.next.x - cx;
    const double dy = out.next.y - cy;
    out.reward -= cfg.smoothing_coef * (dx * dx + dy * dy);
  }
  return out;
}

std::vector<double> quad_observe(const QuadState& s, const QuadConfig& cfg) {
  for (double c : s.to_vector()) {
    if (!std::isfinite(c)) throw std::runtime_error("quad_observe: non-finite state");
  }
  std::vector<double> obs = s.to_vector();
  obs.reserve(14);
  for (int k = 0; k < 8; ++k) {
    const double angle = s.phi + k * (kPi / 4.0);
    obs.push_back(ray_distance(s.x, s.y, angle, cfg.obstacles, cfg.workspace_lo, cfg.workspace_hi,
                               cfg.max_range));
  }
  return obs;
}

std::vector<double> QuadEnv::reset(std::span<const double> state) {
  state_ = QuadState::from_vector(state);
  steps_ = 0;
  return observe();
}

std::vector<double> QuadEnv::physical_action(std::span<const double> normalized) const {
  // [-1,1] maps onto [thrust_min, thrust_max]; 0 commands mid-range thrust.
  const auto map = [&](double a) {
    a = std::clamp(a, -1.0, 1.0);
    return cfg_.thrust_min + 0.5 * (a + 1.0) * (cfg_.thrust_max - cfg_.thrust_min);
  };
  return {map(normalized[0]), map(normalized[1])};
}

StepResult QuadEnv::step(std::span<const double> normalized_action) {
  return step_physical(physical_action(normalized_action));
}

StepResult QuadEnv::step_physical(std::span<const double> physical_action) {
  QuadStepOutput out = quad_step(state_, physical_action[0], physical_action[1], cfg_);
  state_ = out.next;
  ++steps_;

  StepResult res;
  res.obs = observe();
  res.reward = out.reward;
  res.terminal = out.terminal;
  if (res.terminal == Terminal::None && steps_ >= cfg_.horizon) res.terminal = Terminal::Timeout;
  return res;
}

bool QuadEnv::goal_test(std::span<const double> state) const {
  return quad_goal_test(QuadState::from_vector(state), cfg_);
}

bool QuadEnv::valid_start(std::span<const double> s) const {
  if (s[0] < cfg_.workspace_lo || s[0] > cfg_.workspace_hi) return false;
  if (s[1] < cfg_.workspace_lo || s[1] > cfg_.workspace_hi) return false;
  if (std::abs(s[2]) > cfg_.v_limit || std::abs(s[3]) > cfg_.v_limit) return false;
  if (std::abs(s[5]) > cfg_.omega_limit) return false;
  for (const Rect& r : cfg_.obstacles) {
    if (point_in_rect(r, s[0], s[1])) return false;
  }
  return true;
}

namespace {

inline double min_affine(double coef, double lo, double hi) {
  return coef >= 0.0 ? coef * lo : coef * hi;
}

inline double range_mag(double lo, double hi) { return std::max(std::abs(lo), std::abs(hi)); }

}  // namespace

CurriculumModel quad_curriculum(const QuadConfig& env_cfg, const QuadCurriculumConfig& cfg) {
  CurriculumModel model;
  model.map = StateMap::identity(6);

  const double m = env_cfg.mass, g = env_cfg.gravity;
  const double cdv = env_cfg.drag_v, cdphi = env_cfg.drag_phi;
  const double l = env_cfg.arm_length, iyy = env_cfg.inertia;
  const double tsum_lo = 2.0 * env_cfg.thrust_min;
  const double tsum_hi = 2.0 * env_cfg.thrust_max;
  const double tdiff = env_cfg.thrust_max - env_cfg.thrust_min;
  const double omega_mag = range_mag(cfg.omega_lo, cfg.omega_hi);
  const double v_mag = range_mag(cfg.v_lo, cfg.v_hi);

  // (v_x, phi): vxdot = -Cdv/m vx - (T1+T2)/m sin(phi), phidot = omega
  // with omega fictitious; thrusts enter only through their sum.
  Subsystem vxphi;
  vxphi.name = "vx_phi";
  vxphi.axes = {2, 4};
  vxphi.grid = Grid::plane(cfg.v_lo, cfg.v_hi, cfg.n_2d, -kPi, kPi, cfg.n_2d, false, true);
  vxphi.fictitious_bounds["omega"] = {cfg.omega_lo, cfg.omega_hi};
  vxphi.hamiltonian.dim = 2;
  vxphi.hamiltonian.eval = [=](const Vec2& x, const Vec2& lambda) {
    const double sin_phi = std::sin(x[1]);
    HamiltonianEval e;
    e.H = lambda[0] * (-cdv / m * x[0]) +
          min_affine(-lambda[0] * sin_phi / m, tsum_lo, tsum_hi) +
          min_affine(lambda[1], cfg.omega_lo, cfg.omega_hi);
    e.alpha = {cdv / m * std::abs(x[0]) + tsum_hi / m * std::abs(sin_phi), omega_mag};
    return e;
  };

  Subsystem vyphi;
  vyphi.name = "vy_phi";
  vyphi.axes = {3, 4};
  vyphi.grid = vxphi.grid;
  vyphi.fictitious_bounds["omega"] = {cfg.omega_lo, cfg.omega_hi};
  vyphi.hamiltonian.dim = 2;
  vyphi.hamiltonian.eval = [=](const Vec2& x, const Vec2& lambda) {
    const double cos_phi = std::cos(x[1]);
    HamiltonianEval e;
    e.H = lambda[0] * (-g - cdv / m * x[0]) +
          min_affine(lambda[0] * cos_phi / m, tsum_lo, tsum_hi) +
          min_affine(lambda[1], cfg.omega_lo, cfg.omega_hi);
    e.alpha = {g + cdv / m * std::abs(x[0]) + tsum_hi / m * std::abs(cos_phi), omega_mag};
    return e;
  };

  // x and y: single integrators driven by fictitious velocities.
  Subsystem x_sub;
  x_sub.name = "x";
  x_sub.axes = {0};
  x_sub.grid = Grid::line(cfg.xy_lo, cfg.xy_hi, cfg.n_1d);
  x_sub.fictitious_bounds["vx"] = {cfg.v_lo, cfg.v_hi};
  x_sub.hamiltonian.dim = 1;
  x_sub.hamiltonian.eval = [=](const Vec2&, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = min_affine(lambda[0], cfg.v_lo, cfg.v_hi);
    e.alpha = {v_mag, 0.0};
    return e;
  };

  Subsystem y_sub = x_sub;
  y_sub.name = "y";
  y_sub.axes = {1};
  y_sub.fictitious_bounds.clear();
  y_sub.fictitious_bounds["vy"] = {cfg.v_lo, cfg.v_hi};

  Subsystem w_sub;
  w_sub.name = "omega";
  w_sub.axes = {5};
  w_sub.grid = Grid::line(cfg.omega_lo, cfg.omega_hi, cfg.n_1d);
  w_sub.hamiltonian.dim = 1;
  w_sub.hamiltonian.eval = [=](const Vec2& x, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = lambda[0] * (-cdphi / iyy * x[0]) - std::abs(lambda[0]) * l / iyy * tdiff;
    e.alpha = {cdphi / iyy * std::abs(x[0]) + l / iyy * tdiff, 0.0};
    return e;
  };

  model.subsystems = {vxphi, vyphi, x_sub, y_sub, w_sub};
  return model;
}

}  // namespace barc
