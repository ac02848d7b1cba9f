#include "barc/car.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace barc {

CarState CarState::from_vector(std::span<const double> s) {
  if (s.size() != 5) throw std::runtime_error("CarState: expected 5 components");
  return CarState{s[0], s[1], wrap_angle(s[2]), s[3], s[4]};
}

bool car_goal_test(const CarState& s, const CarConfig& cfg) {
  const double dx = s.x - cfg.goal.x;
  const double dy = s.y - cfg.goal.y;
  if (dx * dx + dy * dy > cfg.goal_pos_tol * cfg.goal_pos_tol) return false;
  if (std::abs(s.v - cfg.goal.v) > cfg.goal_speed_tol) return false;
  return std::abs(wrap_angle(s.theta - cfg.goal.theta)) <= cfg.goal_heading_tol;
}

CarStepOutput car_step(const CarState& s, double a_v, double a_kappa, const CarConfig& cfg,
                       std::mt19937_64& rng) {
  a_v = std::clamp(a_v, -cfg.max_accel, cfg.max_accel);
  a_kappa = std::clamp(a_kappa, -cfg.max_kappa_rate, cfg.max_kappa_rate);

  double d_v = 0.0, d_v_ctrl = 0.0, d_k_ctrl = 0.0, d_a_kappa = 1.0;
  switch (cfg.mismatch) {
    case CarMismatch::None:
      break;
    case CarMismatch::VelocityNoise: {
      std::normal_distribution<double> noise(0.0, cfg.velocity_noise_std);
      d_v = noise(rng);
      break;
    }
    case CarMismatch::ControlBias: {
      std::normal_distribution<double> noise(cfg.bias_mean, cfg.bias_std);
      d_v_ctrl = noise(rng);
      d_k_ctrl = noise(rng);
      break;
    }
    case CarMismatch::Oversteer:
      d_a_kappa = cfg.oversteer_factor;
      break;
  }

  // Velocity noise perturbs propagation only: add before integrating,
  // remove from the resulting speed afterwards.
  std::vector<double> x0{s.x, s.y, s.theta, s.v + d_v, s.kappa};
  const auto deriv = [&](const std::vector<double>& z) {
    return std::vector<double>{z[3] * std::cos(z[2]), z[3] * std::sin(z[2]), z[4],
                               a_v + d_v_ctrl, d_a_kappa * (a_kappa + d_k_ctrl)};
  };
  std::vector<double> x1 = rk4_step(std::span<const double>(x0), cfg.dt, deriv);
  x1[3] -= d_v;

  CarStepOutput out;
  out.next = CarState{x1[0], x1[1], wrap_angle(x1[2]), x1[3], x1[4]};
  for (double c : x1) {
    if (!std::isfinite(c)) throw std::runtime_error("simulator blow-up: car state non-finite");
  }

  const bool goal = car_goal_test(out.next, cfg);
  out.reward = goal ? 1.0 : 0.0;
  out.terminal = goal ? Terminal::Goal : Terminal::None;
  if (cfg.smoothing_coef != 0.0) {
    const double dx = out.next.x - cfg.goal.x;
    const double dy = out.next.y - cfg.goal.y;
    out.reward -= cfg.smoothing_coef * (dx * dx + dy * dy);
  }
  return out;
}

std::vector<double> CarEnv::reset(std::span<const double> state) {
  state_ = CarState::from_vector(state);
  steps_ = 0;
  return observe();
}

std::vector<double> CarEnv::physical_action(std::span<const double> normalized) const {
  const double a0 = std::clamp(normalized[0], -1.0, 1.0);
  const double a1 = std::clamp(normalized[1], -1.0, 1.0);
  return {a0 * cfg_.max_accel, a1 * cfg_.max_kappa_rate};
}

StepResult CarEnv::step(std::span<const double> normalized_action) {
  return step_physical(physical_action(normalized_action));
}

StepResult CarEnv::step_physical(std::span<const double> physical_action) {
  CarStepOutput out = car_step(state_, physical_action[0], physical_action[1], cfg_, rng_);
  state_ = out.next;
  ++steps_;

  StepResult res;
  res.obs = observe();
  res.reward = out.reward;
  res.terminal = out.terminal;
  if (res.terminal == Terminal::None && steps_ >= cfg_.horizon) res.terminal = Terminal::Timeout;
  return res;
}

bool CarEnv::goal_test(std::span<const double> state) const {
  return car_goal_test(CarState::from_vector(state), cfg_);
}

bool CarEnv::valid_start(std::span<const double> s) const {
  if (std::abs(s[0]) > cfg_.workspace_halfwidth || std::abs(s[1]) > cfg_.workspace_halfwidth) {
    return false;
  }
  return std::abs(s[3]) <= cfg_.v_limit && std::abs(s[4]) <= cfg_.kappa_limit;
}

namespace {

// min over c in [lo, hi] of coef * c, and the matching dissipation bound.
inline double min_affine(double coef, double lo, double hi) {
  return coef >= 0.0 ? coef * lo : coef * hi;
}

inline double range_mag(double lo, double hi) { return std::max(std::abs(lo), std::abs(hi)); }

}  // namespace

CurriculumModel car_curriculum(const CarCurriculumConfig& cfg) {
  const double pi = 3.14159265358979323846;
  CurriculumModel model;
  model.map = StateMap::identity(5);

  const double v_mag = range_mag(cfg.v_lo, cfg.v_hi);
  const double k_mag = range_mag(cfg.kappa_lo, cfg.kappa_hi);

  // (x, theta): xdot = v cos(theta), thetadot = kappa; v and kappa are
  // fictitious controls with static interval bounds.
  Subsystem xt;
  xt.name = "x_theta";
  xt.axes = {0, 2};
  xt.grid = Grid::plane(-cfg.xy_halfwidth, cfg.xy_halfwidth, cfg.n_2d, -pi, pi, cfg.n_2d, false, true);
  xt.fictitious_bounds["v"] = {cfg.v_lo, cfg.v_hi};
  xt.fictitious_bounds["kappa"] = {cfg.kappa_lo, cfg.kappa_hi};
  xt.hamiltonian.dim = 2;
  xt.hamiltonian.eval = [cfg, v_mag, k_mag](const Vec2& x, const Vec2& lambda) {
    const double c = std::cos(x[1]);
    HamiltonianEval e;
    e.H = min_affine(lambda[0] * c, cfg.v_lo, cfg.v_hi) +
          min_affine(lambda[1], cfg.kappa_lo, cfg.kappa_hi);
    e.alpha = {v_mag * std::abs(c), k_mag};
    return e;
  };

  Subsystem yt = xt;
  yt.name = "y_theta";
  yt.axes = {1, 2};
  yt.hamiltonian.eval = [cfg, v_mag, k_mag](const Vec2& x, const Vec2& lambda) {
    const double s = std::sin(x[1]);
    HamiltonianEval e;
    e.H = min_affine(lambda[0] * s, cfg.v_lo, cfg.v_hi) +
          min_affine(lambda[1], cfg.kappa_lo, cfg.kappa_hi);
    e.alpha = {v_mag * std::abs(s), k_mag};
    return e;
  };

  Subsystem v_sub;
  v_sub.name = "v";
  v_sub.axes = {3};
  v_sub.grid = Grid::line(cfg.v_lo, cfg.v_hi, cfg.n_1d);
  v_sub.hamiltonian.dim = 1;
  v_sub.hamiltonian.eval = [a = cfg.max_accel](const Vec2&, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = -a * std::abs(lambda[0]);
    e.alpha = {a, 0.0};
    return e;
  };

  Subsystem k_sub;
  k_sub.name = "kappa";
  k_sub.axes = {4};
  k_sub.grid = Grid::line(cfg.kappa_lo, cfg.kappa_hi, cfg.n_1d);
  k_sub.hamiltonian.dim = 1;
  k_sub.hamiltonian.eval = [a = cfg.max_kappa_rate](const Vec2&, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = -a * std::abs(lambda[0]);
    e.alpha = {a, 0.0};
    return e;
  };

  model.subsystems = {xt, yt, v_sub, k_sub};
  return model;
}

std::vector<CarState> behind_goal_starts(const CarState& goal, int count, std::uint64_t seed,
                                         const BehindGoalConfig& cfg) {
  if (count < 1) throw std::runtime_error("behind_goal_starts: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Direction opposite the goal velocity vector (heading theta, speed > 0).
  const double back = wrap_angle(goal.theta + 3.14159265358979323846);
  std::vector<CarState> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double beta = (2.0 * unif(rng) - 1.0) * cfg.cone_half_angle;
    const double r2 = cfg.radius_min * cfg.radius_min +
                      unif(rng) * (cfg.radius_max * cfg.radius_max - cfg.radius_min * cfg.radius_min);
    const double r = std::sqrt(r2);  // uniform in sector area
    CarState s;
    s.x = goal.x + r * std::cos(back + beta);
    s.y = goal.y + r * std::sin(back + beta);
    s.theta = wrap_angle(goal.theta + (2.0 * unif(rng) - 1.0) * cfg.heading_half_angle);
    s.v = 0.0;
    s.kappa = 0.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace barc
