#include "barc/pointmass.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace barc {

std::vector<double> PointMassEnv::reset(std::span<const double> state) {
  if (state.size() != 2) throw std::runtime_error("PointMassEnv: expected 2 state components");
  x_ = state[0];
  v_ = state[1];
  steps_ = 0;
  return observe();
}

std::vector<double> PointMassEnv::physical_action(std::span<const double> normalized) const {
  return {std::clamp(normalized[0], -1.0, 1.0) * cfg_.max_accel};
}

StepResult PointMassEnv::step(std::span<const double> normalized_action) {
  return step_physical(physical_action(normalized_action));
}

StepResult PointMassEnv::step_physical(std::span<const double> physical_action) {
  const double a = std::clamp(physical_action[0], -cfg_.max_accel, cfg_.max_accel);
  // Exact integration of the piecewise-constant acceleration.
  x_ += v_ * cfg_.dt + 0.5 * a * cfg_.dt * cfg_.dt;
  v_ += a * cfg_.dt;
  ++steps_;

  StepResult res;
  res.obs = observe();
  const double d = x_ - cfg_.goal_x;
  res.reward = -cfg_.dense_coef * d * d;
  if (goal_test(res.obs)) {
    res.reward += cfg_.goal_reward;
    res.terminal = Terminal::Goal;
  } else if (steps_ >= cfg_.horizon) {
    res.terminal = Terminal::Timeout;
  }
  return res;
}

bool PointMassEnv::goal_test(std::span<const double> state) const {
  return std::abs(state[0] - cfg_.goal_x) <= cfg_.goal_pos_tol &&
         std::abs(state[1]) <= cfg_.goal_vel_tol;
}

bool PointMassEnv::valid_start(std::span<const double> state) const {
  return std::abs(state[0]) <= cfg_.x_limit && std::abs(state[1]) <= cfg_.v_limit;
}

CurriculumModel pointmass_curriculum(const PointMassConfig& env_cfg,
                                     const PointMassCurriculumConfig& cfg) {
  CurriculumModel model;
  model.map = StateMap::identity(2);

  const double v_mag = std::max(std::abs(cfg.v_lo), std::abs(cfg.v_hi));

  Subsystem x_sub;
  x_sub.name = "x";
  x_sub.axes = {0};
  x_sub.grid = Grid::line(cfg.x_lo, cfg.x_hi, cfg.n_1d);
  x_sub.fictitious_bounds["v"] = {cfg.v_lo, cfg.v_hi};
  x_sub.hamiltonian.dim = 1;
  x_sub.hamiltonian.eval = [cfg, v_mag](const Vec2&, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = lambda[0] >= 0.0 ? lambda[0] * cfg.v_lo : lambda[0] * cfg.v_hi;
    e.alpha = {v_mag, 0.0};
    return e;
  };

  Subsystem v_sub;
  v_sub.name = "v";
  v_sub.axes = {1};
  v_sub.grid = Grid::line(cfg.v_lo, cfg.v_hi, cfg.n_1d);
  v_sub.hamiltonian.dim = 1;
  v_sub.hamiltonian.eval = [a = env_cfg.max_accel](const Vec2&, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = -a * std::abs(lambda[0]);
    e.alpha = {a, 0.0};
    return e;
  };

  model.subsystems = {x_sub, v_sub};
  return model;
}

}  // namespace barc
