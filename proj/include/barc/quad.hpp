#pragma once

#include <cstdint>

#include "barc/env.hpp"
#include "barc/reach.hpp"

namespace barc {

/// Planar quadrotor. State vector order: (x, y, v_x, v_y, phi, omega).
struct QuadState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double phi = 0.0;  // wrapped to [-pi, pi)
  double omega = 0.0;

  std::vector<double> to_vector() const { return {x, y, vx, vy, phi, omega}; }
  static QuadState from_vector(std::span<const double> s);
};

struct QuadConfig {
  double dt = 0.05;
  int horizon = 200;

  double mass = 1.0;
  double gravity = 9.81;
  double arm_length = 0.25;  // l
  double inertia = 0.01;     // I_yy
  double drag_v = 0.25;      // C_D^v
  double drag_phi = 0.02;    // C_D^phi

  double thrust_min = 0.0;
  // Max total thrust is twice the weight => per-rotor cap m*g.
  double thrust_max = 9.81;

  double workspace_lo = 0.0;
  double workspace_hi = 5.0;
  double goal_x = 4.0;  // goal region {x >= goal_x, y >= goal_y}
  double goal_y = 4.0;
  std::vector<Rect> obstacles{{0.0, 2.0, 3.0, 2.4}, {3.8, 2.8, 5.0, 3.2}};

  double control_cost = 0.01;
  double goal_reward = 1000.0;
  double max_range = 5.0;  // rangefinder cap

  // Start-validity limits matching the curriculum grids.
  double v_limit = 5.0;
  double omega_limit = 5.0;

  double smoothing_coef = 0.0;  // adds -c * squared distance to goal corner center

  double collision_penalty() const {
    return horizon * control_cost * 2.0 * thrust_max * thrust_max;
  }
};

struct QuadStepOutput {
  QuadState next;
  double reward = 0.0;
  Terminal terminal = Terminal::None;
};

/// One simulator step with physical rotor thrusts (clipped to the bounds).
/// Collision is tested along the straight-line position interpolation of
/// the step against obstacles and walls; entering the goal region earlier
/// on that segment wins over a later collision.
QuadStepOutput quad_step(const QuadState& s, double t1, double t2, const QuadConfig& cfg);

/// Observation: the 6-D state followed by 8 body-frame rangefinder readings
/// at angles phi + k*45 degrees.
std::vector<double> quad_observe(const QuadState& s, const QuadConfig& cfg);

bool quad_goal_test(const QuadState& s, const QuadConfig& cfg);

class QuadEnv final : public Env {
 public:
  explicit QuadEnv(const QuadConfig& cfg) : cfg_(cfg) {}

  int obs_dim() const override { return 14; }
  int act_dim() const override { return 2; }
  int state_dim() const override { return 6; }
  int horizon() const override { return cfg_.horizon; }

  void seed(std::uint64_t) override {}  // deterministic dynamics
  std::vector<double> reset(std::span<const double> state) override;
  StepResult step(std::span<const double> normalized_action) override;
  StepResult step_physical(std::span<const double> physical_action) override;
  std::vector<double> physical_action(std::span<const double> normalized) const override;

  std::vector<double> state() const override { return state_.to_vector(); }
  std::vector<double> observe() const override { return quad_observe(state_, cfg_); }
  bool goal_test(std::span<const double> state) const override;
  bool valid_start(std::span<const double> state) const override;

  const QuadConfig& config() const { return cfg_; }

 private:
  QuadConfig cfg_;
  QuadState state_{};
  int steps_ = 0;
};

struct QuadCurriculumConfig {
  int n_2d = 101;
  int n_1d = 201;
  double v_lo = -5.0, v_hi = 5.0;          // v_x/v_y grids and fictitious bounds
  double omega_lo = -5.0, omega_hi = 5.0;  // omega grid and fictitious bound
  double xy_lo = 0.0, xy_hi = 5.0;
};

/// Appendix-style decomposition: (v_x, phi), (v_y, phi), x, y, omega, with
/// omega fictitious in the attitude-velocity subsystems and v_x/v_y
/// fictitious in the position subsystems.
CurriculumModel quad_curriculum(const QuadConfig& env_cfg, const QuadCurriculumConfig& cfg);

}  // namespace barc
