#pragma once

#include <cstdint>
#include <random>

#include "barc/env.hpp"
#include "barc/reach.hpp"

namespace barc {

/// 5-D car: planar position, heading, speed, and heading rate
/// (thetadot = kappa). State vector order: (x, y, theta, v, kappa).
struct CarState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // wrapped to [-pi, pi)
  double v = 0.0;
  double kappa = 0.0;

  std::vector<double> to_vector() const { return {x, y, theta, v, kappa}; }
  static CarState from_vector(std::span<const double> s);
};

enum class CarMismatch { None, VelocityNoise, ControlBias, Oversteer };

struct CarConfig {
  double dt = 0.05;
  int horizon = 100;
  double max_accel = 2.0;       // |a_v| bound, m/s^2
  double max_kappa_rate = 2.0;  // |a_kappa| bound, rad/s^2
  double workspace_halfwidth = 5.0;
  double v_limit = 2.0;      // |v| start validity bound (matches curriculum grid)
  double kappa_limit = 2.0;  // |kappa| start validity bound

  CarState goal{0.0, 0.0, 0.0, 0.5, 0.0};
  double goal_pos_tol = 0.1;      // m
  double goal_speed_tol = 0.1;    // m/s
  double goal_heading_tol = 0.1;  // rad

  CarMismatch mismatch = CarMismatch::None;
  double velocity_noise_std = 1.0;  // d_v ~ N(0, 1)
  double bias_mean = 0.3;           // control-bias mismatch
  double bias_std = 0.2;
  double oversteer_factor = 1.5;  // d_{a_kappa}

  double smoothing_coef = 0.0;  // adds -c * squared distance to goal position
};

struct CarStepOutput {
  CarState next;
  double reward = 0.0;
  Terminal terminal = Terminal::None;
};

bool car_goal_test(const CarState& s, const CarConfig& cfg);

/// One simulator step: clip physical controls, apply the configured
/// mismatch disturbances, integrate with RK4. Throws on a non-finite state.
CarStepOutput car_step(const CarState& s, double a_v, double a_kappa, const CarConfig& cfg,
                       std::mt19937_64& rng);

class CarEnv final : public Env {
 public:
  explicit CarEnv(const CarConfig& cfg) : cfg_(cfg) {}

  int obs_dim() const override { return 5; }
  int act_dim() const override { return 2; }
  int state_dim() const override { return 5; }
  int horizon() const override { return cfg_.horizon; }

  void seed(std::uint64_t s) override { rng_.seed(s); }
  std::vector<double> reset(std::span<const double> state) override;
  StepResult step(std::span<const double> normalized_action) override;
  StepResult step_physical(std::span<const double> physical_action) override;
  std::vector<double> physical_action(std::span<const double> normalized) const override;

  std::vector<double> state() const override { return state_.to_vector(); }
  std::vector<double> observe() const override { return state_.to_vector(); }
  bool goal_test(std::span<const double> state) const override;
  bool valid_start(std::span<const double> state) const override;

  const CarConfig& config() const { return cfg_; }

 private:
  CarConfig cfg_;
  CarState state_{};
  int steps_ = 0;
  std::mt19937_64 rng_{0};
};

/// Grid/bound settings for the car curriculum model (Appendix-style
/// decomposition (x,theta), (y,theta), v, kappa with fictitious v/kappa).
struct CarCurriculumConfig {
  int n_2d = 101;
  int n_1d = 201;
  double xy_halfwidth = 5.0;
  double v_lo = -2.0, v_hi = 2.0;          // grid extent and fictitious bound
  double kappa_lo = -2.0, kappa_hi = 2.0;  // grid extent and fictitious bound
  double max_accel = 2.0;
  double max_kappa_rate = 2.0;
};

CurriculumModel car_curriculum(const CarCurriculumConfig& cfg);

struct BehindGoalConfig {
  double radius_min = 0.25;
  double radius_max = 2.0;
  double cone_half_angle = 0.785398163397448279;  // pi/4
  double heading_half_angle = 0.785398163397448279;
};

/// Sample `count` zero-velocity, zero-curvature states in a disk sector
/// behind the goal velocity vector, headings within the cone around the
/// goal heading. Deterministic in the seed.
std::vector<CarState> behind_goal_starts(const CarState& goal, int count, std::uint64_t seed,
                                         const BehindGoalConfig& cfg = {});

}  // namespace barc
