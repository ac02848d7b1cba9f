#pragma once

#include "barc/env.hpp"
#include "barc/reach.hpp"

namespace barc {

/// 1-D point mass (double integrator) with a dense shaped reward; the
/// fast-running test task for the optimizer and the curriculum plumbing.
/// State vector order: (x, v).
struct PointMassConfig {
  double dt = 0.1;
  int horizon = 60;
  double max_accel = 1.0;
  double x_limit = 3.0;
  double v_limit = 2.0;
  double goal_x = 1.5;
  double goal_pos_tol = 0.1;
  double goal_vel_tol = 0.5;
  double goal_reward = 10.0;
  double dense_coef = 0.1;  // per-step shaping: -coef * (x - goal)^2
};

class PointMassEnv final : public Env {
 public:
  explicit PointMassEnv(const PointMassConfig& cfg) : cfg_(cfg) {}

  int obs_dim() const override { return 2; }
  int act_dim() const override { return 1; }
  int state_dim() const override { return 2; }
  int horizon() const override { return cfg_.horizon; }

  void seed(std::uint64_t) override {}
  std::vector<double> reset(std::span<const double> state) override;
  StepResult step(std::span<const double> normalized_action) override;
  StepResult step_physical(std::span<const double> physical_action) override;
  std::vector<double> physical_action(std::span<const double> normalized) const override;

  std::vector<double> state() const override { return {x_, v_}; }
  std::vector<double> observe() const override { return {x_, v_}; }
  bool goal_test(std::span<const double> state) const override;
  bool valid_start(std::span<const double> state) const override;

  const PointMassConfig& config() const { return cfg_; }

 private:
  PointMassConfig cfg_;
  double x_ = 0.0, v_ = 0.0;
  int steps_ = 0;
};

struct PointMassCurriculumConfig {
  int n_1d = 201;
  double x_lo = -3.0, x_hi = 3.0;
  double v_lo = -2.0, v_hi = 2.0;  // grid extent and fictitious bound
};

/// Two 1-D subsystems: x with fictitious velocity, v with the real control.
CurriculumModel pointmass_curriculum(const PointMassConfig& env_cfg,
                                     const PointMassCurriculumConfig& cfg);

}  // namespace barc
