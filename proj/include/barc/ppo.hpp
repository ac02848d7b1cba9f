#pragma once

#include <cstdint>
#include <map>

#include "barc/env.hpp"
#include "barc/policy.hpp"

namespace barc {

struct PpoConfig {
  double clip_eps = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 10;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  int steps_per_iter = 4000;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double grad_clip = 0.5;
  int workers = 1;

  void validate() const;
};

struct EpisodeData {
  std::vector<double> start_state;
  bool success = false;  // final terminal == Goal
  Terminal final_terminal = Terminal::None;
  double bootstrap_value = 0.0;  // V(s_T) at timeout, 0 at goal/failure
  std::vector<std::vector<double>> obs;  // raw observations, one per step
  std::vector<std::vector<double>> actions;
  std::vector<double> logp_old;
  std::vector<double> rewards;
  std::vector<double> values;

  int length() const { return static_cast<int>(rewards.size()); }
  double episode_return() const;
};

/// Episodes grouped with the observation-normalization snapshot they were
/// collected under; the update phase must normalize with the same snapshot
/// so importance ratios start at exactly 1.
struct RolloutBatch {
  std::vector<EpisodeData> episodes;
  RunningNorm norm_snapshot;
  int total_steps = 0;
};

struct SuccessStats {
  long trials = 0;
  long successes = 0;
  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

/// Per-start mastery bookkeeping, keyed by the exact state values issued by
/// the curriculum.
using SuccessMap = std::map<std::vector<double>, SuccessStats>;

/// Launch episodes round-robin over `starts` until at least `steps`
/// transitions are collected. Deterministic in `seed` (all per-episode
/// randomness is derived from the episode index, so the result is identical
/// for any worker count).
RolloutBatch collect_rollouts(const EnvFactory& factory,
                              const std::vector<std::vector<double>>& starts,
                              const PolicyBundle& bundle, int steps, std::uint64_t seed,
                              int workers = 1);

struct Advantages {
  std::vector<std::vector<double>> adv;  // per episode, per step
  std::vector<std::vector<double>> ret;  // adv + value
};

/// delta_t = r_t + gamma V_{t+1} - V_t, accumulated backward with decay
/// gamma*lambda inside each episode (bootstrap value closes the episode).
Advantages gae_advantages(const RolloutBatch& batch, double gamma, double lambda);

struct UpdateStats {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double max_initial_ratio_dev = 0.0;  // max |rho - 1| on the first minibatch
  double grad_norm = 0.0;              // pre-clip norm of the last minibatch
};

class Adam {
 public:
  Adam() = default;
  Adam(int dim, double lr) : lr_(lr), m_(static_cast<std::size_t>(dim), 0.0),
                             v_(static_cast<std::size_t>(dim), 0.0) {}

  void step(std::span<double> params, std::span<const double> grad);
  void set_learning_rate(double lr) { lr_ = lr; }

  // Exposed for trainer-state serialization.
  long t = 0;
  std::span<double> moments_m() { return m_; }
  std::span<double> moments_v() { return v_; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Clipped-surrogate update over the batch (advantages normalized per
/// batch). Throws on non-finite losses with ratio/advantage diagnostics.
UpdateStats ppo_update(PolicyBundle& bundle, Adam& optimizer, const RolloutBatch& batch,
                       const PpoConfig& cfg, std::uint64_t seed);

struct IterStats {
  int iteration = 0;
  int steps = 0;
  int episodes = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;
  UpdateStats update;
};

struct TrainResult {
  SuccessMap success_map;
  std::vector<IterStats> iters;
};

/// Interface point for the curriculum: any model-free learner that improves
/// a PolicyBundle from a start-state list fits here. Only PPO ships.
class PolicyOptimizer {
 public:
  virtual ~PolicyOptimizer() = default;
  virtual TrainResult train(PolicyBundle& bundle, const EnvFactory& factory,
                            const std::vector<std::vector<double>>& starts, int n_iters,
                            std::uint64_t seed) = 0;
};

class PpoOptimizer final : public PolicyOptimizer {
 public:
  PpoOptimizer(const PpoConfig& cfg, int param_count)
      : cfg_(cfg), adam_(param_count, cfg.learning_rate) {}

  /// TrainPolicy: n_iters collect/update cycles; aggregates per-start
  /// successes over every episode of every cycle.
  TrainResult train(PolicyBundle& bundle, const EnvFactory& factory,
                    const std::vector<std::vector<double>>& starts, int n_iters,
                    std::uint64_t seed) override;

  const PpoConfig& config() const { return cfg_; }
  Adam& optimizer_state() { return adam_; }

 private:
  PpoConfig cfg_;
  Adam adam_;
};

}  // namespace barc
