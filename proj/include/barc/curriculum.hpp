#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "barc/ppo.hpp"
#include "barc/reach.hpp"

namespace barc {

/// The six curriculum hyperparameters plus run-control knobs.
struct BarcConfig {
  int n_new = 200;
  int n_old = 100;
  double horizon_T = 0.1;  // seconds
  double c_pass = 0.5;
  double c_select = 0.5;
  int n_tp = 20;

  int max_outer_iters = 30;
  // The inner while loop has no exit of its own when the learner stalls; cap
  // it and move on to the next expansion rather than spinning forever.
  int max_inner_cycles = 25;
  int eval_episodes = 50;          // inner Evaluate panel size
  double metric_threshold = 0.95;  // stop once PerformanceMetric reaches this
  int metric_episodes_per_start = 1;
  double wall_clock_budget_s = 0.0;  // 0 = unlimited; checked between cycles

  ExpandOptions expand;

  void validate() const;
};

/// Everything task-specific the curriculum algorithms consume.
struct Task {
  std::string name;
  EnvFactory factory;
  CurriculumModel model;
  std::vector<double> goal_state;
  std::vector<std::vector<double>> rho0;  // canonical true start set
  ValidityPredicate validity;
  int obs_dim = 0;
  int act_dim = 0;
};

struct OuterRecord {
  int outer_iter = 0;
  int inner_cycles = 0;
  std::vector<std::int64_t> brs_nodes;  // per-component sublevel node counts
  double train_avg_reward = 0.0;        // mean episode return this outer iteration
  double eval_fraction = 0.0;           // last inner Evaluate result
  double perf_metric = 0.0;             // PerformanceMetric(rho0, pi)
  std::int64_t env_steps_total = 0;     // cumulative across the run
  int ppo_iters_total = 0;
  double wall_time_s = 0.0;  // cumulative
};

struct RunHistory {
  std::vector<OuterRecord> outer;
  std::vector<IterStats> ppo;
};

struct RunResult {
  PolicyBundle bundle;
  RunHistory history;
  bool reached_threshold = false;
};

/// Persistence/observation hooks; any of them may be empty.
struct RunHooks {
  std::function<void(const OuterRecord&)> on_outer_end;
  std::function<void(const IterStats&)> on_ppo_iter;
  std::function<void(const PolicyBundle&, const std::vector<std::vector<double>>& starts,
                     const std::vector<std::vector<double>>& old_starts, int outer_iter)>
      on_checkpoint;
  std::function<void(const DecomposedBRS&, int outer_iter)> on_brs;
};

/// Resume payload: state restored before re-entering the outer loop.
struct CurriculumState {
  std::vector<std::vector<double>> starts;
  std::vector<std::vector<double>> old_starts;
  int outer_iter = 0;
};

/// Success-thresholded state selection (strict inequality, per Algorithm 1).
std::vector<std::vector<double>> select(const SuccessMap& map, double c_select);

/// Mean-action evaluation: `episodes` rollouts round-robin over `starts`;
/// returns the goal-reaching fraction. Deterministic in the seed.
double evaluate(const EnvFactory& factory, const PolicyBundle& bundle,
                const std::vector<std::vector<double>>& starts, int episodes, std::uint64_t seed);

/// The full backward-reachability curriculum (Algorithm 1).
RunResult barc_run(const Task& task, const BarcConfig& cfg, const PpoConfig& ppo_cfg,
                   std::uint64_t seed, const RunHooks& hooks = {},
                   const CurriculumState* resume_from = nullptr,
                   PolicyBundle* resume_bundle = nullptr);

struct RandomCurriculumConfig {
  int k_steps = 5;  // random-action steps used to spawn new starts
  double r_min = 0.1;
  double r_max = 0.9;
};

/// Reverse-curriculum baseline: same outer structure, but new starts come
/// from K random-action simulator steps out of current medium-success
/// states instead of a BRS expansion.
RunResult random_curriculum_run(const Task& task, const BarcConfig& cfg, const PpoConfig& ppo_cfg,
                                const RandomCurriculumConfig& rc_cfg, std::uint64_t seed,
                                const RunHooks& hooks = {});

/// Plain PPO from the true start distribution (reward smoothing, when wanted,
/// lives in the env config carried by the task factory).
RunResult plain_ppo_run(const Task& task, const BarcConfig& cfg, const PpoConfig& ppo_cfg,
                        std::uint64_t seed, const RunHooks& hooks = {});

}  // namespace barc
