// Scratch driver for inspecting learning progress while tuning; not part of
// the shipped CLI.
#include <cstdio>
#include <string>

#include "barc/curriculum.hpp"
#include "barc/pointmass.hpp"
#include "barc/rng.hpp"

using namespace barc;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "pm-ppo";
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 0;

  PointMassConfig cfg;
  Task task;
  task.name = "pm";
  task.factory = [cfg]() { return std::make_unique<PointMassEnv>(cfg); };
  task.model = pointmass_curriculum(cfg, PointMassCurriculumConfig{});
  task.goal_state = {cfg.goal_x, 0.0};
  task.rho0 = {{-2.0, 0.0}, {-1.5, 0.0}, {-1.0, 0.0}, {-2.5, 0.0}};
  task.validity = [cfg](std::span<const double> s) { return PointMassEnv(cfg).valid_start(s); };
  task.obs_dim = 2;
  task.act_dim = 1;

  BarcConfig bc;
  bc.n_new = 30;
  bc.n_old = 15;
  bc.n_tp = 2;
  bc.max_outer_iters = 30;
  bc.max_inner_cycles = 4;
  bc.eval_episodes = 12;
  bc.horizon_T = 0.3;

  PpoConfig pc;
  pc.steps_per_iter = 600;
  pc.epochs = 4;

  RunHooks hooks;
  hooks.on_outer_end = [](const OuterRecord& r) {
    std::printf("outer %2d cycles %d train_reward %7.3f eval %5.2f metric %5.2f steps %lld\n",
                r.outer_iter, r.inner_cycles, r.train_avg_reward, r.eval_fraction, r.perf_metric,
                static_cast<long long>(r.env_steps_total));
    std::fflush(stdout);
  };
  hooks.on_ppo_iter = [](const IterStats& it) {
    std::printf("  ppo it %2d ret %8.3f succ %4.2f clip %4.2f kl_dev %.2e vloss %8.3f ent %6.3f\n",
                it.iteration, it.mean_return, it.success_rate, it.update.clip_fraction,
                it.update.max_initial_ratio_dev, it.update.value_loss, it.update.entropy);
    std::fflush(stdout);
  };

  if (mode == "pm-ppo") {
    RunResult res = plain_ppo_run(task, bc, pc, seed, hooks);
    std::printf("final metric %.3f\n", res.history.outer.back().perf_metric);
  } else if (mode == "pm-barc") {
    RunResult res = barc_run(task, bc, pc, seed, hooks);
    std::printf("final metric %.3f\n", res.history.outer.back().perf_metric);
  }
  return 0;
}
