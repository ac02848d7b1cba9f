#include "barc/curriculum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "barc/rng.hpp"

namespace barc {

void BarcConfig::validate() const {
  if (n_new < 1 || n_old < 0 || n_tp < 1) throw std::runtime_error("barc: N_new/N_old/N_TP invalid");
  if (horizon_T <= 0.0) throw std::runtime_error("barc: horizon T must be positive");
  if (c_pass <= 0.0 || c_pass > 1.0 || c_select < 0.0 || c_select >= 1.0) {
    throw std::runtime_error("barc: C_pass/C_select out of range");
  }
  if (max_outer_iters < 1 || max_inner_cycles < 1 || eval_episodes < 1) {
    throw std::runtime_error("barc: iteration limits must be positive");
  }
}

std::vector<std::vector<double>> select(const SuccessMap& map, double c_select) {
  if (map.empty()) throw std::runtime_error("select: empty success map");
  std::vector<std::vector<double>> out;
  for (const auto& [state, stats] : map) {
    if (stats.trials > 0 && stats.rate() > c_select) out.push_back(state);
  }
  return out;
}

double evaluate(const EnvFactory& factory, const PolicyBundle& bundle,
                const std::vector<std::vector<double>>& starts, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw std::runtime_error("evaluate: episodes must be >= 1");
  if (starts.empty()) throw std::runtime_error("evaluate: empty start list");
  int wins = 0;
  for (int e = 0; e < episodes; ++e) {
    std::unique_ptr<Env> env = factory();
    env->seed(derive_seed(seed, "eval/episode", static_cast<std::uint64_t>(e)));
    std::vector<double> obs = env->reset(starts[static_cast<std::size_t>(e) % starts.size()]);
    while (true) {
      const std::vector<double> a = mean_action(bundle.policy, bundle.norm.normalize(obs));
      StepResult r = env->step(a);
      if (r.terminal == Terminal::Goal) {
        ++wins;
        break;
      }
      if (r.terminal != Terminal::None) break;
      obs = std::move(r.obs);
    }
  }
  return static_cast<double>(wins) / static_cast<double>(episodes);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::vector<double>> sample_from_list(const std::vector<std::vector<double>>& pool,
                                                  int count, std::mt19937_64& rng) {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int i = 0; i < count; ++i) out.push_back(pool[pick(rng)]);
  return out;
}

void merge_unique(std::vector<std::vector<double>>& into,
                  const std::vector<std::vector<double>>& add) {
  std::set<std::vector<double>> seen(into.begin(), into.end());
  for (const auto& s : add) {
    if (seen.insert(s).second) into.push_back(s);
  }
}

// Shared skeleton of the curriculum outer loop. `spawn_starts` produces the
// fresh start states for one inner cycle (BaRC: BRS rejection sampling;
// random curriculum: random-action walks) and may throw to abort the run.
struct LoopCallbacks {
  std::function<void(int outer)> on_outer_begin;  // e.g. recompute the BRS
  std::function<std::vector<std::vector<double>>(int outer, int cycle)> spawn_starts;
  std::function<void(const SuccessMap&)> on_cycle_end;  // after Select
  std::function<void(OuterRecord&)> annotate;           // method-specific fields
};

RunResult curriculum_loop(const Task& task, const BarcConfig& cfg, const PpoConfig& ppo_cfg,
                          std::uint64_t seed, const RunHooks& hooks,
                          const CurriculumState* resume_from, PolicyBundle* resume_bundle,
                          std::vector<std::vector<double>>& starts,
                          std::vector<std::vector<double>>& old_starts,
                          const LoopCallbacks& loop) {
  RunResult result;
  result.bundle = resume_bundle ? *resume_bundle
                                : PolicyBundle::create(task.obs_dim, task.act_dim, {64, 64},
                                                       derive_seed(seed, "policy/bundle"));
  PpoOptimizer optimizer(ppo_cfg,
                         result.bundle.policy.param_count() + result.bundle.value.param_count());

  int outer_start = 0;
  if (resume_from) {
    starts = resume_from->starts;
    old_starts = resume_from->old_starts;
    outer_start = resume_from->outer_iter;
  }

  const Clock::time_point t0 = Clock::now();
  std::int64_t env_steps_total = 0;
  int ppo_iters_total = 0;

  for (int outer = outer_start; outer < cfg.max_outer_iters; ++outer) {
    if (cfg.wall_clock_budget_s > 0.0 && seconds_since(t0) >= cfg.wall_clock_budget_s) break;

    OuterRecord record;
    record.outer_iter = outer;
    try {
      if (loop.on_outer_begin) loop.on_outer_begin(outer);
    } catch (const std::exception& e) {
      if (hooks.on_checkpoint) hooks.on_checkpoint(result.bundle, starts, old_starts, outer);
      throw std::runtime_error(std::string("curriculum run aborted (checkpoint saved): ") + e.what());
    }

    double frac_successful = 0.0;
    double return_weighted = 0.0;
    std::int64_t return_episodes = 0;
    int cycle = 0;
    while (frac_successful < cfg.c_pass && cycle < cfg.max_inner_cycles) {
      if (cfg.wall_clock_budget_s > 0.0 && seconds_since(t0) >= cfg.wall_clock_budget_s) break;
      const std::uint64_t cycle_tag =
          static_cast<std::uint64_t>(outer) * 1000 + static_cast<std::uint64_t>(cycle);

      std::vector<std::vector<double>> rho;
      try {
        rho = loop.spawn_starts(outer, cycle);
      } catch (const std::exception& e) {
        if (hooks.on_checkpoint) hooks.on_checkpoint(result.bundle, starts, old_starts, outer);
        throw std::runtime_error(std::string("curriculum run aborted (checkpoint saved): ") +
                                 e.what());
      }
      {
        std::mt19937_64 old_rng(derive_seed(seed, "old/sample", cycle_tag));
        const auto old_sample = sample_from_list(old_starts, cfg.n_old, old_rng);
        rho.insert(rho.end(), old_sample.begin(), old_sample.end());
        std::shuffle(rho.begin(), rho.end(), old_rng);
      }

      TrainResult train = optimizer.train(result.bundle, task.factory, rho, cfg.n_tp,
                                          derive_seed(seed, "train", cycle_tag));
      for (const IterStats& it : train.iters) {
        env_steps_total += it.steps;
        ++ppo_iters_total;
        return_weighted += it.mean_return * it.episodes;
        return_episodes += it.episodes;
        result.history.ppo.push_back(it);
        if (hooks.on_ppo_iter) hooks.on_ppo_iter(it);
      }

      const auto selected = select(train.success_map, cfg.c_select);
      if (!selected.empty()) starts = selected;  // keep the stage when nothing qualified
      merge_unique(old_starts, selected);
      if (loop.on_cycle_end) loop.on_cycle_end(train.success_map);

      std::mt19937_64 panel_rng(derive_seed(seed, "eval/panel", cycle_tag));
      const auto panel = sample_from_list(rho, cfg.eval_episodes, panel_rng);
      frac_successful = evaluate(task.factory, result.bundle, panel, cfg.eval_episodes,
                                 derive_seed(seed, "eval", cycle_tag));
      ++cycle;
    }

    record.inner_cycles = cycle;
    record.train_avg_reward =
        return_episodes > 0 ? return_weighted / static_cast<double>(return_episodes) : 0.0;
    record.eval_fraction = frac_successful;
    record.perf_metric =
        evaluate(task.factory, result.bundle, task.rho0,
                 static_cast<int>(task.rho0.size()) * cfg.metric_episodes_per_start,
                 derive_seed(seed, "metric", static_cast<std::uint64_t>(outer)));
    record.env_steps_total = env_steps_total;
    record.ppo_iters_total = ppo_iters_total;
    record.wall_time_s = seconds_since(t0);
    if (loop.annotate) loop.annotate(record);
    result.history.outer.push_back(record);
    if (hooks.on_outer_end) hooks.on_outer_end(record);
    if (hooks.on_checkpoint) hooks.on_checkpoint(result.bundle, starts, old_starts, outer + 1);

    if (record.perf_metric >= cfg.metric_threshold) {
      result.reached_threshold = true;
      break;
    }
  }
  return result;
}

}  // namespace

RunResult barc_run(const Task& task, const BarcConfig& cfg, const PpoConfig& ppo_cfg,
                   std::uint64_t seed, const RunHooks& hooks, const CurriculumState* resume_from,
                   PolicyBundle* resume_bundle) {
  cfg.validate();
  ppo_cfg.validate();
  if (task.rho0.empty()) throw std::runtime_error("barc_run: task has no true start states");
  {
    std::unique_ptr<Env> probe = task.factory();
    if (!probe->goal_test(task.goal_state)) {
      throw std::runtime_error("barc_run: goal seed state fails the environment goal test");
    }
  }

  std::vector<std::vector<double>> starts{task.goal_state};
  std::vector<std::vector<double>> old_starts{task.goal_state};
  DecomposedBRS brs;

  LoopCallbacks loop;
  loop.on_outer_begin = [&](int outer) {
    brs = expand_backwards(starts, task.model, cfg.horizon_T, cfg.expand);
    if (hooks.on_brs) hooks.on_brs(brs, outer);
  };
  loop.spawn_starts = [&](int outer, int cycle) {
    const std::uint64_t cycle_tag =
        static_cast<std::uint64_t>(outer) * 1000 + static_cast<std::uint64_t>(cycle);
    return sample_starts(brs, cfg.n_new, derive_seed(seed, "brs/sample", cycle_tag), task.validity,
                         task.goal_state);
  };
  loop.annotate = [&](OuterRecord& record) {
    record.brs_nodes.clear();
    for (const ScalarField& f : brs.fields) record.brs_nodes.push_back(count_sublevel_nodes(f, 0.0));
  };

  return curriculum_loop(task, cfg, ppo_cfg, seed, hooks, resume_from, resume_bundle, starts,
                         old_starts, loop);
}

RunResult random_curriculum_run(const Task& task, const BarcConfig& cfg, const PpoConfig& ppo_cfg,
                                const RandomCurriculumConfig& rc_cfg, std::uint64_t seed,
                                const RunHooks& hooks) {
  cfg.validate();
  ppo_cfg.validate();
  if (rc_cfg.k_steps < 0) throw std::runtime_error("random curriculum: K must be >= 0");

  std::vector<std::vector<double>> starts{task.goal_state};
  std::vector<std::vector<double>> old_starts{task.goal_state};
  // Medium-success states from the most recent training cycles; initially
  // just the goal seed.
  std::vector<std::vector<double>> medium{task.goal_state};

  LoopCallbacks loop;
  loop.spawn_starts = [&, seed](int outer, int cycle) {
    const std::uint64_t cycle_tag =
        static_cast<std::uint64_t>(outer) * 1000 + static_cast<std::uint64_t>(cycle);
    std::mt19937_64 rng(derive_seed(seed, "rc/spawn", cycle_tag));
    std::uniform_real_distribution<double> act(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, medium.size() - 1);

    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(cfg.n_new));
    std::unique_ptr<Env> env = task.factory();
    const int act_dim = env->act_dim();
    int attempts = 0;
    while (static_cast<int>(out.size()) < cfg.n_new) {
      const std::vector<double>& seed_state = medium[pick(rng)];
      env->seed(derive_seed(seed, "rc/env", cycle_tag * 10007 + static_cast<std::uint64_t>(attempts)));
      env->reset(seed_state);
      std::vector<double> state = seed_state;
      bool alive = true;
      for (int k = 0; k < rc_cfg.k_steps; ++k) {
        std::vector<double> a(static_cast<std::size_t>(act_dim));
        for (double& v : a) v = act(rng);
        StepResult r = env->step(a);
        if (r.terminal != Terminal::None) {
          alive = false;
          break;
        }
        state = env->state();
      }
      ++attempts;
      // Keep only live, dynamically produced states; fall back to the seed
      // state when the walk dies so progress never stalls.
      if (alive && task.validity && !task.validity(state)) alive = false;
      out.push_back(alive ? state : seed_state);
    }
    return out;
  };
  loop.on_cycle_end = [&](const SuccessMap& map) {
    std::vector<std::vector<double>> next;
    for (const auto& [state, stats] : map) {
      if (stats.trials > 0 && stats.rate() >= rc_cfg.r_min && stats.rate() <= rc_cfg.r_max) {
        next.push_back(state);
      }
    }
    if (!next.empty()) medium = std::move(next);
  };

  return curriculum_loop(task, cfg, ppo_cfg, seed, hooks, nullptr, nullptr, starts, old_starts,
                         loop);
}

RunResult plain_ppo_run(const Task& task, const BarcConfig& cfg, const PpoConfig& ppo_cfg,
                        std::uint64_t seed, const RunHooks& hooks) {
  cfg.validate();
  ppo_cfg.validate();
  if (task.rho0.empty()) throw std::runtime_error("plain_ppo_run: task has no start states");

  RunResult result;
  result.bundle = PolicyBundle::create(task.obs_dim, task.act_dim, {64, 64},
                                       derive_seed(seed, "policy/bundle"));
  PpoOptimizer optimizer(ppo_cfg,
                         result.bundle.policy.param_count() + result.bundle.value.param_count());

  const Clock::time_point t0 = Clock::now();
  std::int64_t env_steps_total = 0;
  int ppo_iters_total = 0;
  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    if (cfg.wall_clock_budget_s > 0.0 && seconds_since(t0) >= cfg.wall_clock_budget_s) break;
    TrainResult train =
        optimizer.train(result.bundle, task.factory, task.rho0, cfg.n_tp,
                        derive_seed(seed, "train", static_cast<std::uint64_t>(outer) * 1000));
    OuterRecord record;
    record.outer_iter = outer;
    record.inner_cycles = 1;
    double return_weighted = 0.0;
    std::int64_t return_episodes = 0;
    for (const IterStats& it : train.iters) {
      env_steps_total += it.steps;
      ++ppo_iters_total;
      return_weighted += it.mean_return * it.episodes;
      return_episodes += it.episodes;
      result.history.ppo.push_back(it);
      if (hooks.on_ppo_iter) hooks.on_ppo_iter(it);
    }
    record.train_avg_reward =
        return_episodes > 0 ? return_weighted / static_cast<double>(return_episodes) : 0.0;
    record.perf_metric =
        evaluate(task.factory, result.bundle, task.rho0,
                 static_cast<int>(task.rho0.size()) * cfg.metric_episodes_per_start,
                 derive_seed(seed, "metric", static_cast<std::uint64_t>(outer)));
    record.eval_fraction = record.perf_metric;
    record.env_steps_total = env_steps_total;
    record.ppo_iters_total = ppo_iters_total;
    record.wall_time_s = seconds_since(t0);
    result.history.outer.push_back(record);
    if (hooks.on_outer_end) hooks.on_outer_end(record);
    if (hooks.on_checkpoint) {
      hooks.on_checkpoint(result.bundle, task.rho0, task.rho0, outer + 1);
    }
    if (record.perf_metric >= cfg.metric_threshold) {
      result.reached_threshold = true;
      break;
    }
  }
  return result;
}

}  // namespace barc
