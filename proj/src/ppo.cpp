#include "barc/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "barc/rng.hpp"

namespace barc {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;
}

void PpoConfig::validate() const {
  if (clip_eps <= 0.0 || clip_eps >= 1.0) throw std::runtime_error("ppo: clip_eps must lie in (0,1)");
  if (gamma <= 0.0 || gamma > 1.0) throw std::runtime_error("ppo: gamma must lie in (0,1]");
  if (gae_lambda <= 0.0 || gae_lambda > 1.0) throw std::runtime_error("ppo: lambda must lie in (0,1]");
  if (epochs < 1 || minibatch_size < 1 || steps_per_iter < 1 || workers < 1) {
    throw std::runtime_error("ppo: epochs, minibatch, steps and workers must be positive");
  }
}

double EpisodeData::episode_return() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

namespace {

// One full episode from a fixed start; every random draw is derived from
// the episode index, so results do not depend on scheduling.
EpisodeData run_episode(const EnvFactory& factory, const std::vector<double>& start,
                        const PolicyBundle& bundle, const RunningNorm& norm, std::uint64_t seed,
                        std::int64_t episode_index) {
  std::unique_ptr<Env> env = factory();
  env->seed(derive_seed(seed, "env/episode", static_cast<std::uint64_t>(episode_index)));
  std::mt19937_64 action_rng(
      derive_seed(seed, "ppo/actions", static_cast<std::uint64_t>(episode_index)));
  std::normal_distribution<double> gauss(0.0, 1.0);

  EpisodeData ep;
  ep.start_state = start;
  std::vector<double> obs = env->reset(start);

  while (true) {
    const std::vector<double> obs_n = norm.normalize(obs);
    std::vector<double> action = bundle.policy.mean.forward(obs_n);
    double logp = 0.0;
    for (std::size_t i = 0; i < action.size(); ++i) {
      const double sigma = std::exp(bundle.policy.log_std[i]);
      const double z = gauss(action_rng);
      action[i] += sigma * z;
      logp += -0.5 * z * z - bundle.policy.log_std[i] - kHalfLog2Pi;
    }
    const double value = bundle.value.forward(obs_n)[0];

    StepResult res = env->step(action);
    ep.obs.push_back(std::move(obs));
    ep.actions.push_back(std::move(action));
    ep.logp_old.push_back(logp);
    ep.rewards.push_back(res.reward);
    ep.values.push_back(value);

    if (res.terminal != Terminal::None) {
      ep.final_terminal = res.terminal;
      ep.success = res.terminal == Terminal::Goal;
      ep.bootstrap_value =
          res.terminal == Terminal::Timeout ? bundle.value.forward(norm.normalize(res.obs))[0] : 0.0;
      break;
    }
    obs = std::move(res.obs);
  }
  return ep;
}

}  // namespace

RolloutBatch collect_rollouts(const EnvFactory& factory,
                              const std::vector<std::vector<double>>& starts,
                              const PolicyBundle& bundle, int steps, std::uint64_t seed,
                              int workers) {
  if (starts.empty()) throw std::runtime_error("collect_rollouts: empty start list");
  if (steps < 1) throw std::runtime_error("collect_rollouts: steps must be >= 1");

  RolloutBatch batch;
  batch.norm_snapshot = bundle.norm;

  std::int64_t episode_index = 0;
  while (batch.total_steps < steps) {
    const int wave = std::max(1, workers);
    std::vector<EpisodeData> results(static_cast<std::size_t>(wave));
    const auto worker = [&](int slot) {
      const std::int64_t e = episode_index + slot;
      const std::vector<double>& start = starts[static_cast<std::size_t>(e % starts.size())];
      results[static_cast<std::size_t>(slot)] =
          run_episode(factory, start, bundle, batch.norm_snapshot, seed, e);
    };
    if (wave == 1) {
      worker(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(wave));
      for (int slot = 0; slot < wave; ++slot) threads.emplace_back(worker, slot);
      for (auto& t : threads) t.join();
    }
    // Keep the index-order prefix that first reaches the step budget, so any
    // worker count reproduces the single-worker batch.
    for (int slot = 0; slot < wave && batch.total_steps < steps; ++slot) {
      batch.total_steps += results[static_cast<std::size_t>(slot)].length();
      batch.episodes.push_back(std::move(results[static_cast<std::size_t>(slot)]));
      ++episode_index;
    }
  }
  return batch;
}

Advantages gae_advantages(const RolloutBatch& batch, double gamma, double lambda) {
  Advantages out;
  out.adv.resize(batch.episodes.size());
  out.ret.resize(batch.episodes.size());
  for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
    const EpisodeData& ep = batch.episodes[e];
    const int len = ep.length();
    out.adv[e].assign(static_cast<std::size_t>(len), 0.0);
    out.ret[e].assign(static_cast<std::size_t>(len), 0.0);
    double next_value = ep.bootstrap_value;
    double next_adv = 0.0;
    for (int t = len - 1; t >= 0; --t) {
      const double delta =
          ep.rewards[static_cast<std::size_t>(t)] + gamma * next_value - ep.values[static_cast<std::size_t>(t)];
      const double adv = delta + gamma * lambda * next_adv;
      out.adv[e][static_cast<std::size_t>(t)] = adv;
      out.ret[e][static_cast<std::size_t>(t)] = adv + ep.values[static_cast<std::size_t>(t)];
      next_value = ep.values[static_cast<std::size_t>(t)];
      next_adv = adv;
    }
  }
  return out;
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::runtime_error("Adam: dimension mismatch");
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

UpdateStats ppo_update(PolicyBundle& bundle, Adam& optimizer, const RolloutBatch& batch,
                       const PpoConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (batch.episodes.empty()) throw std::runtime_error("ppo_update: empty batch");

  // Flatten the batch: normalized observations, actions, logp_old,
  // normalized advantages, returns.
  std::vector<std::vector<double>> obs_n;
  std::vector<const std::vector<double>*> actions;
  std::vector<double> logp_old, adv, ret;
  const Advantages ga = gae_advantages(batch, cfg.gamma, cfg.gae_lambda);
  for (std::size_t e = 0; e < batch.episodes.size(); ++e) {
    const EpisodeData& ep = batch.episodes[e];
    for (int t = 0; t < ep.length(); ++t) {
      obs_n.push_back(batch.norm_snapshot.normalize(ep.obs[static_cast<std::size_t>(t)]));
      actions.push_back(&ep.actions[static_cast<std::size_t>(t)]);
      logp_old.push_back(ep.logp_old[static_cast<std::size_t>(t)]);
      adv.push_back(ga.adv[e][static_cast<std::size_t>(t)]);
      ret.push_back(ga.ret[e][static_cast<std::size_t>(t)]);
    }
  }
  const std::size_t n = adv.size();

  double adv_mean = 0.0;
  for (double a : adv) adv_mean += a;
  adv_mean /= static_cast<double>(n);
  double adv_var = 0.0;
  for (double a : adv) adv_var += (a - adv_mean) * (a - adv_mean);
  const double adv_std = std::sqrt(adv_var / static_cast<double>(n));
  for (double& a : adv) a = adv_std > 1e-8 ? (a - adv_mean) / adv_std : a - adv_mean;

  const int policy_params = bundle.policy.mean.param_count();
  const int act_dim = bundle.policy.act_dim();
  const int value_params = bundle.value.param_count();
  const int total_params = policy_params + act_dim + value_params;

  std::vector<double> grad(static_cast<std::size_t>(total_params), 0.0);
  std::vector<double> flat(static_cast<std::size_t>(total_params), 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(derive_seed(seed, "ppo/shuffle"));

  UpdateStats stats;
  stats.entropy = entropy(bundle.policy);
  double ratio_sum = 0.0, policy_loss_sum = 0.0, value_loss_sum = 0.0;
  std::size_t visits = 0, clipped = 0;
  bool first_minibatch = true;
  double ratio_min = 1e300, ratio_max = -1e300, adv_min = 1e300, adv_max = -1e300;
  for (double a : adv) {
    adv_min = std::min(adv_min, a);
    adv_max = std::max(adv_max, a);
  }

  std::vector<std::vector<double>> acts;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t mb_start = 0; mb_start < n; mb_start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t mb_end = std::min(n, mb_start + static_cast<std::size_t>(cfg.minibatch_size));
      const double inv_mb = 1.0 / static_cast<double>(mb_end - mb_start);
      std::fill(grad.begin(), grad.end(), 0.0);
      auto policy_grad = std::span<double>(grad).subspan(0, static_cast<std::size_t>(policy_params));
      double* log_std_grad = grad.data() + policy_params;
      auto value_grad =
          std::span<double>(grad).subspan(static_cast<std::size_t>(policy_params + act_dim));

      for (std::size_t mi = mb_start; mi < mb_end; ++mi) {
        const std::size_t k = order[mi];
        const std::vector<double>& o = obs_n[k];
        const std::vector<double>& a = *actions[k];

        const std::vector<double> mu = bundle.policy.mean.forward_cached(o, acts);
        double logp = 0.0;
        for (int d = 0; d < act_dim; ++d) {
          const double sigma = std::exp(bundle.policy.log_std[static_cast<std::size_t>(d)]);
          const double z = (a[static_cast<std::size_t>(d)] - mu[static_cast<std::size_t>(d)]) / sigma;
          logp += -0.5 * z * z - bundle.policy.log_std[static_cast<std::size_t>(d)] - kHalfLog2Pi;
        }
        const double ratio = std::exp(logp - logp_old[k]);
        if (first_minibatch) {
          stats.max_initial_ratio_dev = std::max(stats.max_initial_ratio_dev, std::abs(ratio - 1.0));
        }
        const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
        const double obj_plain = ratio * adv[k];
        const double obj_clip = clipped_ratio * adv[k];
        const bool use_plain = obj_plain <= obj_clip;
        policy_loss_sum += -std::min(obj_plain, obj_clip);
        ratio_sum += ratio;
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
        if (std::abs(ratio - 1.0) > cfg.clip_eps) ++clipped;
        ++visits;

        if (use_plain) {
          // d(-ratio*A)/d logp = -A*ratio, propagated into mean and log_std.
          const double w = -adv[k] * ratio * inv_mb;
          std::vector<double> dmu(static_cast<std::size_t>(act_dim));
          for (int d = 0; d < act_dim; ++d) {
            const double sigma = std::exp(bundle.policy.log_std[static_cast<std::size_t>(d)]);
            const double z = (a[static_cast<std::size_t>(d)] - mu[static_cast<std::size_t>(d)]) / sigma;
            dmu[static_cast<std::size_t>(d)] = w * z / sigma;
            log_std_grad[d] += w * (z * z - 1.0);
          }
          bundle.policy.mean.backward(acts, dmu, policy_grad);
        }

        const double v = bundle.value.forward_cached(o, acts)[0];
        const double verr = v - ret[k];
        value_loss_sum += 0.5 * verr * verr;
        bundle.value.backward(acts, std::vector<double>{cfg.value_coef * verr * inv_mb}, value_grad);

        if (cfg.entropy_coef != 0.0) {
          for (int d = 0; d < act_dim; ++d) log_std_grad[d] -= cfg.entropy_coef * inv_mb;
        }
      }
      first_minibatch = false;

      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g;
      const double gnorm = std::sqrt(norm2);
      stats.grad_norm = gnorm;
      if (!std::isfinite(gnorm)) {
        std::ostringstream os;
        os << "ppo_update: non-finite gradient (ratio range [" << ratio_min << ", " << ratio_max
           << "], normalized advantage range [" << adv_min << ", " << adv_max << "])";
        throw std::runtime_error(os.str());
      }
      if (cfg.grad_clip > 0.0 && gnorm > cfg.grad_clip) {
        const double scale = cfg.grad_clip / gnorm;
        for (double& g : grad) g *= scale;
      }

      // One flat parameter vector [policy mean | log_std | value].
      std::copy(bundle.policy.mean.params().begin(), bundle.policy.mean.params().end(), flat.begin());
      std::copy(bundle.policy.log_std.begin(), bundle.policy.log_std.end(),
                flat.begin() + policy_params);
      std::copy(bundle.value.params().begin(), bundle.value.params().end(),
                flat.begin() + policy_params + act_dim);
      optimizer.step(flat, grad);
      std::copy(flat.begin(), flat.begin() + policy_params, bundle.policy.mean.params().begin());
      std::copy(flat.begin() + policy_params, flat.begin() + policy_params + act_dim,
                bundle.policy.log_std.begin());
      std::copy(flat.begin() + policy_params + act_dim, flat.end(), bundle.value.params().begin());
      bundle.policy.clamp_log_std();
    }
  }

  stats.mean_ratio = ratio_sum / static_cast<double>(visits);
  stats.clip_fraction = static_cast<double>(clipped) / static_cast<double>(visits);
  stats.policy_loss = policy_loss_sum / static_cast<double>(visits);
  stats.value_loss = value_loss_sum / static_cast<double>(visits);
  if (!std::isfinite(stats.policy_loss) || !std::isfinite(stats.value_loss)) {
    std::ostringstream os;
    os << "ppo_update: non-finite loss (ratio range [" << ratio_min << ", " << ratio_max
       << "], normalized advantage range [" << adv_min << ", " << adv_max << "])";
    throw std::runtime_error(os.str());
  }
  return stats;
}

TrainResult PpoOptimizer::train(PolicyBundle& bundle, const EnvFactory& factory,
                                const std::vector<std::vector<double>>& starts, int n_iters,
                                std::uint64_t seed) {
  if (n_iters < 1) throw std::runtime_error("train_policy: need at least one iteration");
  if (starts.empty()) throw std::runtime_error("train_policy: empty start list");
  cfg_.validate();

  TrainResult result;
  for (int it = 0; it < n_iters; ++it) {
    RolloutBatch batch =
        collect_rollouts(factory, starts, bundle, cfg_.steps_per_iter,
                         derive_seed(seed, "ppo/iter", static_cast<std::uint64_t>(it)), cfg_.workers);

    IterStats stats;
    stats.iteration = it;
    stats.steps = batch.total_steps;
    stats.episodes = static_cast<int>(batch.episodes.size());
    double return_sum = 0.0;
    long successes = 0;
    for (const EpisodeData& ep : batch.episodes) {
      SuccessStats& ss = result.success_map[ep.start_state];
      ss.trials += 1;
      ss.successes += ep.success ? 1 : 0;
      return_sum += ep.episode_return();
      successes += ep.success ? 1 : 0;
    }
    stats.mean_return = return_sum / static_cast<double>(batch.episodes.size());
    stats.success_rate = static_cast<double>(successes) / static_cast<double>(batch.episodes.size());

    stats.update = ppo_update(bundle, adam_, batch, cfg_,
                              derive_seed(seed, "ppo/update", static_cast<std::uint64_t>(it)));

    // Fold the batch into the running observation statistics only after the
    // update has consumed it under the collection-time snapshot.
    for (const EpisodeData& ep : batch.episodes) {
      for (const std::vector<double>& o : ep.obs) bundle.norm.update(o);
    }
    result.iters.push_back(stats);
  }
  return result;
}

}  // namespace barc
