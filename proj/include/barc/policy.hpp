#pragma once

#include <random>
#include <string>

#include "barc/mlp.hpp"

namespace barc {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Diagonal-Gaussian stochastic policy: state-independent log standard
/// deviations on top of an MLP action mean. Parameter layout for gradient
/// purposes: [mean-net params..., log_std...].
struct GaussianPolicy {
  Mlp mean;
  std::vector<double> log_std;

  static GaussianPolicy create(int obs_dim, int act_dim, const std::vector<int>& hidden,
                               std::uint64_t seed, double log_std_init = -0.5);

  int act_dim() const { return static_cast<int>(log_std.size()); }
  int param_count() const { return mean.param_count() + act_dim(); }
  void clamp_log_std();
};

/// log pi(a|obs) alone.
double log_prob(const GaussianPolicy& p, std::span<const double> obs,
                std::span<const double> action);

/// log pi(a|obs) and, scaled by `weight`, its gradient w.r.t. every policy
/// parameter accumulated into `grad` (layout as in GaussianPolicy).
double log_prob_and_grad(const GaussianPolicy& p, std::span<const double> obs,
                         std::span<const double> action, double weight, std::span<double> grad);

/// Policy entropy (state-independent for a diagonal Gaussian) and its
/// gradient contribution (also into the log_std block of `grad`).
double entropy(const GaussianPolicy& p);
void entropy_grad(const GaussianPolicy& p, double weight, std::span<double> grad);

/// a = mu(obs) + sigma * z, z ~ N(0, I). Deterministic given the rng state.
std::vector<double> sample_action(const GaussianPolicy& p, std::span<const double> obs,
                                  std::mt19937_64& rng);
std::vector<double> mean_action(const GaussianPolicy& p, std::span<const double> obs);

/// Everything the learner owns: actor, critic, observation normalizer.
struct PolicyBundle {
  GaussianPolicy policy;
  Mlp value;
  RunningNorm norm;

  static PolicyBundle create(int obs_dim, int act_dim, const std::vector<int>& hidden,
                             std::uint64_t seed);
};

/// Checkpoint: human-readable header (layer sizes, log_std length,
/// normalization stats) followed by the flat little-endian 64-bit parameter
/// block. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const PolicyBundle& bundle);
PolicyBundle load_checkpoint(const std::string& path);

}  // namespace barc
