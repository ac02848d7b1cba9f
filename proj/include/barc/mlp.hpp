#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace barc {

/// Fully-connected net with tanh hidden layers and identity output.
/// Parameters live in one flat array, laid out per layer as the row-major
/// weight matrix followed by the bias vector.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> sizes, std::vector<double> params);

  /// Random init: orthogonal-like rows scaled by sqrt(2) on hidden layers,
  /// `output_scale` on the output layer, zero biases.
  static Mlp create(std::vector<int> sizes, std::uint64_t seed, double output_scale = 0.01);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int param_count() const { return static_cast<int>(params_.size()); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::vector<double> forward(std::span<const double> input) const;

  /// Forward pass that stores the per-layer activations (acts[0] = input,
  /// acts[l+1] = layer l output, post-tanh on hidden layers).
  std::vector<double> forward_cached(std::span<const double> input,
                                     std::vector<std::vector<double>>& acts) const;

  /// Reverse-mode accumulation: given dL/d(output) and the activation cache,
  /// add dL/d(params) into `grad` (same layout as params) and return
  /// dL/d(input).
  std::vector<double> backward(const std::vector<std::vector<double>>& acts,
                               std::span<const double> output_grad, std::span<double> grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
};

/// Welford running mean/variance used for observation normalization.
/// Below two updates it degrades to the identity map.
struct RunningNorm {
  std::vector<double> mean;
  std::vector<double> m2;
  double count = 0.0;

  explicit RunningNorm(int dim = 0) : mean(static_cast<std::size_t>(dim), 0.0),
                                      m2(static_cast<std::size_t>(dim), 0.0) {}

  int dim() const { return static_cast<int>(mean.size()); }
  void update(std::span<const double> x);
  void normalize(std::span<const double> x, std::span<double> out) const;
  std::vector<double> normalize(std::span<const double> x) const;
};

}  // namespace barc
