#include "barc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace barc {

namespace {

int param_count_for(const std::vector<int>& sizes) {
  int total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    total += (sizes[l] + 1) * sizes[l + 1];
  }
  return total;
}

// Orthonormalize the rows (n_out <= n_in) or columns (otherwise) of a
// Gaussian matrix with modified Gram-Schmidt, then scale by `gain`.
void orthogonal_init(std::span<double> w, int n_out, int n_in, double gain, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& x : w) x = gauss(rng);

  const bool rows = n_out <= n_in;
  const int vecs = rows ? n_out : n_in;
  const int len = rows ? n_in : n_out;
  const auto at = [&](int v, int i) -> double& {
    return rows ? w[static_cast<std::size_t>(v * n_in + i)]
                : w[static_cast<std::size_t>(i * n_in + v)];
  };
  for (int v = 0; v < vecs; ++v) {
    for (int u = 0; u < v; ++u) {
      double dot = 0.0;
      for (int i = 0; i < len; ++i) dot += at(v, i) * at(u, i);
      for (int i = 0; i < len; ++i) at(v, i) -= dot * at(u, i);
    }
    double norm = 0.0;
    for (int i = 0; i < len; ++i) norm += at(v, i) * at(v, i);
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (int i = 0; i < len; ++i) at(v, i) *= gain / norm;
  }
  if (!rows || vecs < n_out) {
    // Leftover rows/columns keep their (scaled) Gaussian values.
    const double scale = gain / std::sqrt(static_cast<double>(len));
    if (rows) {
      for (int v = vecs; v < n_out; ++v) {
        for (int i = 0; i < len; ++i) at(v, i) *= scale;
      }
    }
  }
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, std::vector<double> params)
    : sizes_(std::move(sizes)), params_(std::move(params)) {
  if (sizes_.size() < 2) throw std::runtime_error("Mlp: need at least input and output layers");
  if (static_cast<int>(params_.size()) != param_count_for(sizes_)) {
    throw std::runtime_error("Mlp: parameter count mismatch");
  }
}

Mlp Mlp::create(std::vector<int> sizes, std::uint64_t seed, double output_scale) {
  if (sizes.size() < 2) throw std::runtime_error("Mlp: need at least input and output layers");
  std::vector<double> params(static_cast<std::size_t>(param_count_for(sizes)), 0.0);
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int n_in = sizes[l];
    const int n_out = sizes[l + 1];
    const bool last = l + 2 == sizes.size();
    const double gain = last ? output_scale : std::sqrt(2.0);
    orthogonal_init(std::span<double>(params).subspan(offset, static_cast<std::size_t>(n_in * n_out)),
                    n_out, n_in, gain, rng);
    offset += static_cast<std::size_t>((n_in + 1) * n_out);  // biases stay zero
  }
  return Mlp(std::move(sizes), std::move(params));
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  std::vector<std::vector<double>> acts;
  return forward_cached(input, acts);
}

std::vector<double> Mlp::forward_cached(std::span<const double> input,
                                        std::vector<std::vector<double>>& acts) const {
  if (static_cast<int>(input.size()) != sizes_.front()) {
    throw std::runtime_error("Mlp::forward: input size mismatch");
  }
  for (double x : input) {
    if (!std::isfinite(x)) throw std::runtime_error("Mlp::forward: non-finite input");
  }
  acts.clear();
  acts.emplace_back(input.begin(), input.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int n_in = sizes_[l];
    const int n_out = sizes_[l + 1];
    const bool last = l + 2 == sizes_.size();
    const std::vector<double>& x = acts.back();
    std::vector<double> y(static_cast<std::size_t>(n_out));
    const double* w = params_.data() + offset;
    const double* b = w + n_in * n_out;
    for (int o = 0; o < n_out; ++o) {
      double acc = b[o];
      const double* row = w + o * n_in;
      for (int i = 0; i < n_in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(o)] = last ? acc : std::tanh(acc);
    }
    acts.push_back(std::move(y));
    offset += static_cast<std::size_t>((n_in + 1) * n_out);
  }
  return acts.back();
}

std::vector<double> Mlp::backward(const std::vector<std::vector<double>>& acts,
                                  std::span<const double> output_grad,
                                  std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::runtime_error("Mlp::backward: grad size mismatch");
  if (acts.size() != sizes_.size()) throw std::runtime_error("Mlp::backward: stale activation cache");

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  // Walk layers in reverse; `offset` tracks the start of layer l's params.
  std::vector<std::size_t> offsets(sizes_.size() - 1);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>((sizes_[l] + 1) * sizes_[l + 1]);
  }
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const int n_in = sizes_[l];
    const int n_out = sizes_[l + 1];
    const std::vector<double>& x = acts[l];
    const double* w = params_.data() + offsets[l];
    double* gw = grad.data() + offsets[l];
    double* gb = gw + n_in * n_out;

    std::vector<double> prev(static_cast<std::size_t>(n_in), 0.0);
    for (int o = 0; o < n_out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[o] += d;
      const double* row = w + o * n_in;
      double* grow = gw + o * n_in;
      for (int i = 0; i < n_in; ++i) {
        grow[i] += d * x[static_cast<std::size_t>(i)];
        prev[static_cast<std::size_t>(i)] += d * row[i];
      }
    }
    if (l > 0) {
      // Through the tanh of the previous hidden layer.
      for (int i = 0; i < n_in; ++i) {
        const double z = x[static_cast<std::size_t>(i)];
        prev[static_cast<std::size_t>(i)] *= 1.0 - z * z;
      }
    }
    delta = std::move(prev);
  }
  return delta;
}

void RunningNorm::update(std::span<const double> x) {
  if (static_cast<int>(x.size()) != dim()) throw std::runtime_error("RunningNorm: dim mismatch");
  count += 1.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double delta = x[i] - mean[i];
    mean[i] += delta / count;
    m2[i] += delta * (x[i] - mean[i]);
  }
}

void RunningNorm::normalize(std::span<const double> x, std::span<double> out) const {
  if (count < 2.0) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double var = m2[i] / count;
    out[i] = std::clamp((x[i] - mean[i]) / std::sqrt(var + 1e-8), -10.0, 10.0);
  }
}

std::vector<double> RunningNorm::normalize(std::span<const double> x) const {
  std::vector<double> out(x.size());
  normalize(x, out);
  return out;
}

}  // namespace barc
