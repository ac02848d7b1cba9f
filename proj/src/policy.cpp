#include "barc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "barc/rng.hpp"

namespace barc {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2*pi)
}

GaussianPolicy GaussianPolicy::create(int obs_dim, int act_dim, const std::vector<int>& hidden,
                                      std::uint64_t seed, double log_std_init) {
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(act_dim);
  GaussianPolicy p;
  p.mean = Mlp::create(sizes, seed, 0.01);
  p.log_std.assign(static_cast<std::size_t>(act_dim), log_std_init);
  p.clamp_log_std();
  return p;
}

void GaussianPolicy::clamp_log_std() {
  for (double& v : log_std) v = std::clamp(v, kLogStdMin, kLogStdMax);
}

double log_prob(const GaussianPolicy& p, std::span<const double> obs,
                std::span<const double> action) {
  const std::vector<double> mu = p.mean.forward(obs);
  double lp = 0.0;
  for (std::size_t i = 0; i < p.log_std.size(); ++i) {
    const double sigma = std::exp(p.log_std[i]);
    const double z = (action[i] - mu[i]) / sigma;
    lp += -0.5 * z * z - p.log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

double log_prob_and_grad(const GaussianPolicy& p, std::span<const double> obs,
                         std::span<const double> action, double weight, std::span<double> grad) {
  if (static_cast<int>(grad.size()) != p.param_count()) {
    throw std::runtime_error("log_prob_and_grad: grad size mismatch");
  }
  std::vector<std::vector<double>> acts;
  const std::vector<double> mu = p.mean.forward_cached(obs, acts);

  double lp = 0.0;
  std::vector<double> dmu(p.log_std.size());
  double* g_log_std = grad.data() + p.mean.param_count();
  for (std::size_t i = 0; i < p.log_std.size(); ++i) {
    const double sigma = std::exp(p.log_std[i]);
    const double z = (action[i] - mu[i]) / sigma;
    lp += -0.5 * z * z - p.log_std[i] - kHalfLog2Pi;
    dmu[i] = weight * z / sigma;                 // d logp / d mu_i
    g_log_std[i] += weight * (z * z - 1.0);      // d logp / d log_std_i
  }
  p.mean.backward(acts, dmu, grad.subspan(0, static_cast<std::size_t>(p.mean.param_count())));
  return lp;
}

double entropy(const GaussianPolicy& p) {
  double h = 0.0;
  for (double ls : p.log_std) h += ls + 0.5 + kHalfLog2Pi;
  return h;
}

void entropy_grad(const GaussianPolicy& p, double weight, std::span<double> grad) {
  double* g_log_std = grad.data() + p.mean.param_count();
  for (std::size_t i = 0; i < p.log_std.size(); ++i) g_log_std[i] += weight;
}

std::vector<double> sample_action(const GaussianPolicy& p, std::span<const double> obs,
                                  std::mt19937_64& rng) {
  std::vector<double> a = p.mean.forward(obs);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < p.log_std.size(); ++i) {
    a[i] += std::exp(p.log_std[i]) * gauss(rng);
    if (!std::isfinite(a[i])) throw std::runtime_error("sample_action: non-finite action");
  }
  return a;
}

std::vector<double> mean_action(const GaussianPolicy& p, std::span<const double> obs) {
  return p.mean.forward(obs);
}

PolicyBundle PolicyBundle::create(int obs_dim, int act_dim, const std::vector<int>& hidden,
                                  std::uint64_t seed) {
  PolicyBundle b;
  b.policy = GaussianPolicy::create(obs_dim, act_dim, hidden, derive_seed(seed, "policy/init"));
  std::vector<int> vsizes{obs_dim};
  vsizes.insert(vsizes.end(), hidden.begin(), hidden.end());
  vsizes.push_back(1);
  b.value = Mlp::create(vsizes, derive_seed(seed, "value/init"), 1.0);
  b.norm = RunningNorm(obs_dim);
  return b;
}

namespace {

void write_sizes(std::ostream& out, const char* key, const std::vector<int>& sizes) {
  out << key;
  for (std::size_t i = 0; i < sizes.size(); ++i) out << (i ? "," : " ") << sizes[i];
  out << "\n";
}

void write_reals(std::ostream& out, const char* key, std::span<const double> v) {
  out << key;
  char buf[64];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out << (i ? "," : " ") << buf;
  }
  out << "\n";
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> parse_reals(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::string expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(key, 0) != 0) {
    throw std::runtime_error("checkpoint: missing '" + key + "' line");
  }
  return line.size() > key.size() + 1 ? line.substr(key.size() + 1) : std::string();
}

}  // namespace

void save_checkpoint(const std::string& path, const PolicyBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << "barc-policy v1\n";
  write_sizes(out, "policy_sizes", bundle.policy.mean.sizes());
  write_sizes(out, "value_sizes", bundle.value.sizes());
  out << "log_std_len " << bundle.policy.log_std.size() << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", bundle.norm.count);
  out << "norm_count " << buf << "\n";
  write_reals(out, "norm_mean", bundle.norm.mean);
  write_reals(out, "norm_m2", bundle.norm.m2);
  const std::size_t total = bundle.policy.mean.params().size() + bundle.policy.log_std.size() +
                            bundle.value.params().size();
  out << "params " << total << "\n";
  const auto write_block = [&out](std::span<const double> v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  write_block(bundle.policy.mean.params());
  write_block(bundle.policy.log_std);
  write_block(bundle.value.params());
  if (!out) throw std::runtime_error("save_checkpoint: write failure on " + path);
}

PolicyBundle load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "barc-policy v1") throw std::runtime_error("load_checkpoint: bad magic in " + path);

  const std::vector<int> policy_sizes = parse_ints(expect_line(in, "policy_sizes"));
  const std::vector<int> value_sizes = parse_ints(expect_line(in, "value_sizes"));
  const int log_std_len = std::stoi(expect_line(in, "log_std_len"));
  const double norm_count = std::stod(expect_line(in, "norm_count"));
  const std::vector<double> norm_mean = parse_reals(expect_line(in, "norm_mean"));
  const std::vector<double> norm_m2 = parse_reals(expect_line(in, "norm_m2"));
  const std::size_t total = std::stoul(expect_line(in, "params"));

  std::vector<double> block(total);
  in.read(reinterpret_cast<char*>(block.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(total * sizeof(double))) {
    throw std::runtime_error("load_checkpoint: truncated parameter block in " + path);
  }

  PolicyBundle b;
  const auto take = [&block](std::size_t offset, std::size_t n) {
    return std::vector<double>(block.begin() + static_cast<std::ptrdiff_t>(offset),
                               block.begin() + static_cast<std::ptrdiff_t>(offset + n));
  };
  std::size_t off = 0;
  int policy_params = 0;
  for (std::size_t l = 0; l + 1 < policy_sizes.size(); ++l) {
    policy_params += (policy_sizes[l] + 1) * policy_sizes[l + 1];
  }
  b.policy.mean = Mlp(policy_sizes, take(off, static_cast<std::size_t>(policy_params)));
  off += static_cast<std::size_t>(policy_params);
  b.policy.log_std = take(off, static_cast<std::size_t>(log_std_len));
  off += static_cast<std::size_t>(log_std_len);
  b.value = Mlp(value_sizes, take(off, total - off));

  b.norm = RunningNorm(static_cast<int>(norm_mean.size()));
  b.norm.mean = norm_mean;
  b.norm.m2 = norm_m2;
  b.norm.count = norm_count;
  return b;
}

}  // namespace barc
