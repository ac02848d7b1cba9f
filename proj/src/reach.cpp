#include "barc/reach.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <stdexcept>

#include "barc/log.hpp"

namespace barc {

namespace {

RateLimitedLog g_contains_log("reach");

std::string format_state(std::span<const double> s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
  os << ")";
  return os.str();
}

ScalarField subsystem_target(const Subsystem& sub,
                             const std::vector<std::vector<double>>& cur_starts,
                             double halfwidth_cells) {
  const Grid& g = sub.grid;
  ScalarField target;
  bool first = true;
  for (const std::vector<double>& cur : cur_starts) {
    Box box;
    box.dim = g.dim;
    for (int a = 0; a < g.dim; ++a) {
      const int axis = sub.axes[static_cast<std::size_t>(a)];
      const double c = cur[static_cast<std::size_t>(axis)];
      if (!g.contains_coord(a, c)) {
        throw std::runtime_error("expand_backwards: start " + format_state(cur) +
                                 " lies outside subsystem '" + sub.name + "' grid on axis " +
                                 std::to_string(axis));
      }
      const double w = halfwidth_cells * g.dx(a);
      if (g.periodic[a]) {
        box.lo[a] = g.wrap_coord(a, c - w);
        box.hi[a] = g.wrap_coord(a, c + w);
      } else {
        box.lo[a] = std::max(g.lo[a], c - w);
        box.hi[a] = std::min(g.hi[a], c + w);
      }
    }
    ScalarField piece = signed_box(g, box);
    target = first ? std::move(piece) : pointwise_min(target, piece);
    first = false;
  }
  return target;
}

// Sampling envelope per curriculum axis: intersection of the bounding boxes
// of every component covering that axis.
struct AxisInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;
  double domain_lo = 0.0;
  double domain_len = 0.0;
  bool set = false;
};

}  // namespace

StateMap StateMap::identity(int dim) {
  StateMap m;
  m.sim_dim = dim;
  m.cur_dim = dim;
  m.forward = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
  m.pullback = [](std::span<const double> cur, std::span<const double>) {
    return std::vector<double>(cur.begin(), cur.end());
  };
  return m;
}

DecomposedBRS expand_backwards(const std::vector<std::vector<double>>& starts,
                               const CurriculumModel& model, double T, const ExpandOptions& opts) {
  if (starts.empty()) throw std::runtime_error("expand_backwards: empty starts list");
  if (T <= 0.0) throw std::runtime_error("expand_backwards: horizon must be positive");

  std::vector<std::vector<double>> cur_starts;
  cur_starts.reserve(starts.size());
  for (const std::vector<double>& s : starts) cur_starts.push_back(model.map.forward(s));

  DecomposedBRS brs;
  brs.subsystems = model.subsystems;
  brs.map = model.map;
  brs.horizon = T;
  brs.fields.resize(model.subsystems.size());
  brs.boxes.resize(model.subsystems.size());

  const auto solve_one = [&](std::size_t k) {
    const Subsystem& sub = model.subsystems[k];
    ScalarField target = subsystem_target(sub, cur_starts, opts.target_halfwidth_cells);
    SolveParams params;
    params.horizon = T;
    params.cfl = opts.cfl;
    params.dt_override = opts.dt_override;
    brs.fields[k] = solve_brs(target, sub.hamiltonian, params);
    auto box = sublevel_bounding_box(brs.fields[k], 0.0);
    if (!box) {
      throw std::runtime_error("expand_backwards: subsystem '" + sub.name +
                               "' produced an empty BRS component");
    }
    brs.boxes[k] = *box;
  };

  if (opts.parallel && model.subsystems.size() > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t k = 0; k < model.subsystems.size(); ++k) {
      jobs.push_back(std::async(std::launch::async, solve_one, k));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (std::size_t k = 0; k < model.subsystems.size(); ++k) solve_one(k);
  }
  return brs;
}

bool contains_curriculum(const DecomposedBRS& brs, std::span<const double> cur_state) {
  for (std::size_t k = 0; k < brs.subsystems.size(); ++k) {
    const Subsystem& sub = brs.subsystems[k];
    const Grid& g = sub.grid;
    double proj[kMaxGridDim] = {0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
      proj[a] = cur_state[static_cast<std::size_t>(sub.axes[static_cast<std::size_t>(a)])];
      if (!g.contains_coord(a, proj[a])) {
        g_contains_log.debug("contains: state projects outside '" + sub.name + "' grid");
        return false;
      }
    }
    if (interpolate(brs.fields[k], std::span<const double>(proj, static_cast<std::size_t>(g.dim))) >
        0.0) {
      return false;
    }
  }
  return true;
}

bool contains(const DecomposedBRS& brs, std::span<const double> sim_state) {
  return contains_curriculum(brs, brs.map.forward(sim_state));
}

std::vector<std::vector<double>> sample_starts(const DecomposedBRS& brs, int count,
                                               std::uint64_t rng_seed,
                                               const ValidityPredicate& validity,
                                               std::span<const double> template_state,
                                               const SampleOptions& opts) {
  if (count < 1) throw std::runtime_error("sample_starts: count must be >= 1");

  const int cur_dim = brs.map.cur_dim;
  std::vector<AxisInterval> intervals(static_cast<std::size_t>(cur_dim));
  for (std::size_t k = 0; k < brs.subsystems.size(); ++k) {
    const Subsystem& sub = brs.subsystems[k];
    for (int a = 0; a < sub.grid.dim; ++a) {
      const int axis = sub.axes[static_cast<std::size_t>(a)];
      AxisInterval& iv = intervals[static_cast<std::size_t>(axis)];
      Box axis_box{1, {brs.boxes[k].lo[a], 0.0}, {brs.boxes[k].hi[a], 0.0}};
      if (!iv.set) {
        iv.lo = axis_box.lo[0];
        iv.hi = axis_box.hi[0];
        iv.periodic = sub.grid.periodic[a];
        iv.domain_lo = sub.grid.lo[a];
        iv.domain_len = sub.grid.length(a);
        iv.set = true;
        continue;
      }
      // Axis covered by a second component: intersect the two extents.
      Grid line;
      line.dim = 1;
      line.lo = {iv.domain_lo, 0.0};
      line.hi = {iv.domain_lo + iv.domain_len, 1.0};
      line.n = {sub.grid.n[a], 1};
      line.periodic = {iv.periodic, false};
      Box current{1, {iv.lo, 0.0}, {iv.hi, 0.0}};
      auto merged = intersect_boxes(line, current, axis_box);
      if (!merged) {
        throw std::runtime_error("BRS sampling starved: empty intersection of component boxes on axis " +
                                 std::to_string(axis));
      }
      iv.lo = merged->lo[0];
      iv.hi = merged->hi[0];
    }
  }
  for (int axis = 0; axis < cur_dim; ++axis) {
    if (!intervals[static_cast<std::size_t>(axis)].set) {
      throw std::runtime_error("sample_starts: no subsystem covers curriculum axis " +
                               std::to_string(axis));
    }
  }

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::vector<double>> accepted;
  accepted.reserve(static_cast<std::size_t>(count));
  std::vector<double> cur(static_cast<std::size_t>(cur_dim));
  std::int64_t drawn = 0;
  while (static_cast<int>(accepted.size()) < count) {
    ++drawn;
    if (drawn % opts.candidate_budget == 0) {
      const double rate = static_cast<double>(accepted.size()) / static_cast<double>(drawn);
      if (rate < opts.min_acceptance) {
        throw std::runtime_error("BRS sampling starved: acceptance rate " + std::to_string(rate) +
                                 " after " + std::to_string(drawn) + " candidates");
      }
    }
    for (int axis = 0; axis < cur_dim; ++axis) {
      const AxisInterval& iv = intervals[static_cast<std::size_t>(axis)];
      double len = iv.hi - iv.lo;
      if (iv.periodic && len < 0.0) len += iv.domain_len;
      double x = iv.lo + unif(rng) * len;
      if (iv.periodic) {
        double w = std::fmod(x - iv.domain_lo, iv.domain_len);
        if (w < 0) w += iv.domain_len;
        x = iv.domain_lo + w;
      }
      cur[static_cast<std::size_t>(axis)] = x;
    }
    if (!contains_curriculum(brs, cur)) continue;
    std::vector<double> sim = brs.map.pullback(cur, template_state);
    if (validity && !validity(sim)) continue;
    accepted.push_back(std::move(sim));
  }
  return accepted;
}

void dump_brs(const DecomposedBRS& brs, const std::string& dir, const std::string& prefix) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / (prefix + "manifest.txt"));
  if (!manifest) throw std::runtime_error("dump_brs: cannot open manifest in " + dir);
  manifest << "brs horizon_s=" << brs.horizon << " components=" << brs.subsystems.size() << "\n";
  for (std::size_t k = 0; k < brs.subsystems.size(); ++k) {
    const Subsystem& sub = brs.subsystems[k];
    const std::string base = prefix + "component_" + sub.name;
    write_field_file((fs::path(dir) / (base + ".field")).string(), brs.fields[k]);
    std::ofstream csv(fs::path(dir) / (base + ".csv"));
    write_contour_csv(csv, brs.fields[k]);

    manifest << "component name=" << sub.name << " axes=";
    for (std::size_t a = 0; a < sub.axes.size(); ++a) {
      manifest << (a ? "," : "") << sub.axes[a];
    }
    manifest << " nodes_in_set=" << count_sublevel_nodes(brs.fields[k], 0.0) << " box=";
    for (int a = 0; a < sub.grid.dim; ++a) {
      manifest << (a ? ";" : "") << "[" << brs.boxes[k].lo[a] << "," << brs.boxes[k].hi[a] << "]";
    }
    manifest << " file=" << base << ".field\n";
  }
}

}  // namespace barc
