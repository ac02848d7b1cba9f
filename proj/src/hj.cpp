#include "barc/hj.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace barc {

namespace {

double neighbor_value(const ScalarField& f, const Idx2& node, int axis, int offset) {
  const Grid& g = f.grid;
  Idx2 idx = node;
  int j = idx[axis] + offset;
  if (g.periodic[axis]) {
    j = (j % g.n[axis] + g.n[axis]) % g.n[axis];
  }
  idx[axis] = j;
  return f.values[static_cast<std::size_t>(g.index(idx))];
}

struct StepWorkspace {
  std::vector<Vec2> coords;       // node coordinates
  std::vector<double> next;       // double buffer
};

void prepare_workspace(const ScalarField& f, StepWorkspace& ws) {
  const Grid& g = f.grid;
  const std::int64_t total = g.node_count();
  ws.coords.resize(static_cast<std::size_t>(total));
  ws.next.resize(static_cast<std::size_t>(total));
  for (std::int64_t k = 0; k < total; ++k) {
    ws.coords[static_cast<std::size_t>(k)] = g.node_coords(g.unindex(k));
  }
}

// One Lax-Friedrichs update into ws.next; returns false if a non-finite
// value appeared.
bool lf_update(const ScalarField& f, const HamiltonianSpec& h, double dt, StepWorkspace& ws) {
  const Grid& g = f.grid;
  const std::int64_t total = g.node_count();
  bool finite = true;
  for (std::int64_t k = 0; k < total; ++k) {
    const Idx2 node = g.unindex(k);
    const UpwindGradient grad = upwind_gradient(f, node);
    Vec2 lambda{0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) lambda[a] = 0.5 * (grad.minus[a] + grad.plus[a]);
    const HamiltonianEval he = h.eval(ws.coords[static_cast<std::size_t>(k)], lambda);
    double dissipation = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      dissipation += he.alpha[a] * 0.5 * (grad.plus[a] - grad.minus[a]);
    }
    // Backward-time step of V_t + H(x, grad V) = 0: stepping from t to t-dt
    // adds +dt*H; the Lax-Friedrichs term acts as viscosity in the stepping
    // direction.
    const double v = f.values[static_cast<std::size_t>(k)] + dt * (he.H + dissipation);
    if (!std::isfinite(v)) finite = false;
    ws.next[static_cast<std::size_t>(k)] = v;
  }
  return finite;
}

double cfl_rate(const ScalarField& f, const HamiltonianSpec& h, const StepWorkspace& ws) {
  const Grid& g = f.grid;
  Vec2 alpha_max{0.0, 0.0};
  const Vec2 zero{0.0, 0.0};
  for (const Vec2& x : ws.coords) {
    const HamiltonianEval he = h.eval(x, zero);
    for (int a = 0; a < g.dim; ++a) alpha_max[a] = std::max(alpha_max[a], he.alpha[a]);
  }
  double rate = 0.0;
  for (int a = 0; a < g.dim; ++a) rate += alpha_max[a] / g.dx(a);
  return rate;
}

}  // namespace

UpwindGradient upwind_gradient(const ScalarField& f, const Idx2& node) {
  const Grid& g = f.grid;
  UpwindGradient out;
  const double center = f.values[static_cast<std::size_t>(g.index(node))];
  for (int a = 0; a < g.dim; ++a) {
    const double dx = g.dx(a);
    const int j = node[a];
    const bool at_lo = !g.periodic[a] && j == 0;
    const bool at_hi = !g.periodic[a] && j == g.n[a] - 1;
    if (at_lo) {
      const double fwd = (neighbor_value(f, node, a, +1) - center) / dx;
      out.minus[a] = fwd;  // ghost = 2 V0 - V1
      out.plus[a] = fwd;
    } else if (at_hi) {
      const double bwd = (center - neighbor_value(f, node, a, -1)) / dx;
      out.minus[a] = bwd;
      out.plus[a] = bwd;  // ghost = 2 Vn-1 - Vn-2
    } else {
      out.minus[a] = (center - neighbor_value(f, node, a, -1)) / dx;
      out.plus[a] = (neighbor_value(f, node, a, +1) - center) / dx;
    }
  }
  return out;
}

double cfl_dt_bound(const ScalarField& f, const HamiltonianSpec& h, double cfl) {
  if (h.dim != f.grid.dim) throw std::runtime_error("cfl_dt_bound: dimension mismatch");
  StepWorkspace ws;
  prepare_workspace(f, ws);
  const double rate = cfl_rate(f, h, ws);
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return cfl / rate;
}

ScalarField lax_friedrichs_step(const ScalarField& f, const HamiltonianSpec& h, double dt) {
  if (h.dim != f.grid.dim) throw std::runtime_error("lax_friedrichs_step: dimension mismatch");
  if (dt < 0.0) throw std::runtime_error("lax_friedrichs_step: negative dt");
  StepWorkspace ws;
  prepare_workspace(f, ws);
  const double rate = cfl_rate(f, h, ws);
  if (dt * rate > 1.0 + 1e-12) {
    throw std::runtime_error("lax_friedrichs_step: CFL violation (dt " + std::to_string(dt) +
                             " exceeds bound " + std::to_string(1.0 / rate) + ")");
  }
  ScalarField out = f;
  if (dt == 0.0) return out;
  if (!lf_update(f, h, dt, ws)) {
    throw std::runtime_error("lax_friedrichs_step: non-finite update");
  }
  out.values = ws.next;
  out.time = f.time - dt;
  return out;
}

ScalarField solve_brs(const ScalarField& target, const HamiltonianSpec& h, const SolveParams& p) {
  if (h.dim != target.grid.dim) throw std::runtime_error("solve_brs: dimension mismatch");
  if (target.time != 0.0) throw std::runtime_error("solve_brs: target field must carry time 0");
  if (p.horizon <= 0.0) throw std::runtime_error("solve_brs: horizon must be positive");
  if (p.cfl <= 0.0 || p.cfl > 1.0) throw std::runtime_error("solve_brs: cfl must lie in (0, 1]");

  StepWorkspace ws;
  prepare_workspace(target, ws);
  const double rate = cfl_rate(target, h, ws);
  const double dt_max = rate > 0.0 ? p.cfl / rate : p.horizon;

  int n_steps;
  double dt;
  if (p.dt_override > 0.0) {
    if (p.dt_override * rate > p.cfl + 1e-12) {
      throw std::runtime_error("solve_brs: dt_override violates the CFL bound");
    }
    dt = p.dt_override;
    n_steps = static_cast<int>(std::ceil(p.horizon / dt - 1e-12));
  } else {
    n_steps = std::max(1, static_cast<int>(std::ceil(p.horizon / dt_max - 1e-12)));
    dt = p.horizon / n_steps;
  }

  ScalarField v = target;
  double remaining = p.horizon;
  for (int step = 0; step < n_steps; ++step) {
    const double step_dt = std::min(dt, remaining);
    if (!lf_update(v, h, step_dt, ws)) {
      throw std::runtime_error("solver diverged at step " + std::to_string(step));
    }
    // Reach-within-horizon freeze: the target stays inside the set.
    for (std::size_t k = 0; k < v.values.size(); ++k) {
      v.values[k] = std::min(ws.next[k], target.values[k]);
    }
    remaining -= step_dt;
  }
  v.time = -p.horizon;
  return v;
}

}  // namespace barc
