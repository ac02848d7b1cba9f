#pragma once

#include <functional>

#include "barc/grid.hpp"

namespace barc {

/// Analytic Hamiltonian evaluation at one state/costate pair.
/// H is the exact minimum of lambda . f(x, u) over admissible controls;
/// alpha[i] bounds |dH/dlambda[i]| at x (i.e. max |f_i(x, u)| over controls)
/// and feeds both the Lax-Friedrichs dissipation and the CFL bound.
struct HamiltonianEval {
  double H = 0.0;
  Vec2 alpha{0.0, 0.0};
};

struct HamiltonianSpec {
  int dim = 1;
  std::function<HamiltonianEval(const Vec2& x, const Vec2& lambda)> eval;
};

struct SolveParams {
  double horizon = 0.1;  // T, seconds
  double cfl = 0.8;
  // When positive, use this fixed step (validated against the CFL bound)
  // with a final partial step; solves sharing a dt then agree bitwise on
  // their common prefix, giving exact nestedness across horizons.
  double dt_override = 0.0;
};

struct UpwindGradient {
  Vec2 minus{0.0, 0.0};
  Vec2 plus{0.0, 0.0};
};

/// First-order one-sided difference quotients along each axis. Non-periodic
/// boundary nodes use a linearly extrapolated ghost value, which collapses
/// both quotients onto the interior one-sided difference.
UpwindGradient upwind_gradient(const ScalarField& f, const Idx2& node);

/// Largest stable dt for this field/Hamiltonian at the given CFL number:
/// cfl / sum_i (max-over-grid alpha[i] / dx[i]).
double cfl_dt_bound(const ScalarField& f, const HamiltonianSpec& h, double cfl);

/// One explicit backward-time step of V_t + H(x, grad V) = 0 with local
/// Lax-Friedrichs dissipation. Throws on CFL violation (hard bound cfl = 1).
ScalarField lax_friedrichs_step(const ScalarField& f, const HamiltonianSpec& h, double dt);

/// Integrate the target field from t = 0 to t = -T, re-applying
/// V <- min(V, target) after every step, so the zero sublevel set is the
/// reach-within-horizon set and grows monotonically with T.
/// Throws "solver diverged" (with the step index) if values go non-finite.
ScalarField solve_brs(const ScalarField& target, const HamiltonianSpec& h, const SolveParams& p);

}  // namespace barc
