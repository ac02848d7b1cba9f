#include "barc/hj.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"

using namespace barc;

namespace {

// 1-D single integrator xdot = u, |u| <= ubar.
HamiltonianSpec integrator_1d(double ubar) {
  HamiltonianSpec h;
  h.dim = 1;
  h.eval = [ubar](const Vec2&, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = -ubar * std::abs(lambda[0]);
    e.alpha = {ubar, 0.0};
    return e;
  };
  return h;
}

// Double integrator xdot = v, vdot = u, |u| <= 1 on axes (x, v).
HamiltonianSpec double_integrator() {
  HamiltonianSpec h;
  h.dim = 2;
  h.eval = [](const Vec2& x, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = lambda[0] * x[1] - std::abs(lambda[1]);
    e.alpha = {std::abs(x[1]), 1.0};
    return e;
  };
  return h;
}

HamiltonianSpec zero_dynamics(int dim) {
  HamiltonianSpec h;
  h.dim = dim;
  h.eval = [](const Vec2&, const Vec2&) { return HamiltonianEval{}; };
  return h;
}

// Interval where the field is nonpositive, via sign scan.
std::pair<double, double> negative_interval(const ScalarField& f) {
  double lo = 1e300, hi = -1e300;
  for (int k = 0; k < f.grid.n[0]; ++k) {
    if (f.values[static_cast<std::size_t>(k)] <= 0.0) {
      lo = std::min(lo, f.grid.coord(0, k));
      hi = std::max(hi, f.grid.coord(0, k));
    }
  }
  return {lo, hi};
}

}  // namespace

TEST_CASE("upwind_gradient: linear, constant, kinked fields") {
  Grid g = Grid::line(-1.0, 1.0, 101);
  ScalarField lin = make_field(g);
  for (int k = 0; k < g.n[0]; ++k) lin.values[static_cast<std::size_t>(k)] = 2.0 * g.coord(0, k);

  for (int k : {0, 1, 50, 99, 100}) {
    const UpwindGradient gr = upwind_gradient(lin, {k, 0});
    CHECK(gr.minus[0] == doctest::Approx(2.0));
    CHECK(gr.plus[0] == doctest::Approx(2.0));
  }

  ScalarField flat = make_field(g, 3.0);
  const UpwindGradient gf = upwind_gradient(flat, {17, 0});
  CHECK(gf.minus[0] == 0.0);
  CHECK(gf.plus[0] == 0.0);

  ScalarField kink = make_field(g);
  for (int k = 0; k < g.n[0]; ++k) kink.values[static_cast<std::size_t>(k)] = std::abs(g.coord(0, k));
  const UpwindGradient gk = upwind_gradient(kink, {50, 0});  // node at x = 0
  CHECK(gk.minus[0] == doctest::Approx(-1.0));
  CHECK(gk.plus[0] == doctest::Approx(1.0));
}

TEST_CASE("lax_friedrichs_step: stationary under zero Hamiltonian, identity at dt 0") {
  Grid g = Grid::line(-1.0, 1.0, 101);
  ScalarField f = signed_box(g, Box{1, {-0.2, 0.0}, {0.2, 0.0}});

  ScalarField stepped = lax_friedrichs_step(f, zero_dynamics(1), 0.05);
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(stepped.values[k] == f.values[k]);
  CHECK(stepped.time == doctest::Approx(-0.05));

  ScalarField frozen = lax_friedrichs_step(f, integrator_1d(1.0), 0.0);
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(frozen.values[k] == f.values[k]);
}

TEST_CASE("lax_friedrichs_step rejects CFL violation") {
  Grid g = Grid::line(-1.0, 1.0, 101);  // dx = 0.02, bound = 0.02 for ubar = 1
  ScalarField f = signed_box(g, Box{1, {-0.2, 0.0}, {0.2, 0.0}});
  CHECK_THROWS(static_cast<void>(lax_friedrichs_step(f, integrator_1d(1.0), 0.05)));
}

TEST_CASE("solve_brs: 1-D integrator grows the target at speed ubar") {
  Grid g = Grid::line(-1.0, 1.0, 201);
  ScalarField target = signed_box(g, Box{1, {-0.1, 0.0}, {0.1, 0.0}});
  ScalarField v = solve_brs(target, integrator_1d(1.0), SolveParams{0.2, 0.8, 0.0});

  // Analytic reach set is |x| <= 0.1 + T = 0.3; allow 2 grid cells.
  const auto [lo, hi] = negative_interval(v);
  const double tol = 2.0 * g.dx(0) + 1e-12;
  CHECK(std::abs(lo + 0.3) <= tol);
  CHECK(std::abs(hi - 0.3) <= tol);
  CHECK(v.time == doctest::Approx(-0.2));
}

TEST_CASE("solve_brs: car speed subsystem analytic interval") {
  Grid g = Grid::line(-2.0, 2.0, 201);
  ScalarField target = signed_box(g, Box{1, {0.4, 0.0}, {0.6, 0.0}});
  ScalarField v = solve_brs(target, integrator_1d(2.0), SolveParams{0.1, 0.8, 0.0});

  const auto [lo, hi] = negative_interval(v);
  const double tol = 2.0 * g.dx(0) + 1e-12;
  CHECK(std::abs(lo - 0.2) <= tol);
  CHECK(std::abs(hi - 0.8) <= tol);
}

TEST_CASE("solve_brs: tiny horizon returns (almost exactly) the target") {
  Grid g = Grid::line(-1.0, 1.0, 201);
  ScalarField target = signed_box(g, Box{1, {-0.1, 0.0}, {0.1, 0.0}});
  ScalarField v = solve_brs(target, integrator_1d(1.0), SolveParams{1e-9, 0.8, 0.0});
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    CHECK(v.values[k] == doctest::Approx(target.values[k]).epsilon(1e-6));
  }
}

TEST_CASE("solve_brs: zero dynamics keeps the target for any horizon") {
  Grid g = Grid::plane(-1.0, 1.0, 41, -1.0, 1.0, 41);
  ScalarField target = signed_box(g, Box{2, {-0.3, -0.3}, {0.3, 0.3}});
  ScalarField v = solve_brs(target, zero_dynamics(2), SolveParams{0.7, 0.8, 0.0});
  for (std::size_t k = 0; k < v.values.size(); ++k) CHECK(v.values[k] == target.values[k]);
}

TEST_CASE("solve_brs: target containment and nestedness across horizons") {
  Grid g = Grid::plane(-2.0, 2.0, 81, -2.0, 2.0, 81);
  ScalarField target = signed_box(g, Box{2, {-0.5, -1.0}, {0.5, 1.0}});
  HamiltonianSpec h = double_integrator();

  // Shared fixed dt makes longer-horizon solves exact continuations.
  const double dt = cfl_dt_bound(target, h, 0.8);
  SolveParams p1{0.25, 0.8, dt};
  SolveParams p2{0.5, 0.8, dt};
  ScalarField v1 = solve_brs(target, h, p1);
  ScalarField v2 = solve_brs(target, h, p2);

  for (std::size_t k = 0; k < target.values.size(); ++k) {
    if (target.values[k] <= 0.0) {
      CHECK(v1.values[k] <= 0.0);
      CHECK(v2.values[k] <= 0.0);
    }
    CHECK(v2.values[k] <= v1.values[k]);
    CHECK(v1.values[k] <= target.values[k]);
  }
}

TEST_CASE("solve_brs matches bang-bang forward-shooting oracle on the double integrator") {
  Grid g = Grid::plane(-2.0, 2.0, 101, -2.0, 2.0, 101);
  const Box target_box{2, {-0.5, -1.0}, {0.5, 1.0}};
  ScalarField target = signed_box(g, target_box);
  ScalarField v = solve_brs(target, double_integrator(), SolveParams{0.5, 0.8, 0.0});

  std::vector<char> solver_mask(v.values.size());
  for (std::size_t k = 0; k < v.values.size(); ++k) solver_mask[k] = v.values[k] <= 0.0 ? 1 : 0;
  const std::vector<char> oracle_mask = oracle::double_integrator_reach(g, target_box, 0.5, 20);

  CHECK(oracle::mask_iou(solver_mask, oracle_mask) >= 0.9);

  // Within 2 cells of the oracle boundary: >= 90% agreement; farther: 100%.
  const std::vector<int> dist = oracle::cells_to_boundary(g, oracle_mask, 3);
  std::size_t near_total = 0, near_agree = 0, far_total = 0, far_agree = 0;
  for (std::size_t k = 0; k < solver_mask.size(); ++k) {
    if (dist[k] <= 2) {
      ++near_total;
      if (solver_mask[k] == oracle_mask[k]) ++near_agree;
    } else {
      ++far_total;
      if (solver_mask[k] == oracle_mask[k]) ++far_agree;
    }
  }
  CHECK(near_total > 0);
  CHECK(static_cast<double>(near_agree) >= 0.9 * static_cast<double>(near_total));
  CHECK(far_agree == far_total);
}

TEST_CASE("solve_brs reports divergence with the offending step") {
  Grid g = Grid::line(-1.0, 1.0, 101);
  ScalarField target = signed_box(g, Box{1, {-0.2, 0.0}, {0.2, 0.0}});
  HamiltonianSpec bad;
  bad.dim = 1;
  bad.eval = [](const Vec2&, const Vec2& lambda) {
    HamiltonianEval e;
    e.H = std::abs(lambda[0]) > 0.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    e.alpha = {1.0, 0.0};
    return e;
  };
  CHECK_THROWS_WITH_AS(static_cast<void>(solve_brs(target, bad, SolveParams{0.1, 0.8, 0.0})),
                       doctest::Contains("solver diverged"), std::runtime_error);
}

TEST_CASE("solve_brs validates preconditions") {
  Grid g = Grid::line(-1.0, 1.0, 101);
  ScalarField target = signed_box(g, Box{1, {-0.2, 0.0}, {0.2, 0.0}});
  target.time = -0.05;
  CHECK_THROWS(static_cast<void>(solve_brs(target, integrator_1d(1.0), SolveParams{0.1, 0.8, 0.0})));
  target.time = 0.0;
  CHECK_THROWS(static_cast<void>(solve_brs(target, integrator_1d(1.0), SolveParams{-0.1, 0.8, 0.0})));
  CHECK_THROWS(static_cast<void>(solve_brs(target, integrator_1d(1.0), SolveParams{0.1, 1.5, 0.0})));
}
