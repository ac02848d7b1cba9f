#include "barc/quad.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "barc/pointmass.hpp"

using namespace barc;

namespace {

QuadConfig drag_free() {
  QuadConfig cfg;
  cfg.drag_v = 0.0;
  cfg.drag_phi = 0.0;
  cfg.obstacles.clear();
  return cfg;
}

}  // namespace

TEST_CASE("quad_step: hover force balance keeps the state fixed") {
  QuadConfig cfg = drag_free();
  QuadState s{2.0, 2.0, 0.0, 0.0, 0.0, 0.0};
  const double hover = cfg.mass * cfg.gravity / 2.0;
  QuadStepOutput out = quad_step(s, hover, hover, cfg);
  CHECK(out.next.x == doctest::Approx(2.0));
  CHECK(out.next.y == doctest::Approx(2.0));
  CHECK(out.next.vx == doctest::Approx(0.0));
  CHECK(out.next.vy == doctest::Approx(0.0));
  CHECK(out.next.phi == doctest::Approx(0.0));
  CHECK(out.next.omega == doctest::Approx(0.0));
  CHECK(out.terminal == Terminal::None);
  CHECK(out.reward == doctest::Approx(-cfg.control_cost * 2.0 * hover * hover));
}

TEST_CASE("quad_step: ballistic drop is exact for constant acceleration") {
  QuadConfig cfg = drag_free();
  QuadState s{2.0, 3.0, 0.0, 0.0, 0.0, 0.0};
  QuadStepOutput out = quad_step(s, 0.0, 0.0, cfg);
  CHECK(out.next.vy == doctest::Approx(-cfg.gravity * cfg.dt));
  CHECK(out.next.y == doctest::Approx(3.0 - 0.5 * cfg.gravity * cfg.dt * cfg.dt));
  CHECK(out.next.x == doctest::Approx(2.0));
}

TEST_CASE("quad_step: goal region reward and terminal") {
  QuadConfig cfg;
  QuadState s{4.5, 4.5, 0.0, 0.0, 0.0, 0.0};
  const double hover = cfg.mass * cfg.gravity / 2.0;
  QuadStepOutput out = quad_step(s, hover, hover, cfg);
  CHECK(out.terminal == Terminal::Goal);
  CHECK(out.reward == doctest::Approx(1000.0 - cfg.control_cost * 2.0 * hover * hover));
}

TEST_CASE("quad_step: collision with obstacle or wall costs the episode max control cost") {
  QuadConfig cfg;
  const double penalty = cfg.collision_penalty();
  CHECK(penalty == doctest::Approx(200 * 0.01 * 2.0 * cfg.thrust_max * cfg.thrust_max));

  // Moving fast toward the first obstacle (spanning y in [2.0, 2.4]).
  QuadState s{1.0, 1.9, 0.0, 8.0, 0.0, 0.0};
  QuadStepOutput out = quad_step(s, 0.0, 0.0, cfg);
  CHECK(out.terminal == Terminal::Failure);
  CHECK(out.reward == doctest::Approx(-penalty));

  // Flying out through a wall.
  QuadState w{0.05, 1.0, -8.0, 0.0, 0.0, 0.0};
  QuadStepOutput wall = quad_step(w, 0.0, 0.0, cfg);
  CHECK(wall.terminal == Terminal::Failure);
}

TEST_CASE("quad_observe: room geometry and body-frame permutation") {
  QuadConfig cfg;
  cfg.obstacles.clear();
  cfg.workspace_lo = 0.0;
  cfg.workspace_hi = 4.0;  // empty square room of half-width 2
  QuadState s{2.0, 2.0, 0.0, 0.0, 0.0, 0.0};

  auto obs = quad_observe(s, cfg);
  REQUIRE(obs.size() == 14);
  for (int k = 0; k < 8; ++k) {
    const double expected = (k % 2 == 0) ? 2.0 : 2.0 * std::numbers::sqrt2;
    CHECK(obs[static_cast<std::size_t>(6 + k)] == doctest::Approx(expected));
  }

  // An asymmetric scene: rotating the body by 45 degrees shifts readings by
  // one slot.
  cfg.obstacles = {{3.0, 1.0, 3.5, 3.0}};
  auto r0 = quad_observe(s, cfg);
  QuadState rot = s;
  rot.phi = std::numbers::pi / 4.0;
  auto r1 = quad_observe(rot, cfg);
  for (int k = 0; k < 8; ++k) {
    CHECK(r1[static_cast<std::size_t>(6 + k)] ==
          doctest::Approx(r0[static_cast<std::size_t>(6 + (k + 1) % 8)]));
  }

  // Larger room: rays cap at max range.
  cfg.obstacles.clear();
  cfg.workspace_hi = 40.0;
  QuadState far{20.0, 20.0, 0.0, 0.0, 0.0, 0.0};
  auto capped = quad_observe(far, cfg);
  for (int k = 0; k < 8; ++k) CHECK(capped[static_cast<std::size_t>(6 + k)] == cfg.max_range);
}

TEST_CASE("quad energy decreases under drag with zero thrust") {
  QuadConfig cfg;
  cfg.obstacles.clear();
  cfg.workspace_lo = -1e6;  // no walls: isolate the energy argument
  cfg.workspace_hi = 1e6;
  cfg.goal_x = 1e7;
  cfg.goal_y = 1e7;
  QuadState s{0.0, 0.0, 3.0, 2.0, 0.3, 4.0};

  const auto energy = [&](const QuadState& q) {
    return 0.5 * cfg.mass * (q.vx * q.vx + q.vy * q.vy) + 0.5 * cfg.inertia * q.omega * q.omega +
           cfg.mass * cfg.gravity * q.y;
  };
  double prev = energy(s);
  for (int i = 0; i < 200; ++i) {
    QuadStepOutput out = quad_step(s, 0.0, 0.0, cfg);
    const double now = energy(out.next);
    CHECK(now <= prev + 1e-9);
    prev = now;
    s = out.next;
  }
}

TEST_CASE("quad collision flag agrees with dense sampling along the step segment") {
  QuadConfig cfg;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(0.1, 4.9);
  std::uniform_real_distribution<double> vel(-6.0, 6.0);
  std::uniform_real_distribution<double> thrust(0.0, cfg.thrust_max);

  int tested = 0;
  while (tested < 1000) {
    QuadState s{pos(rng), pos(rng), vel(rng), vel(rng), 0.0, 0.0};
    bool inside_obstacle = false;
    for (const Rect& r : cfg.obstacles) {
      if (point_in_rect(r, s.x, s.y)) inside_obstacle = true;
    }
    if (inside_obstacle || quad_goal_test(s, cfg)) continue;

    const double t1 = thrust(rng), t2 = thrust(rng);
    QuadStepOutput out = quad_step(s, t1, t2, cfg);

    // Dense point-sampling oracle along the straight-line interpolation.
    const int n = 20000;
    Terminal oracle = Terminal::None;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const double x = s.x + t * (out.next.x - s.x);
      const double y = s.y + t * (out.next.y - s.y);
      if (x >= cfg.goal_x && y >= cfg.goal_y) {
        oracle = Terminal::Goal;
        break;
      }
      bool hit = x < cfg.workspace_lo || x > cfg.workspace_hi || y < cfg.workspace_lo ||
                 y > cfg.workspace_hi;
      for (const Rect& r : cfg.obstacles) {
        if (point_in_rect(r, x, y)) hit = true;
      }
      if (hit) {
        oracle = Terminal::Failure;
        break;
      }
    }
    CHECK(out.terminal == oracle);
    ++tested;
  }
}

TEST_CASE("quad env: reward accounting over a full episode") {
  QuadConfig cfg;
  QuadEnv env(cfg);
  env.reset(std::vector<double>{1.0, 1.0, 0.0, 0.0, 0.0, 0.0});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> act(-1.0, 1.0);

  double total = 0.0;
  double control_cost_sum = 0.0;
  bool reached_goal = false, collided = false;
  while (true) {
    const std::vector<double> a{act(rng), act(rng)};
    const auto phys = env.physical_action(a);
    control_cost_sum += cfg.control_cost * (phys[0] * phys[0] + phys[1] * phys[1]);
    StepResult r = env.step(a);
    total += r.reward;
    if (r.terminal == Terminal::Goal) reached_goal = true;
    if (r.terminal == Terminal::Failure) collided = true;
    if (r.terminal != Terminal::None) break;
  }
  const double recomputed = -control_cost_sum + (reached_goal ? 1000.0 : 0.0) -
                            (collided ? cfg.collision_penalty() : 0.0);
  CHECK(total == doctest::Approx(recomputed));
}

TEST_CASE("quad curriculum: H(x,0)=0, alpha bounds, trivial x-subsystem value") {
  QuadConfig env_cfg;
  QuadCurriculumConfig cur_cfg;
  CurriculumModel model = quad_curriculum(env_cfg, cur_cfg);
  REQUIRE(model.subsystems.size() == 5);

  // x-subsystem with v_x in [-2, 2]: lambda = 1 -> H = -2.
  QuadCurriculumConfig narrow = cur_cfg;
  narrow.v_lo = -2.0;
  narrow.v_hi = 2.0;
  CurriculumModel m2 = quad_curriculum(env_cfg, narrow);
  CHECK(m2.subsystems[2].hamiltonian.eval({1.0, 0.0}, {1.0, 0.0}).H == doctest::Approx(-2.0));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (const Subsystem& sub : model.subsystems) {
    for (int t = 0; t < 200; ++t) {
      Vec2 x{unif(rng), unif(rng)};
      CHECK(sub.hamiltonian.eval(x, {0.0, 0.0}).H == doctest::Approx(0.0));
      Vec2 lambda{unif(rng), unif(rng)};
      const HamiltonianEval e = sub.hamiltonian.eval(x, lambda);
      for (int a = 0; a < sub.grid.dim; ++a) {
        const double eps = 1e-6;
        Vec2 lp = lambda, lm = lambda;
        lp[a] += eps;
        lm[a] -= eps;
        const double dh = (sub.hamiltonian.eval(x, lp).H - sub.hamiltonian.eval(x, lm).H) / (2 * eps);
        CHECK(std::abs(dh) <= e.alpha[a] + 1e-6);
      }
    }
  }
}

TEST_CASE("point mass: exact kinematics, dense reward, goal detection") {
  PointMassConfig cfg;
  PointMassEnv env(cfg);
  env.reset(std::vector<double>{0.0, 1.0});
  StepResult r = env.step(std::vector<double>{0.0});
  CHECK(r.obs[0] == doctest::Approx(0.1));
  CHECK(r.obs[1] == doctest::Approx(1.0));
  CHECK(r.reward == doctest::Approx(-cfg.dense_coef * (0.1 - cfg.goal_x) * (0.1 - cfg.goal_x)));

  env.reset(std::vector<double>{1.45, 0.0});
  r = env.step(std::vector<double>{0.0});
  CHECK(r.terminal == Terminal::Goal);
  CHECK(r.reward > 9.0);
}
