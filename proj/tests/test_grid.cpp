#include "barc/grid.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"

using namespace barc;

namespace {

// Independent membership oracle: is x inside the (possibly wrapping) box?
bool point_in_box(const Grid& g, const Box& box, const Vec2& x) {
  for (int a = 0; a < g.dim; ++a) {
    const double xa = g.wrap_coord(a, x[a]);
    if (g.periodic[a] && box.lo[a] > box.hi[a]) {
      if (!(xa >= box.lo[a] || xa <= box.hi[a])) return false;
    } else {
      if (xa < box.lo[a] || xa > box.hi[a]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("grid basics: spacing, indexing, wrap") {
  Grid g1 = Grid::line(-1.0, 1.0, 201);
  CHECK(g1.dx(0) == doctest::Approx(0.01));
  CHECK(g1.node_count() == 201);
  CHECK(g1.coord(0, 100) == doctest::Approx(0.0));

  Grid gt = Grid::line(-std::numbers::pi, std::numbers::pi, 100, true);
  CHECK(gt.dx(0) == doctest::Approx(2.0 * std::numbers::pi / 100));
  CHECK(gt.wrap_coord(0, std::numbers::pi) == doctest::Approx(-std::numbers::pi));

  Grid g2 = Grid::plane(0.0, 1.0, 5, 0.0, 2.0, 7);
  CHECK(g2.node_count() == 35);
  CHECK(g2.index({1, 3}) == 10);
  const Idx2 idx = g2.unindex(10);
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 3);

  CHECK_THROWS(Grid::line(1.0, -1.0, 10));
  CHECK_THROWS(Grid::line(0.0, 1.0, 2));
}

TEST_CASE("signed_box: interval distances on a 1-D grid") {
  Grid g = Grid::line(-1.0, 1.0, 201);
  Box box{1, {-0.1, 0.0}, {0.1, 0.0}};
  ScalarField f = signed_box(g, box);

  CHECK(f.at({100, 0}) == doctest::Approx(-0.1));  // node at 0.0, interval center
  CHECK(f.at({150, 0}) == doctest::Approx(0.4));   // node at 0.5
  CHECK(f.at({110, 0}) == doctest::Approx(0.0));   // node at 0.1, boundary
}

TEST_CASE("signed_box: wrapped interval on a periodic axis") {
  Grid g = Grid::line(-std::numbers::pi, std::numbers::pi, 200, true);
  Box box{1, {3.0, 0.0}, {-3.0, 0.0}};  // wraps through the seam
  ScalarField f = signed_box(g, box);

  const double at_pi = interpolate(f, std::vector<double>{std::numbers::pi});
  CHECK(at_pi < 0.0);
  const double at_zero = interpolate(f, std::vector<double>{0.0});
  CHECK(at_zero > 0.0);
}

TEST_CASE("signed_box: box outside domain errors") {
  Grid g = Grid::line(-1.0, 1.0, 41);
  Box box{1, {2.0, 0.0}, {3.0, 0.0}};
  CHECK_THROWS_WITH(static_cast<void>(signed_box(g, box)), "empty target on grid");
}

TEST_CASE("signed_box sign agrees with brute-force membership oracle") {
  std::mt19937_64 rng(12345);
  const Grid grids[] = {
      Grid::plane(-2.0, 2.0, 41, -std::numbers::pi, std::numbers::pi, 36, false, true),
      Grid::plane(-5.0, 5.0, 51, -5.0, 5.0, 51),
      Grid::line(-std::numbers::pi, std::numbers::pi, 64, true),
  };
  for (const Grid& g : grids) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Box box;
    box.dim = g.dim;
    for (int a = 0; a < g.dim; ++a) {
      const double c = g.lo[a] + unif(rng) * g.length(a);
      const double w = (0.1 + 0.3 * unif(rng)) * g.length(a) * 0.5;
      if (g.periodic[a]) {
        box.lo[a] = g.wrap_coord(a, c - w);
        box.hi[a] = g.wrap_coord(a, c + w);
      } else {
        box.lo[a] = std::max(g.lo[a], c - w);
        box.hi[a] = std::min(g.hi[a], c + w);
      }
    }
    ScalarField f = signed_box(g, box);

    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Vec2 x{0.0, 0.0};
      std::vector<double> q(static_cast<std::size_t>(g.dim));
      for (int a = 0; a < g.dim; ++a) {
        x[a] = g.lo[a] + unif(rng) * g.length(a);
        q[static_cast<std::size_t>(a)] = x[a];
      }
      // Evaluate the sign analytically (not via interpolation, which smears
      // the boundary); skip points too close to the surface to call.
      double v = -1e300;
      for (int a = 0; a < g.dim; ++a) {
        v = std::max(v, signed_interval_distance(g, a, box.lo[a], box.hi[a], x[a]));
      }
      if (std::abs(v) < 1e-9) continue;
      ++checked;
      CHECK((v < 0.0) == point_in_box(g, box, x));
    }
    CHECK(checked > 900);
  }
}

TEST_CASE("pointwise_min is union of implicit sets") {
  Grid g = Grid::line(-1.0, 1.0, 201);
  ScalarField a = signed_box(g, Box{1, {-0.1, 0.0}, {0.1, 0.0}});
  ScalarField b = signed_box(g, Box{1, {0.5, 0.0}, {0.7, 0.0}});

  ScalarField u = pointwise_min(a, b);
  CHECK(interpolate(u, std::vector<double>{0.6}) < 0.0);   // inside second box
  CHECK(interpolate(u, std::vector<double>{0.3}) > 0.0);   // outside both
  CHECK(interpolate(u, std::vector<double>{0.0}) < 0.0);

  // Idempotence and monotonicity.
  ScalarField same = pointwise_min(a, a);
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    CHECK(same.values[k] == a.values[k]);
    CHECK(u.values[k] <= a.values[k]);
    CHECK(u.values[k] <= b.values[k]);
  }

  Grid other = Grid::line(-1.0, 1.0, 101);
  ScalarField c = signed_box(other, Box{1, {-0.1, 0.0}, {0.1, 0.0}});
  CHECK_THROWS(static_cast<void>(pointwise_min(a, c)));
}

TEST_CASE("interpolate: exact at nodes, linear between, periodic identification") {
  Grid g = Grid::line(-1.0, 1.0, 201);
  ScalarField f = make_field(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (double& v : f.values) v = unif(rng);

  for (int k : {0, 50, 123, 200}) {
    CHECK(interpolate(f, std::vector<double>{g.coord(0, k)}) == doctest::Approx(f.values[static_cast<std::size_t>(k)]));
  }

  f.values[100] = 0.0;  // node 0.0
  f.values[101] = 1.0;  // node 0.01
  CHECK(interpolate(f, std::vector<double>{0.005}) == doctest::Approx(0.5));

  Grid gt = Grid::line(-std::numbers::pi, std::numbers::pi, 64, true);
  ScalarField ft = make_field(gt);
  for (int k = 0; k < 64; ++k) ft.values[static_cast<std::size_t>(k)] = std::sin(gt.coord(0, k));
  const double at_neg = interpolate(ft, std::vector<double>{-std::numbers::pi});
  const double at_pos = interpolate(ft, std::vector<double>{std::numbers::pi});
  CHECK(at_neg == doctest::Approx(at_pos));

  CHECK_THROWS(static_cast<void>(interpolate(f, std::vector<double>{std::nan("")})));
}

TEST_CASE("interpolate stays within surrounding nodal bounds") {
  Grid g = Grid::plane(-1.0, 1.0, 21, -1.0, 1.0, 21, false, true);
  ScalarField f = make_field(g);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (double& v : f.values) v = unif(rng);

  double vmin = 1e300, vmax = -1e300;
  for (double v : f.values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  std::uniform_real_distribution<double> q0(-1.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const double v = interpolate(f, std::vector<double>{q0(rng), q0(rng)});
    CHECK(v >= vmin - 1e-12);
    CHECK(v <= vmax + 1e-12);
  }
}

TEST_CASE("sublevel_bounding_box recovers box support plus one cell") {
  Grid g = Grid::line(-1.0, 1.0, 201);
  ScalarField f = signed_box(g, Box{1, {-0.1, 0.0}, {0.1, 0.0}});
  auto box = sublevel_bounding_box(f, 0.0);
  REQUIRE(box.has_value());
  // Box recovers its own support plus a one-cell margin (node rounding may
  // drop an exact-boundary node on either side).
  CHECK(box->lo[0] <= -0.1);
  CHECK(box->hi[0] >= 0.1);
  CHECK(box->lo[0] >= -0.1 - 2.0 * g.dx(0));
  CHECK(box->hi[0] <= 0.1 + 2.0 * g.dx(0));

  ScalarField pos = make_field(g, 1.0);
  CHECK(!sublevel_bounding_box(pos, 0.0).has_value());
}

TEST_CASE("sublevel_bounding_box: single negative node in 2-D") {
  Grid g = Grid::plane(0.0, 1.0, 11, 0.0, 1.0, 11);
  ScalarField f = make_field(g, 1.0);
  f.at({5, 7}) = -1.0;
  auto box = sublevel_bounding_box(f, 0.0);
  REQUIRE(box.has_value());
  CHECK(box->lo[0] == doctest::Approx(g.coord(0, 4)));
  CHECK(box->hi[0] == doctest::Approx(g.coord(0, 6)));
  CHECK(box->lo[1] == doctest::Approx(g.coord(1, 6)));
  CHECK(box->hi[1] == doctest::Approx(g.coord(1, 8)));
}

TEST_CASE("sublevel_bounding_box: wrapped set on periodic axis") {
  Grid g = Grid::line(-std::numbers::pi, std::numbers::pi, 120, true);
  // Negative only near the seam.
  ScalarField f = signed_box(g, Box{1, {3.0, 0.0}, {-3.0, 0.0}});
  auto box = sublevel_bounding_box(f, 0.0);
  REQUIRE(box.has_value());
  CHECK(box->lo[0] > box->hi[0]);  // wrapping interval
  // The wrapped box must cover the seam and not the far side.
  CHECK(point_in_box(g, *box, {std::numbers::pi, 0.0}));
  CHECK(!point_in_box(g, *box, {0.0, 0.0}));

  ScalarField all = make_field(g, -1.0);
  auto full = sublevel_bounding_box(all, 0.0);
  REQUIRE(full.has_value());
  CHECK(full->lo[0] == doctest::Approx(g.lo[0]));
  CHECK(full->hi[0] == doctest::Approx(g.hi[0]));
}

TEST_CASE("intersect_boxes: plain and wrap-aware") {
  Grid g = Grid::plane(-5.0, 5.0, 11, -std::numbers::pi, std::numbers::pi, 12, false, true);

  Box a{2, {-1.0, 2.5}, {1.0, -2.5}};  // theta wraps
  Box b{2, {0.0, 2.8}, {3.0, 3.1}};    // theta plain arc near pi
  auto isect = intersect_boxes(g, a, b);
  REQUIRE(isect.has_value());
  CHECK(isect->lo[0] == doctest::Approx(0.0));
  CHECK(isect->hi[0] == doctest::Approx(1.0));
  CHECK(isect->lo[1] == doctest::Approx(2.8));
  CHECK(isect->hi[1] == doctest::Approx(3.1));

  Box c{2, {2.0, 0.0}, {4.0, 1.0}};
  CHECK(!intersect_boxes(g, a, c).has_value());  // x ranges disjoint
}

TEST_CASE("field serialization round-trips bit-exactly") {
  Grid g = Grid::plane(-5.0, 5.0, 17, -std::numbers::pi, std::numbers::pi, 9, false, true);
  ScalarField f = make_field(g);
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unif(-100.0, 100.0);
  for (double& v : f.values) v = unif(rng);
  f.time = -0.15;

  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_field(buf, f);
  ScalarField g2 = read_field(buf);

  CHECK(g2.grid.same_as(f.grid));
  CHECK(g2.time == f.time);
  REQUIRE(g2.values.size() == f.values.size());
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(g2.values[k] == f.values[k]);
}

TEST_CASE("contour csv has one row per node") {
  Grid g = Grid::plane(0.0, 1.0, 4, 0.0, 1.0, 3);
  ScalarField f = make_field(g, 0.5);
  std::ostringstream out;
  write_contour_csv(out, f);
  const std::string text = out.str();
  int rows = 0;
  for (char ch : text) {
    if (ch == '\n') ++rows;
  }
  CHECK(rows == 1 + 12);
}
