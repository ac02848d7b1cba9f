#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace barc {

// Fields live on 1-D or 2-D rectangular grids; nothing in the curriculum
// machinery needs more than two axes per component.
inline constexpr int kMaxGridDim = 2;

using Vec2 = std::array<double, kMaxGridDim>;
using Idx2 = std::array<int, kMaxGridDim>;

// Wrap an angle into [-pi, pi).
double wrap_angle(double a);

/// Rectangular computational grid. A periodic axis identifies lo with hi
/// (node k sits at lo + k*dx, k = 0..n-1, and hi is the same point as lo).
struct Grid {
  int dim = 1;
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};
  Idx2 n{2, 1};
  std::array<bool, kMaxGridDim> periodic{false, false};

  static Grid line(double lo, double hi, int n, bool periodic = false);
  static Grid plane(double lo0, double hi0, int n0, double lo1, double hi1, int n1,
                    bool periodic0 = false, bool periodic1 = false);

  double length(int axis) const { return hi[axis] - lo[axis]; }
  double dx(int axis) const;
  double coord(int axis, int k) const { return lo[axis] + k * dx(axis); }
  std::int64_t node_count() const;
  std::int64_t index(const Idx2& idx) const;  // row-major, axis 0 slowest
  Idx2 unindex(std::int64_t flat) const;
  Vec2 node_coords(const Idx2& idx) const;

  // Periodic axes wrap into [lo, lo+length); others return x unchanged.
  double wrap_coord(int axis, double x) const;
  bool contains_coord(int axis, double x) const;

  bool same_as(const Grid& other) const;
  void validate() const;  // throws on malformed bounds/counts
};

/// Axis-aligned box in the axes of one grid. On a periodic axis lo > hi
/// encodes a wrap-around interval.
struct Box {
  int dim = 1;
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};
};

/// A value function sampled at grid nodes. `time` is the -t at which this
/// field equals V(-t, .); freshly built implicit surfaces carry time 0.
struct ScalarField {
  Grid grid;
  std::vector<double> values;
  double time = 0.0;

  double at(const Idx2& idx) const { return values[grid.index(idx)]; }
  double& at(const Idx2& idx) { return values[grid.index(idx)]; }
};

ScalarField make_field(const Grid& grid, double fill = 0.0);

/// Implicit surface of `box` on `grid`: negative strictly inside, positive
/// strictly outside, zero on the boundary (max over axes of per-axis signed
/// interval distances, periodic-aware).
/// Throws "empty target on grid" when the box misses the domain entirely.
ScalarField signed_box(const Grid& grid, const Box& box);

// Signed distance of x to the interval [blo, bhi] along one grid axis.
double signed_interval_distance(const Grid& grid, int axis, double blo, double bhi, double x);

/// Pointwise min (union of implicit sets). Grids must match.
ScalarField pointwise_min(const ScalarField& a, const ScalarField& b);

/// Multilinear interpolation; exact at nodes. Out-of-domain queries on
/// non-periodic axes clamp to the edge with a rate-limited warning.
/// Throws on non-finite input.
double interpolate(const ScalarField& f, std::span<const double> x);

/// Node-resolution bounding box of {f <= level}, expanded by one cell per
/// side; std::nullopt when the sublevel set is empty. On periodic axes the
/// box hugs the complement of the largest empty gap and may wrap or cover
/// the full axis.
std::optional<Box> sublevel_bounding_box(const ScalarField& f, double level);

std::int64_t count_sublevel_nodes(const ScalarField& f, double level);

/// Intersection of two boxes on `grid`, wrap-aware on periodic axes.
/// Returns nullopt when empty on some axis. If a periodic-axis intersection
/// splits into two arcs, the full axis is returned (sound superset; callers
/// use it only as a sampling envelope).
std::optional<Box> intersect_boxes(const Grid& grid, const Box& a, const Box& b);

// --- serialization ----------------------------------------------------------

/// One human-readable header line (dim, n, lo, hi, periodic, time) followed
/// by the node values as little-endian 64-bit reals in row-major order.
void write_field(std::ostream& out, const ScalarField& f);
ScalarField read_field(std::istream& in);
void write_field_file(const std::string& path, const ScalarField& f);
ScalarField read_field_file(const std::string& path);

/// Per-node CSV dump for plotting: "x,V" (1-D) or "x,y,V" (2-D).
void write_contour_csv(std::ostream& out, const ScalarField& f);

}  // namespace barc
