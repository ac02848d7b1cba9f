#include "barc/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "barc/log.hpp"

namespace barc {

namespace {
RateLimitedLog g_interp_clamp_log("grid");

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}
}  // namespace

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w < 0) w += two_pi;
  return w - std::numbers::pi;
}

Grid Grid::line(double lo, double hi, int n, bool periodic) {
  Grid g;
  g.dim = 1;
  g.lo = {lo, 0.0};
  g.hi = {hi, 1.0};
  g.n = {n, 1};
  g.periodic = {periodic, false};
  g.validate();
  return g;
}

Grid Grid::plane(double lo0, double hi0, int n0, double lo1, double hi1, int n1,
                 bool periodic0, bool periodic1) {
  Grid g;
  g.dim = 2;
  g.lo = {lo0, lo1};
  g.hi = {hi0, hi1};
  g.n = {n0, n1};
  g.periodic = {periodic0, periodic1};
  g.validate();
  return g;
}

void Grid::validate() const {
  require(dim == 1 || dim == 2, "grid dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    require(lo[a] < hi[a], "grid lo must be < hi on axis " + std::to_string(a));
    require(n[a] >= 3, "grid needs >= 3 nodes on axis " + std::to_string(a));
  }
}

double Grid::dx(int axis) const {
  // Periodic axes identify lo with hi, so the last node sits one cell short.
  return periodic[axis] ? length(axis) / n[axis] : length(axis) / (n[axis] - 1);
}

std::int64_t Grid::node_count() const {
  std::int64_t c = 1;
  for (int a = 0; a < dim; ++a) c *= n[a];
  return c;
}

std::int64_t Grid::index(const Idx2& idx) const {
  if (dim == 1) return idx[0];
  return static_cast<std::int64_t>(idx[0]) * n[1] + idx[1];
}

Idx2 Grid::unindex(std::int64_t flat) const {
  if (dim == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / n[1]), static_cast<int>(flat % n[1])};
}

Vec2 Grid::node_coords(const Idx2& idx) const {
  Vec2 x{0.0, 0.0};
  for (int a = 0; a < dim; ++a) x[a] = coord(a, idx[a]);
  return x;
}

double Grid::wrap_coord(int axis, double x) const {
  if (!periodic[axis]) return x;
  const double len = length(axis);
  double w = std::fmod(x - lo[axis], len);
  if (w < 0) w += len;
  return lo[axis] + w;
}

bool Grid::contains_coord(int axis, double x) const {
  if (periodic[axis]) return true;
  return x >= lo[axis] && x <= hi[axis];
}

bool Grid::same_as(const Grid& other) const {
  if (dim != other.dim) return false;
  for (int a = 0; a < dim; ++a) {
    if (lo[a] != other.lo[a] || hi[a] != other.hi[a] || n[a] != other.n[a] ||
        periodic[a] != other.periodic[a]) {
      return false;
    }
  }
  return true;
}

ScalarField make_field(const Grid& grid, double fill) {
  grid.validate();
  ScalarField f;
  f.grid = grid;
  f.values.assign(static_cast<std::size_t>(grid.node_count()), fill);
  f.time = 0.0;
  return f;
}

double signed_interval_distance(const Grid& grid, int axis, double blo, double bhi, double x) {
  if (!grid.periodic[axis]) {
    return std::max(blo - x, x - bhi);
  }
  // Circular interval: measure against midpoint, wrap the difference into
  // [-L/2, L/2). lo > hi encodes an interval passing through the seam.
  const double len = grid.length(axis);
  double arc = bhi - blo;
  if (arc < 0) arc += len;
  if (arc >= len) return -len;  // whole axis: inside everywhere
  double center = blo + 0.5 * arc;
  double d = std::fmod(x - center, len);
  if (d < -0.5 * len) d += len;
  if (d >= 0.5 * len) d -= len;
  return std::abs(d) - 0.5 * arc;
}

ScalarField signed_box(const Grid& grid, const Box& box) {
  grid.validate();
  require(box.dim == grid.dim, "signed_box: box/grid dim mismatch");
  for (int a = 0; a < grid.dim; ++a) {
    if (grid.periodic[a]) continue;
    require(box.lo[a] <= box.hi[a], "signed_box: inverted interval on non-periodic axis");
    if (box.hi[a] < grid.lo[a] || box.lo[a] > grid.hi[a]) {
      throw std::runtime_error("empty target on grid");
    }
  }

  ScalarField f = make_field(grid);
  const std::int64_t total = grid.node_count();
  for (std::int64_t k = 0; k < total; ++k) {
    const Idx2 idx = grid.unindex(k);
    double v = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid.dim; ++a) {
      v = std::max(v, signed_interval_distance(grid, a, box.lo[a], box.hi[a], grid.coord(a, idx[a])));
    }
    f.values[static_cast<std::size_t>(k)] = v;
  }
  return f;
}

ScalarField pointwise_min(const ScalarField& a, const ScalarField& b) {
  require(a.grid.same_as(b.grid), "pointwise_min: grid mismatch");
  ScalarField out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = std::min(a.values[k], b.values[k]);
  }
  return out;
}

double interpolate(const ScalarField& f, std::span<const double> x) {
  const Grid& g = f.grid;
  require(static_cast<int>(x.size()) == g.dim, "interpolate: query dim mismatch");

  int i0[kMaxGridDim] = {0, 0};
  int i1[kMaxGridDim] = {0, 0};
  double frac[kMaxGridDim] = {0.0, 0.0};
  for (int a = 0; a < g.dim; ++a) {
    double xa = x[a];
    if (!std::isfinite(xa)) throw std::runtime_error("interpolate: non-finite query");
    if (g.periodic[a]) {
      xa = g.wrap_coord(a, xa);
      double u = (xa - g.lo[a]) / g.dx(a);
      int i = static_cast<int>(std::floor(u));
      i = std::clamp(i, 0, g.n[a] - 1);
      i0[a] = i;
      i1[a] = (i + 1) % g.n[a];
      frac[a] = std::clamp(u - i, 0.0, 1.0);
    } else {
      if (xa < g.lo[a] || xa > g.hi[a]) {
        g_interp_clamp_log.warn("interpolate: query outside domain on axis " + std::to_string(a) +
                                " (" + std::to_string(xa) + "), clamping");
        xa = std::clamp(xa, g.lo[a], g.hi[a]);
      }
      double u = (xa - g.lo[a]) / g.dx(a);
      int i = static_cast<int>(std::floor(u));
      i = std::clamp(i, 0, g.n[a] - 2);
      i0[a] = i;
      i1[a] = i + 1;
      frac[a] = std::clamp(u - i, 0.0, 1.0);
    }
  }

  if (g.dim == 1) {
    const double v0 = f.values[static_cast<std::size_t>(i0[0])];
    const double v1 = f.values[static_cast<std::size_t>(i1[0])];
    return v0 + frac[0] * (v1 - v0);
  }
  const auto val = [&](int i, int j) { return f.values[static_cast<std::size_t>(g.index({i, j}))]; };
  const double v00 = val(i0[0], i0[1]);
  const double v01 = val(i0[0], i1[1]);
  const double v10 = val(i1[0], i0[1]);
  const double v11 = val(i1[0], i1[1]);
  const double a0 = v00 + frac[1] * (v01 - v00);
  const double a1 = v10 + frac[1] * (v11 - v10);
  return a0 + frac[0] * (a1 - a0);
}

namespace {

// Per-axis occupancy of the sublevel set: marked[j] iff some node with
// axis-index j satisfies f <= level.
std::vector<char> axis_occupancy(const ScalarField& f, int axis, double level) {
  const Grid& g = f.grid;
  std::vector<char> marked(static_cast<std::size_t>(g.n[axis]), 0);
  const std::int64_t total = g.node_count();
  for (std::int64_t k = 0; k < total; ++k) {
    if (f.values[static_cast<std::size_t>(k)] <= level) {
      marked[static_cast<std::size_t>(g.unindex(k)[axis])] = 1;
    }
  }
  return marked;
}

}  // namespace

std::optional<Box> sublevel_bounding_box(const ScalarField& f, double level) {
  const Grid& g = f.grid;
  bool any = false;
  for (double v : f.values) {
    if (v <= level) {
      any = true;
      break;
    }
  }
  if (!any) return std::nullopt;

  Box box;
  box.dim = g.dim;
  for (int a = 0; a < g.dim; ++a) {
    const std::vector<char> marked = axis_occupancy(f, a, level);
    const int n = g.n[a];
    if (!g.periodic[a]) {
      int jmin = 0;
      while (!marked[static_cast<std::size_t>(jmin)]) ++jmin;
      int jmax = n - 1;
      while (!marked[static_cast<std::size_t>(jmax)]) --jmax;
      box.lo[a] = g.coord(a, std::max(jmin - 1, 0));
      box.hi[a] = g.coord(a, std::min(jmax + 1, n - 1));
      continue;
    }
    // Periodic: the marked arc is the complement of the largest circular run
    // of unmarked indices; expanding by one cell eats into that run.
    int best_len = 0, best_start = 0;
    for (int s = 0; s < n; ++s) {
      // Only measure runs from their circular start (previous index marked).
      if (marked[static_cast<std::size_t>(s)] || !marked[static_cast<std::size_t>((s + n - 1) % n)]) {
        continue;
      }
      int len = 0;
      while (len < n && !marked[static_cast<std::size_t>((s + len) % n)]) ++len;
      if (len > best_len) {
        best_len = len;
        best_start = s;
      }
    }
    if (best_len == 0) {
      // All marked, or no run boundary found: full axis.
      box.lo[a] = g.lo[a];
      box.hi[a] = g.hi[a];
      continue;
    }
    if (best_len <= 2) {
      // One-cell expansion on each side swallows the gap entirely.
      box.lo[a] = g.lo[a];
      box.hi[a] = g.hi[a];
      continue;
    }
    const int gap_end = (best_start + best_len - 1) % n;
    box.lo[a] = g.coord(a, gap_end);          // first marked index minus one
    box.hi[a] = g.coord(a, best_start % n);   // last marked index plus one
  }
  return box;
}

std::int64_t count_sublevel_nodes(const ScalarField& f, double level) {
  std::int64_t c = 0;
  for (double v : f.values) {
    if (v <= level) ++c;
  }
  return c;
}

namespace {

// Circular-arc intersection helper: arcs as (start, len) with len in (0, L].
struct Arc {
  double start;
  double len;
};

Arc arc_from_interval(double lo, double hi, double domain_lo, double L) {
  double len = hi - lo;
  if (len < 0) len += L;
  double start = std::fmod(lo - domain_lo, L);
  if (start < 0) start += L;
  return Arc{start, std::min(len, L)};
}

}  // namespace

std::optional<Box> intersect_boxes(const Grid& grid, const Box& a, const Box& b) {
  Box out;
  out.dim = grid.dim;
  for (int ax = 0; ax < grid.dim; ++ax) {
    if (!grid.periodic[ax]) {
      const double lo = std::max(a.lo[ax], b.lo[ax]);
      const double hi = std::min(a.hi[ax], b.hi[ax]);
      if (lo > hi) return std::nullopt;
      out.lo[ax] = lo;
      out.hi[ax] = hi;
      continue;
    }
    const double L = grid.length(ax);
    const Arc arc_a = arc_from_interval(a.lo[ax], a.hi[ax], grid.lo[ax], L);
    const Arc arc_b = arc_from_interval(b.lo[ax], b.hi[ax], grid.lo[ax], L);
    if (arc_a.len >= L || arc_b.len >= L) {
      const Arc& keep = arc_a.len >= L ? arc_b : arc_a;
      out.lo[ax] = grid.lo[ax] + keep.start;
      out.hi[ax] = grid.wrap_coord(ax, grid.lo[ax] + keep.start + keep.len);
      if (keep.len >= L) {
        out.lo[ax] = grid.lo[ax];
        out.hi[ax] = grid.hi[ax];
      }
      continue;
    }
    // Overlap of [sa, sa+la) and [sb, sb+lb) on the circle; try both
    // unwrapped placements of b relative to a.
    std::optional<Arc> pick;
    int pieces = 0;
    for (double shift : {-L, 0.0, L}) {
      const double s = std::max(arc_a.start, arc_b.start + shift);
      const double e = std::min(arc_a.start + arc_a.len, arc_b.start + shift + arc_b.len);
      if (e > s) {
        ++pieces;
        if (!pick || e - s > pick->len) pick = Arc{s, e - s};
      }
    }
    if (pieces == 0) return std::nullopt;
    if (pieces > 1) {
      // Two disjoint arcs: fall back to the full axis as a sampling envelope.
      out.lo[ax] = grid.lo[ax];
      out.hi[ax] = grid.hi[ax];
      continue;
    }
    double s = std::fmod(pick->start, L);
    if (s < 0) s += L;
    out.lo[ax] = grid.lo[ax] + s;
    out.hi[ax] = grid.wrap_coord(ax, grid.lo[ax] + s + pick->len);
  }
  return out;
}

// --- serialization -----------------------------------------------------------

namespace {

void append_reals(std::ostringstream& os, const double* v, int count) {
  char buf[64];
  for (int i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    os << (i ? "," : "") << buf;
  }
}

static_assert(std::endian::native == std::endian::little,
              "field block serialization assumes a little-endian host");

}  // namespace

void write_field(std::ostream& out, const ScalarField& f) {
  const Grid& g = f.grid;
  std::ostringstream head;
  head << "barc-field v1 dim=" << g.dim << " n=";
  for (int a = 0; a < g.dim; ++a) head << (a ? "," : "") << g.n[a];
  head << " lo=";
  append_reals(head, g.lo.data(), g.dim);
  head << " hi=";
  append_reals(head, g.hi.data(), g.dim);
  head << " periodic=";
  for (int a = 0; a < g.dim; ++a) head << (a ? "," : "") << (g.periodic[a] ? 1 : 0);
  char tbuf[64];
  std::snprintf(tbuf, sizeof tbuf, "%.17g", f.time);
  head << " time=" << tbuf << "\n";
  const std::string h = head.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_field: stream failure");
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return parts;
}

std::string header_value(const std::vector<std::string>& tokens, const std::string& key) {
  for (const std::string& t : tokens) {
    if (t.rfind(key + "=", 0) == 0) return t.substr(key.size() + 1);
  }
  throw std::runtime_error("read_field: missing header key '" + key + "'");
}

}  // namespace

ScalarField read_field(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("read_field: missing header");
  const auto tokens = split(header, ' ');
  if (tokens.size() < 2 || tokens[0] != "barc-field" || tokens[1] != "v1") {
    throw std::runtime_error("read_field: bad magic '" + header + "'");
  }
  Grid g;
  g.dim = std::stoi(header_value(tokens, "dim"));
  const auto ns = split(header_value(tokens, "n"), ',');
  const auto los = split(header_value(tokens, "lo"), ',');
  const auto his = split(header_value(tokens, "hi"), ',');
  const auto pers = split(header_value(tokens, "periodic"), ',');
  if (static_cast<int>(ns.size()) != g.dim || static_cast<int>(los.size()) != g.dim ||
      static_cast<int>(his.size()) != g.dim || static_cast<int>(pers.size()) != g.dim) {
    throw std::runtime_error("read_field: header arity mismatch");
  }
  for (int a = 0; a < g.dim; ++a) {
    g.n[a] = std::stoi(ns[static_cast<std::size_t>(a)]);
    g.lo[a] = std::stod(los[static_cast<std::size_t>(a)]);
    g.hi[a] = std::stod(his[static_cast<std::size_t>(a)]);
    g.periodic[a] = pers[static_cast<std::size_t>(a)] == "1";
  }
  g.validate();
  ScalarField f = make_field(g);
  f.time = std::stod(header_value(tokens, "time"));
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double))) {
    throw std::runtime_error("read_field: truncated value block");
  }
  return f;
}

void write_field_file(const std::string& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field_file: cannot open " + path);
  write_field(out, f);
}

ScalarField read_field_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_field_file: cannot open " + path);
  return read_field(in);
}

void write_contour_csv(std::ostream& out, const ScalarField& f) {
  const Grid& g = f.grid;
  out << (g.dim == 1 ? "x,V\n" : "x,y,V\n");
  char buf[96];
  const std::int64_t total = g.node_count();
  for (std::int64_t k = 0; k < total; ++k) {
    const Idx2 idx = g.unindex(k);
    if (g.dim == 1) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", g.coord(0, idx[0]),
                    f.values[static_cast<std::size_t>(k)]);
    } else {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", g.coord(0, idx[0]),
                    g.coord(1, idx[1]), f.values[static_cast<std::size_t>(k)]);
    }
    out << buf;
  }
}

}  // namespace barc
