#pragma once

// Brute-force oracles used by the unit and acceptance suites. These are
// deliberately independent of the PDE/GAE implementation paths they check.

#include <cmath>
#include <vector>

#include "barc/grid.hpp"

namespace barc::oracle {

// Forward-shooting membership for the double integrator (xdot = v,
// vdot = u, |u| <= 1): a grid node belongs to the reach-within-horizon set
// iff some bang-bang control (one switch, enumerated over discretized switch
// times) drives the state into `target` at one of the step boundaries.
// Piecewise-constant acceleration integrates in closed form, so the only
// discretization is the switch/checkpoint grid.
inline std::vector<char> double_integrator_reach(const Grid& grid, const Box& target, double horizon,
                                                 int n_steps) {
  const auto in_target = [&](double x, double v) {
    return x >= target.lo[0] && x <= target.hi[0] && v >= target.lo[1] && v <= target.hi[1];
  };
  const double h = horizon / n_steps;
  std::vector<char> member(static_cast<std::size_t>(grid.node_count()), 0);
  for (std::int64_t k = 0; k < grid.node_count(); ++k) {
    const Idx2 idx = grid.unindex(k);
    const double x0 = grid.coord(0, idx[0]);
    const double v0 = grid.coord(1, idx[1]);
    if (in_target(x0, v0)) {
      member[static_cast<std::size_t>(k)] = 1;
      continue;
    }
    bool reached = false;
    for (int sign = -1; sign <= 1 && !reached; sign += 2) {
      for (int sw = 0; sw <= n_steps && !reached; ++sw) {
        double x = x0, v = v0;
        for (int step = 0; step < n_steps; ++step) {
          const double u = step < sw ? sign : -sign;
          x += v * h + 0.5 * u * h * h;
          v += u * h;
          if (in_target(x, v)) {
            reached = true;
            break;
          }
        }
      }
    }
    member[static_cast<std::size_t>(k)] = reached ? 1 : 0;
  }
  return member;
}

// Node-classification intersection-over-union of two membership masks.
inline double mask_iou(const std::vector<char>& a, const std::vector<char>& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] && b[k]) ++inter;
    if (a[k] || b[k]) ++uni;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Chebyshev distance (in cells) from each node to the classification
// boundary of `mask` on `grid`, capped at `max_dist`.
inline std::vector<int> cells_to_boundary(const Grid& grid, const std::vector<char>& mask, int max_dist) {
  const int n0 = grid.n[0];
  const int n1 = grid.dim == 2 ? grid.n[1] : 1;
  std::vector<int> dist(mask.size(), max_dist);
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n1 + j;
      for (int di = -max_dist; di <= max_dist; ++di) {
        for (int dj = -max_dist; dj <= max_dist; ++dj) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || ii >= n0 || jj < 0 || jj >= n1) continue;
          const std::size_t kk = static_cast<std::size_t>(ii) * n1 + jj;
          if (mask[kk] != mask[k]) {
            dist[k] = std::min(dist[k], std::max(std::abs(di), std::abs(dj)));
          }
        }
      }
    }
  }
  return dist;
}

}  // namespace barc::oracle
