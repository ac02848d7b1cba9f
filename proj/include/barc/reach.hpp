#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "barc/grid.hpp"
#include "barc/hj.hpp"

namespace barc {

/// A low-dimensional fragment of the curriculum dynamics: its grid, its
/// analytic Hamiltonian, and which curriculum-state axes it covers.
/// Fictitious controls (states of sibling subsystems treated as bounded
/// inputs here) carry named static bounds.
struct Subsystem {
  std::string name;
  std::vector<int> axes;  // indices into the curriculum state, length 1 or 2
  Grid grid;
  HamiltonianSpec hamiltonian;
  std::map<std::string, std::pair<double, double>> fictitious_bounds;
};

/// Maps simulator states into curriculum coordinates and back. `pullback`
/// fills simulator-only coordinates from a template state; for tasks whose
/// curriculum state equals the simulator state it is the identity.
struct StateMap {
  int sim_dim = 0;
  int cur_dim = 0;
  std::function<std::vector<double>(std::span<const double>)> forward;
  std::function<std::vector<double>(std::span<const double> cur, std::span<const double> templ)>
      pullback;

  static StateMap identity(int dim);
};

struct CurriculumModel {
  std::vector<Subsystem> subsystems;
  StateMap map;
};

/// Per-subsystem value fields at time -T plus their zero-sublevel bounding
/// boxes; membership in the decomposed BRS approximation is the
/// intersection of the back-projected component sublevel sets.
struct DecomposedBRS {
  std::vector<Subsystem> subsystems;
  StateMap map;
  std::vector<ScalarField> fields;
  std::vector<Box> boxes;
  double horizon = 0.0;
};

struct ExpandOptions {
  double target_halfwidth_cells = 2.0;  // half-width of the box around each start, in cells
  double cfl = 0.8;
  double dt_override = 0.0;
  bool parallel = true;
};

/// ExpandBackwards: per subsystem, build the union-of-signed-boxes target
/// from the projected starts and solve one BRS over horizon T.
/// Throws when a start projects outside a subsystem grid, naming both.
DecomposedBRS expand_backwards(const std::vector<std::vector<double>>& starts,
                               const CurriculumModel& model, double T,
                               const ExpandOptions& opts = {});

/// True iff every component field interpolates nonpositive at the
/// back-projection of phi(state). Out-of-domain projections are logged and
/// reported as non-members.
bool contains(const DecomposedBRS& brs, std::span<const double> sim_state);

/// Membership in curriculum coordinates (used by the sampler and tests).
bool contains_curriculum(const DecomposedBRS& brs, std::span<const double> cur_state);

using ValidityPredicate = std::function<bool(std::span<const double>)>;

struct SampleOptions {
  std::int64_t candidate_budget = 1'000'000;
  double min_acceptance = 1e-4;
};

/// Rejection-sample exactly `count` simulator states from the decomposed
/// BRS: uniform draws in the combined per-axis bounding intervals
/// (intersected where two components share an axis), kept iff the BRS
/// contains them and `validity` accepts the pulled-back simulator state.
/// Throws "BRS sampling starved" when the acceptance rate stays below
/// opts.min_acceptance over opts.candidate_budget candidates.
std::vector<std::vector<double>> sample_starts(const DecomposedBRS& brs, int count,
                                               std::uint64_t rng_seed,
                                               const ValidityPredicate& validity,
                                               std::span<const double> template_state,
                                               const SampleOptions& opts = {});

/// Write each component field plus a human-readable manifest
/// (names, axes, horizon, boxes) into `dir` with the given file prefix.
void dump_brs(const DecomposedBRS& brs, const std::string& dir, const std::string& prefix);

}  // namespace barc
