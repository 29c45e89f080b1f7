#pragma once

#include "convisc/config.hpp"
#include "convisc/forward.hpp"
#include "convisc/optimizer.hpp"
#include "convisc/reconstruction.hpp"
#include "convisc/transform.hpp"
#include "convisc/verification.hpp"

#include <optional>
#include <vector>

namespace convisc {

ConductivityProfile make_profile(const ProfileSpec& spec, const Grid1D& grid);

/// Synthetic data and the exact chain for one (epsilon, delta) setting.
struct SyntheticProblem {
  Grid1D grid;
  KGrid k_grid;
  ConductivityProfile truth;
  std::vector<ForwardSlice> slices;
  DataG clean;
  DataG measured;
  ChainFamily chain;
};

SyntheticProblem make_problem(const ExperimentConfig& cfg, double epsilon, double delta);

struct InversionSetup {
  FunctionalParams functional;  ///< k is set per frequency
  double gamma = 0.0;           ///< 0 probes a step per frequency
  int max_iters = 100000;
  double grad_tol = 1e-9;
  int snapshot_stride = 0;
  BoundaryMode mode = BoundaryMode::forward_consistent;
  int threads = 1;
};

/// Boundary set for frequency index i. Forward-consistent mode needs the
/// exact chain; `clean` (noise-free data) turns on the noise shift.
BoundarySet boundary_for(const DataG& measured, int k_index, double epsilon, BoundaryMode mode,
                         const ChainFamily* chain, const DataG* clean);

/// Per-k projected descent from the boundary lift, then sigma assembly.
InversionResult invert(const DataG& measured, const Grid1D& grid, const InversionSetup& setup,
                       const ChainFamily* chain = nullptr, const DataG* clean = nullptr);

struct InversionRun {
  SyntheticProblem problem;
  InversionResult result;
  ErrorReport errors;
};

InversionSetup setup_from(const ExperimentConfig& cfg, double epsilon, double lambda);
InversionRun run_inversion(const ExperimentConfig& cfg, double epsilon, double lambda, double delta);

/// Gradient check, convexity study and Carleman study on the configured
/// profile at one frequency.
VerifyReport run_verify(const ExperimentConfig& cfg);

}  // namespace convisc
