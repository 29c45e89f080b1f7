#include "convisc/experiment.hpp"

#include "convisc/errors.hpp"
#include "convisc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace convisc {

namespace {

ConductivityProfile profile_from_file(const std::string& path, const Grid1D& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile_file '" + path + "'");
  std::vector<double> z;
  std::vector<double> s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream row(line);
    double a = 0.0;
    double b = 0.0;
    if (!(row >> a)) continue;
    if (!(row >> b)) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected two columns (z sigma)");
    }
    z.push_back(a);
    s.push_back(b);
  }
  return tabulated_profile(grid, z, s);
}

}  // namespace

ConductivityProfile make_profile(const ProfileSpec& spec, const Grid1D& grid) {
  const double zmax = grid.z_max();
  if (spec.name == "flat") return flat_profile(grid);
  if (spec.name == "bump") {
    return bump_profile(grid, spec.bump_amplitude, spec.bump_center * zmax, spec.bump_width * zmax);
  }
  if (spec.name == "two-layer-smooth") {
    return two_layer_profile(grid, spec.layer_depth * zmax, spec.layer_contrast,
                             spec.layer_smoothness * zmax);
  }
  if (spec.name == "file") return profile_from_file(spec.file, grid);
  throw ConfigError("unknown profile '" + spec.name + "'");
}

SyntheticProblem make_problem(const ExperimentConfig& cfg, double epsilon, double delta) {
  const Grid1D grid = make_grid(cfg.z_max, cfg.n_nodes);
  const KGrid kg(cfg.k_min, cfg.k_max, cfg.n_k);
  ConductivityProfile truth = make_profile(cfg.profile, grid);
  std::vector<ForwardSlice> slices = solve_forward_family(truth, kg, cfg.threads);
  DataG clean = data_from_slices(slices, kg);
  DataG measured = add_noise(clean, delta, cfg.seed);
  ChainFamily chain = build_chain(slices, kg, epsilon);
  return {grid, kg, std::move(truth), std::move(slices), std::move(clean), std::move(measured),
          std::move(chain)};
}

BoundarySet boundary_for(const DataG& measured, int k_index, double epsilon, BoundaryMode mode,
                         const ChainFamily* chain, const DataG* clean) {
  if (mode == BoundaryMode::paper_literal) {
    return boundary_from_data(measured, measured.k_grid.value(k_index), epsilon);
  }
  if (chain == nullptr) {
    throw ConfigError("forward-consistent boundary mode needs the exact chain (synthetic runs only)");
  }
  return boundary_from_chain(*chain, k_index, clean ? &measured : nullptr, clean);
}

InversionResult invert(const DataG& measured, const Grid1D& grid, const InversionSetup& setup,
                       const ChainFamily* chain, const DataG* clean) {
  measured.validate();
  setup.functional.validate();
  const KGrid& kg = measured.k_grid;
  const int nk = kg.size();
  const double eps = setup.functional.epsilon;

  std::vector<std::optional<FieldPair>> minimizers(nk);
  std::vector<DescentHistory> histories(nk);
  std::vector<BoundarySet> boundaries(nk);

  parallel_for(nk, setup.threads, [&](int i) {
    const double k = kg.value(i);
    const BoundarySet b = boundary_for(measured, i, eps, setup.mode, chain, clean);
    const LiftPair lift = build_lift(b, grid);
    const FieldPair start(lift.F1, lift.F2, k, eps);

    DescentConfig cfg;
    cfg.functional = setup.functional;
    cfg.functional.k = k;
    cfg.max_iters = setup.max_iters;
    cfg.grad_tol = setup.grad_tol;
    cfg.snapshot_stride = setup.snapshot_stride;
    const bool probed = !(setup.gamma > 0.0);
    cfg.gamma = probed ? probe_step_size(start, lift, cfg) : setup.gamma;

    // A probed step that turns unstable later in the run is halved and the
    // run restarted; a user-given step is final.
    std::vector<std::string> retries;
    std::optional<DescentResult> run;
    for (int attempt = 0; !run; ++attempt) {
      try {
        run = minimize(start, lift, cfg);
      } catch (const StepSizeError& e) {
        if (!probed || attempt >= 8) throw;
        retries.push_back("gamma " + std::to_string(cfg.gamma) + " diverged; retried with half");
        cfg.gamma *= 0.5;
      }
    }
    run->history.warnings.insert(run->history.warnings.begin(), retries.begin(), retries.end());
    minimizers[i] = std::move(run->minimizer);
    histories[i] = std::move(run->history);
    boundaries[i] = b;
  });

  std::vector<FieldPair> mins;
  mins.reserve(nk);
  for (auto& m : minimizers) mins.push_back(std::move(*m));
  InversionResult result{kg,
                         Field::constant(grid, 1.0),
                         {},
                         std::move(mins),
                         std::move(histories),
                         std::move(boundaries),
                         setup.functional,
                         measured.noise_level,
                         Field::zeros(grid),
                         {}};
  finish_reconstruction(result);
  return result;
}

InversionSetup setup_from(const ExperimentConfig& cfg, double epsilon, double lambda) {
  InversionSetup s;
  s.functional.lambda = lambda;
  s.functional.epsilon = epsilon;
  s.functional.R = cfg.R;
  s.gamma = cfg.gamma;
  s.max_iters = cfg.max_iters;
  s.grad_tol = cfg.grad_tol;
  s.snapshot_stride = cfg.snapshot_stride;
  s.mode = cfg.boundary_mode;
  s.threads = cfg.threads;
  return s;
}

InversionRun run_inversion(const ExperimentConfig& cfg, double epsilon, double lambda, double delta) {
  SyntheticProblem problem = make_problem(cfg, epsilon, delta);
  InversionResult result = invert(problem.measured, problem.grid, setup_from(cfg, epsilon, lambda),
                                  &problem.chain, &problem.clean);
  ErrorReport errors = error_metrics(result, problem.truth, problem.chain);
  return {std::move(problem), std::move(result), std::move(errors)};
}

VerifyReport run_verify(const ExperimentConfig& cfg) {
  cfg.validate();
  const double eps = cfg.epsilon.front();
  SyntheticProblem problem = make_problem(cfg, eps, 0.0);
  const KGrid& kg = problem.k_grid;
  int idx = kg.size() / 2;
  if (cfg.verify_k != 0.0) {
    int best = 0;
    for (int i = 1; i < kg.size(); ++i) {
      if (std::abs(kg.value(i) - cfg.verify_k) < std::abs(kg.value(best) - cfg.verify_k)) best = i;
    }
    idx = best;
  }
  const double k = kg.value(idx);
  const BoundarySet b = boundary_for(problem.measured, idx, eps, cfg.boundary_mode, &problem.chain,
                                     &problem.clean);
  const LiftPair lift = build_lift(b, problem.grid);

  FunctionalParams params;
  params.epsilon = eps;
  params.k = k;
  params.R = cfg.R;
  params.lambda = cfg.lambda.front();

  VerifyReport rep;
  rep.lambda_tested = cfg.verify_lambdas;
  rep.samples = cfg.verify_samples;
  {
    CarlemanFunctional functional(problem.grid, params);
    rep.gradient = gradient_check(functional, lift, cfg.gradient_points, cfg.gradient_directions,
                                  cfg.gradient_step, cfg.seed);
  }
  rep.max_gradient_error = max_rel_error(rep.gradient);

  // Independent lambdas: fan out, keep input order.
  const auto& lams = cfg.verify_lambdas;
  rep.convexity.resize(lams.size());
  parallel_for(static_cast<int>(lams.size()), cfg.threads, [&](int i) {
    rep.convexity[i] =
        convexity_study(problem.grid, params, lift, {lams[i]}, cfg.verify_samples, cfg.seed + 1,
                        cfg.verify_modes)
            .front();
  });
  rep.min_gap = rep.convexity.empty() ? 0.0 : rep.convexity.front().min_gap;
  for (const auto& row : rep.convexity) rep.min_gap = std::min(rep.min_gap, row.min_gap);
  rep.lambda1 = empirical_lambda1(rep.convexity);
  rep.carleman = carleman_study(problem.grid, cfg.carleman_lambdas, cfg.verify_samples, cfg.seed + 2,
                                cfg.verify_modes);
  return rep;
}

}  // namespace convisc
