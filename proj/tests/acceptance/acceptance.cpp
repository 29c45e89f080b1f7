// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "convisc/config.hpp"
#include "convisc/experiment.hpp"
#include "convisc/optimizer.hpp"
#include "convisc/verification.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace convisc;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out{false, ""};
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = out.pass;
  std::string detail = out.detail;
  if (budget_s > 0.0 && secs > budget_s) {
    pass = false;
    detail += "; over the time budget";
  }
  if (!pass) ++failures;
  std::printf("CRITERION %d %s  %s  [%s]  (%.1f s, budget %s)\n", id, pass ? "PASS" : "FAIL", name,
              detail.c_str(), secs, budget_s > 0.0 ? (std::to_string(int(budget_s)) + " s").c_str() : "none");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig base_config() {
  ExperimentConfig cfg;  // bump, 201 nodes, 11 k in [1, 3], eps 0.1, forward-consistent
  cfg.threads = 0;
  return cfg;
}

// ---- 1 -------------------------------------------------------------------
Outcome gradient_correctness() {
  ExperimentConfig cfg = base_config();
  cfg.verify_lambdas.clear();
  cfg.carleman_lambdas.clear();
  cfg.gradient_points = 10;
  cfg.gradient_directions = 10;
  cfg.gradient_step = 1e-5;
  const VerifyReport rep = run_verify(cfg);
  const double worst = rep.max_gradient_error;
  return {rep.gradient.size() == 100 && worst <= 1e-5,
          fmt("%zu directional derivatives, max relative error %.3e (tol 1e-5)", rep.gradient.size(), worst)};
}

// ---- 2 -------------------------------------------------------------------
Outcome zero_residual_oracle() {
  const int nodes[] = {101, 201, 401};
  const int nks[] = {11, 21, 41};  // dk tied to h
  const double k = 2.0;
  double J[3];
  double JL1[3];
  for (int i = 0; i < 3; ++i) {
    const Grid1D g = make_grid(1.0, nodes[i]);
    const KGrid kg(1.0, 3.0, nks[i]);
    const auto chain = build_chain(solve_forward_family(bump_profile(g, 0.5, 0.5, 0.15), kg, 0), kg, 0.1);
    const FieldPair fp = chain.pair(*kg.index_of(k));
    FunctionalParams params;
    params.k = k;
    params.epsilon = 0.1;
    const CarlemanFunctional f(g, params);
    J[i] = f.value(fp);
    const Residuals res = f.residuals(fp.q.values(), fp.r.values());
    JL1[i] = f.weight().dot(res.L1.cwiseAbs2());
  }
  const double o1 = std::log2(J[0] / J[1]);
  const double o2 = std::log2(J[1] / J[2]);
  const double l1 = std::log2(JL1[0] / JL1[1]);
  const double l2 = std::log2(JL1[1] / JL1[2]);
  const bool pass = o1 >= 1.7 && o1 <= 2.3 && o2 >= 1.7 && o2 <= 2.3;
  return {pass, fmt("J(q*,r*) = %.4e, %.4e, %.4e at n = 101/201/401; orders %.2f, %.2f (need [1.7, 2.3]); "
                    "L1-only orders %.2f, %.2f",
                    J[0], J[1], J[2], o1, o2, l1, l2)};
}

// ---- 3 -------------------------------------------------------------------
Outcome strong_convexity() {
  const ExperimentConfig cfg = base_config();
  const SyntheticProblem problem = make_problem(cfg, 0.1, 0.0);
  const int idx = problem.k_grid.size() / 2;
  const BoundarySet b = boundary_for(problem.measured, idx, 0.1, cfg.boundary_mode, &problem.chain, &problem.clean);
  const LiftPair lift = build_lift(b, problem.grid);
  FunctionalParams params;
  params.k = problem.k_grid.value(idx);
  params.epsilon = 0.1;
  params.R = cfg.R;
  const double lam = *std::max_element(cfg.verify_lambdas.begin(), cfg.verify_lambdas.end());
  double c1[3];
  int positive[3];
  for (int s = 0; s < 3; ++s) {
    const auto row = convexity_study(problem.grid, params, lift, {lam}, 100, s + 1, cfg.verify_modes).front();
    c1[s] = row.c1;
    positive[s] = row.positive;
  }
  const double lo = *std::min_element(c1, c1 + 3);
  const double hi = *std::max_element(c1, c1 + 3);
  const double spread = (hi - lo) / lo;
  const double mean = (c1[0] + c1[1] + c1[2]) / 3.0;
  const bool pass = positive[0] == 100 && lo > 0.0 && spread <= 0.2;
  return {pass, fmt("lambda = %g, R = %g: positive gaps %d/%d/%d of 100; C1 = %.3e, %.3e, %.3e over seeds 1-3; "
                    "(max - min)/min = %.1f%% (tol 20%%), max deviation from mean %.1f%%",
                    lam, cfg.R, positive[0], positive[1], positive[2], c1[0], c1[1], c1[2], 100.0 * spread,
                    100.0 * std::max(hi - mean, mean - lo) / mean)};
}

// ---- 4 -------------------------------------------------------------------
Outcome carleman_estimate() {
  const ExperimentConfig cfg = base_config();
  const Grid1D g = make_grid(cfg.z_max, cfg.n_nodes);
  const auto rows = carleman_study(g, {2.0, 4.0, 8.0, 16.0}, 100, cfg.seed + 2, cfg.verify_modes);
  bool pass = true;
  std::string d = "C0(lambda):";
  for (const auto& r : rows) {
    pass = pass && r.c0 > 0.0;
    d += fmt(" %g -> %.3f", r.lambda, r.c0);
  }
  return {pass, d + " over 100 fields each"};
}

// ---- 5 -------------------------------------------------------------------
Outcome noiseless_inversion() {
  const ExperimentConfig cfg = base_config();
  const InversionRun run = run_inversion(cfg, 0.1, 1.0, 0.0);
  const double e = run.errors.sigma_rel_l2;
  return {e <= 0.05, fmt("relative L2 error of sigma_comp %.4f (tol 0.05), max spread over k %.3f", e,
                         run.errors.max_spread)};
}

// ---- 6 -------------------------------------------------------------------

// Mean over k of ||x_n - x_final||, on the iteration axis of the longest run.
// A run that stopped earlier sits at its final iterate (distance 0).
void mean_distance_curve(const InversionResult& res, std::vector<int>& its, std::vector<double>& dist) {
  std::size_t longest = 0;
  for (std::size_t i = 0; i < res.histories.size(); ++i) {
    if (res.histories[i].iterations > res.histories[longest].iterations) longest = i;
  }
  its = res.histories[longest].snapshot_iterations;
  dist.assign(its.size(), 0.0);
  for (const auto& h : res.histories) {
    std::size_t j = 0;
    for (std::size_t t = 0; t < its.size(); ++t) {
      while (j + 1 < h.snapshot_iterations.size() && h.snapshot_iterations[j + 1] <= its[t]) ++j;
      dist[t] += its[t] >= h.iterations ? 0.0 : h.iterates_norms[j];
    }
  }
  for (double& d : dist) d /= static_cast<double>(res.histories.size());
  // Drop the trailing zero; the fit needs positive distances.
  while (!dist.empty() && dist.back() <= 0.0) {
    dist.pop_back();
    its.pop_back();
  }
}

Outcome noise_scaling() {
  ExperimentConfig cfg = base_config();
  cfg.R = 1.5;  // the delta = 0.03 lift leaves the default ball
  const double deltas[] = {0.003, 0.01, 0.03};
  double sigma_err[3];
  double plateau[3];
  double theta[3];
  bool decay = true;
  for (int i = 0; i < 3; ++i) {
    const InversionRun run = run_inversion(cfg, 0.1, 1.0, deltas[i]);
    sigma_err[i] = run.errors.sigma_rel_l2;
    double p = 0.0;
    for (const auto& c : run.errors.field_error_curves) p += c.back();
    plateau[i] = p / static_cast<double>(run.errors.field_error_curves.size());
    std::vector<int> its;
    std::vector<double> dist;
    mean_distance_curve(run.result, its, dist);
    const ThetaEstimate est = estimate_theta(its, dist);
    theta[i] = est.theta.value_or(NAN);
    decay = decay && est.theta && *est.theta > 0.0 && *est.theta < 1.0 && !est.floor_dominated;
  }
  const bool monotone = sigma_err[0] <= sigma_err[1] && sigma_err[1] <= sigma_err[2];
  const bool ordered = plateau[0] < plateau[1] && plateau[1] < plateau[2];
  return {monotone && decay && ordered,
          fmt("R = 1.5; sigma errors %.4f, %.4f, %.4f (monotone: %s); theta %.6f, %.6f, %.6f (geometric: %s); "
              "plateau ||q-q*||+||r-r*|| %.4e, %.4e, %.4e (ordered: %s)",
              sigma_err[0], sigma_err[1], sigma_err[2], monotone ? "yes" : "no", theta[0], theta[1], theta[2],
              decay ? "yes" : "no", plateau[0], plateau[1], plateau[2], ordered ? "yes" : "no")};
}

// ---- 7 -------------------------------------------------------------------
Outcome descent_geometry() {
  const ExperimentConfig cfg = base_config();
  const SyntheticProblem problem = make_problem(cfg, 0.1, 0.0);
  const InversionSetup setup = setup_from(cfg, 0.1, 1.0);
  const InversionResult res = invert(problem.measured, problem.grid, setup, &problem.chain, &problem.clean);
  const double h = problem.grid.spacing();

  bool theta_ok = true;
  bool replay_ok = true;
  bool values_exact = true;
  bool slopes_exact = true;
  bool in_ball = true;
  double max_slope_dev = 0.0;
  double max_ball = 0.0;
  long iterates = 0;
  double theta_lo = 1.0;
  double theta_hi = 0.0;
  for (int i = 0; i < problem.k_grid.size(); ++i) {
    const DescentHistory& hist = res.histories[i];
    if (!(hist.theta_hat > 0.0 && hist.theta_hat < 1.0)) theta_ok = false;
    theta_lo = std::min(theta_lo, hist.theta_hat);
    theta_hi = std::max(theta_hi, hist.theta_hat);

    // Replay the run step by step and inspect every iterate.
    const BoundarySet b = res.boundaries[i];
    const LiftPair lift = build_lift(b, problem.grid);
    FieldPair x(lift.F1, lift.F2, problem.k_grid.value(i), 0.1);
    DescentConfig dc;
    dc.gamma = hist.gamma;
    dc.functional = setup.functional;
    dc.functional.k = x.k;
    const CarlemanFunctional f(problem.grid, dc.functional);
    const BoundarySet t0 = traces_of(x);
    for (int n = 0; n <= hist.iterations; ++n) {
      if (n > 0) x = gd_step(f, x, lift, dc).next;
      ++iterates;
      const BoundarySet t = traces_of(x);
      if (t.q0 != t0.q0 || t.r0 != t0.r0) values_exact = false;
      for (auto [a, c] : {std::pair{t.qz0, t0.qz0}, {t.qzZ, t0.qzZ}, {t.rz0, t0.rz0}, {t.rzZ, t0.rzZ}}) {
        if (a != c) slopes_exact = false;
        max_slope_dev = std::max(max_slope_dev, std::abs(a - c) * h);
      }
      const double bn = ball_norm(x);
      max_ball = std::max(max_ball, bn);
      if (bn > dc.functional.R) in_ball = false;
    }
    if (x.q.values() != res.minimizers[i].q.values() || x.r.values() != res.minimizers[i].r.values()) {
      replay_ok = false;
    }
  }
  return {theta_ok && replay_ok && values_exact && slopes_exact && in_ball,
          fmt("theta_hat in [%.6f, %.6f] (in (0,1): %s); %ld iterates replayed (identical: %s); "
              "value traces bit-exact: %s; slope traces bit-exact: %s (max |slope - initial| * h = %.2e); "
              "max ||q||+||r|| = %.6f <= R = %g: %s",
              theta_lo, theta_hi, theta_ok ? "yes" : "no", iterates, replay_ok ? "yes" : "no",
              values_exact ? "yes" : "no", slopes_exact ? "yes" : "no", max_slope_dev, max_ball,
              setup.functional.R, in_ball ? "yes" : "no")};
}

// ---- 8 -------------------------------------------------------------------
Outcome forward_oracle() {
  const double zmax = 1.0;
  const int n = 201;
  const Grid1D g = make_grid(zmax, n);
  struct Case {
    const char* name;
    ConductivityProfile lib;
    oracle::Profile fn;
  };
  auto taper = [zmax](double z) { return end_taper(z, zmax, 0.1 * zmax); };
  std::vector<Case> cases;
  cases.push_back({"bump", bump_profile(g, 0.5, 0.5, 0.15), [=](double z) {
                     const double x = (z - 0.5) / 0.15;
                     return 1.0 + 0.5 * std::exp(-x * x) * taper(z);
                   }});
  cases.push_back({"two-layer-smooth", two_layer_profile(g, 0.5, 0.5, 0.05), [=](double z) {
                     return 1.0 + 0.5 * 0.5 * (1.0 + std::tanh((z - 0.5) / 0.05)) * taper(z);
                   }});
  cases.push_back({"narrow-bump", bump_profile(g, 1.0, 0.3, 0.08), [=](double z) {
                     const double x = (z - 0.3) / 0.08;
                     return 1.0 + std::exp(-x * x) * taper(z);
                   }});
  double worst = 0.0;
  std::string d;
  for (const auto& c : cases) {
    for (double k : {1.0, 2.0, 3.0}) {
      const ForwardSlice s = solve_forward(c.lib, k);
      const double e = oracle::rel_l2(s.v_scattered.values(), oracle::scattered_field(c.fn, k, zmax, n));
      worst = std::max(worst, e);
    }
    d += fmt("%s ", c.name);
  }
  return {worst <= 1e-4, fmt("max relative L2 error %.3e over 9 cases (tol 1e-4); profiles %s", worst, d.c_str())};
}

}  // namespace

int main() {
  std::printf("convisc acceptance run\n");
  criterion(1, "gradient correctness", 10.0, gradient_correctness);
  criterion(2, "zero-residual oracle", 0.0, zero_residual_oracle);
  criterion(3, "strong convexity", 60.0, strong_convexity);
  criterion(4, "Carleman estimate", 30.0, carleman_estimate);
  criterion(5, "noiseless inversion", 300.0, noiseless_inversion);
  criterion(6, "noise scaling", 0.0, noise_scaling);
  criterion(7, "descent geometry", 0.0, descent_geometry);
  criterion(8, "forward-solver oracle", 0.0, forward_oracle);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
