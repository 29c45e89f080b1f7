#include "convisc/optimizer.hpp"

#include "convisc/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace convisc {

void DescentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("DescentConfig: gamma must lie in (0, 1), got " + std::to_string(gamma));
  }
  if (max_iters < 1) throw std::invalid_argument("DescentConfig: max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("DescentConfig: grad_tol must be > 0");
  if (snapshot_stride < 0) throw std::invalid_argument("DescentConfig: snapshot_stride must be >= 0");
  functional.validate();
}

namespace {

double h2(const GridOperators& ops, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, ops.h2_inner(v, v)));
}

void require_lift_grid(const FieldPair& fp, const LiftPair& lift) {
  if (!(fp.grid() == lift.F1.grid()) || !(fp.grid() == lift.F2.grid())) {
    throw std::invalid_argument("pair and lift live on different grids");
  }
}

}  // namespace

double max_ball_scale(const LiftPair& lift, const Eigen::VectorXd& hq, const Eigen::VectorXd& hr,
                      double R, double s_max, double tol) {
  const auto ops = operators_for(lift.F1.grid());
  const Eigen::VectorXd& f1 = lift.F1.values();
  const Eigen::VectorXd& f2 = lift.F2.values();
  auto norm_at = [&](double s) { return h2(*ops, f1 + s * hq) + h2(*ops, f2 + s * hr); };
  if (norm_at(0.0) > R) {
    throw InfeasibleConstraint("lift norm " + std::to_string(norm_at(0.0)) +
                               " exceeds the ball radius R = " + std::to_string(R));
  }
  if (norm_at(s_max) <= R) return s_max;
  double lo = 0.0;
  double hi = s_max;
  while (hi - lo > tol * s_max) {
    const double mid = 0.5 * (lo + hi);
    if (norm_at(mid) <= R) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

ProjectionResult project_to_ball(const FieldPair& fp, const LiftPair& lift, double R) {
  require_lift_grid(fp, lift);
  const auto ops = operators_for(fp.grid());
  const double lift_norm = h2(*ops, lift.F1.values()) + h2(*ops, lift.F2.values());
  if (lift_norm > R) {
    throw InfeasibleConstraint("project_to_ball: ||F1|| + ||F2|| = " + std::to_string(lift_norm) +
                               " exceeds R = " + std::to_string(R));
  }
  if (ball_norm(fp) <= R) return {fp, false, 1.0};
  const Eigen::VectorXd hq = fp.q.values() - lift.F1.values();
  const Eigen::VectorXd hr = fp.r.values() - lift.F2.values();
  const double s = max_ball_scale(lift, hq, hr, R);
  FieldPair out(Field(fp.grid(), lift.F1.values() + s * hq), Field(fp.grid(), lift.F2.values() + s * hr),
                fp.k, fp.epsilon);
  return {std::move(out), true, s};
}

FieldPair random_pair_in_ball(const LiftPair& lift, const RieszMap& space, double R, double k,
                              double epsilon, std::mt19937_64& rng, int n_modes) {
  const auto& ops = space.operators();
  const Eigen::VectorXd hq = standard_normal(rng) * random_constrained_field(space, rng, n_modes);
  const Eigen::VectorXd hr = standard_normal(rng) * random_constrained_field(space, rng, n_modes);
  const double lift_norm = h2(ops, lift.F1.values()) + h2(ops, lift.F2.values());
  const double hn = h2(ops, hq) + h2(ops, hr);
  const double s_cap = hn > 0.0 ? 1.01 * (R + lift_norm) / hn : 1.0;
  const double s_lim = max_ball_scale(lift, hq, hr, R, s_cap);
  const double u = 0.5 * (1.0 + uniform_symmetric(rng));
  const double s = std::max(u, 1e-3) * s_lim;
  const Grid1D& g = lift.F1.grid();
  return FieldPair(Field(g, lift.F1.values() + s * hq), Field(g, lift.F2.values() + s * hr), k, epsilon);
}

StepResult gd_step(const CarlemanFunctional& functional, const FieldPair& fp, const LiftPair& lift,
                   const DescentConfig& cfg) {
  require_lift_grid(fp, lift);
  Eigen::VectorXd gq;
  Eigen::VectorXd gr;
  functional.gradient(fp.q.values(), fp.r.values(), gq, gr);
  FieldPair moved(Field(fp.grid(), fp.q.values() - cfg.gamma * gq),
                  Field(fp.grid(), fp.r.values() - cfg.gamma * gr), fp.k, fp.epsilon);
  auto proj = project_to_ball(moved, lift, cfg.functional.R);
  return {std::move(proj.pair), proj.projected};
}

StepResult gd_step(const FieldPair& fp, const LiftPair& lift, const DescentConfig& cfg) {
  cfg.validate();
  FunctionalParams params = cfg.functional;
  params.k = fp.k;
  params.epsilon = fp.epsilon;
  CarlemanFunctional functional(fp.grid(), params);
  return gd_step(functional, fp, lift, cfg);
}

namespace {

struct RunOptions {
  bool record = true;
  bool throw_on_divergence = true;
};

// Shared descent loop. Returns false (instead of throwing) on divergence when
// throw_on_divergence is off, or when J ever increases in monotone-check mode.
DescentResult run_descent(const CarlemanFunctional& functional, const FieldPair& start,
                          const LiftPair& lift, const DescentConfig& cfg, const RunOptions& opt,
                          bool* monotone = nullptr) {
  const GridOperators& ops = functional.operators();
  const Grid1D& grid = start.grid();
  const double R = cfg.functional.R;
  const Eigen::VectorXd& f1 = lift.F1.values();
  const Eigen::VectorXd& f2 = lift.F2.values();
  const double lift_norm = h2(ops, f1) + h2(ops, f2);
  if (lift_norm > R) {
    throw InfeasibleConstraint("minimize: ||F1|| + ||F2|| = " + std::to_string(lift_norm) +
                               " exceeds R = " + std::to_string(R) + "; increase R");
  }

  DescentHistory hist;
  hist.gamma = cfg.gamma;
  Eigen::VectorXd q = start.q.values();
  Eigen::VectorXd r = start.r.values();

  const double start_norm = h2(ops, q) + h2(ops, r);
  if (start_norm > R) {
    hist.warnings.push_back("start lies outside B(R) (norm " + std::to_string(start_norm) +
                            "); projected before the first step");
    const double s = max_ball_scale(lift, q - f1, r - f2, R);
    q = f1 + s * (q - f1);
    r = f2 + s * (r - f2);
  } else if (start_norm > R / 3.0) {
    hist.start_outside_third = true;
    hist.warnings.push_back("start lies outside B(R/3) (norm " + std::to_string(start_norm) +
                            ", R/3 = " + std::to_string(R / 3.0) + ")");
  }

  const bool adaptive = cfg.snapshot_stride == 0;
  int stride = adaptive ? 1 : cfg.snapshot_stride;
  constexpr std::size_t max_snapshots = 512;
  const SparseMatrix& gram = ops.h2_gram();
  Eigen::VectorXd gq;
  Eigen::VectorXd gr;
  int rising = 0;
  double previous = std::numeric_limits<double>::infinity();
  if (monotone != nullptr) *monotone = true;

  for (int it = 0;; ++it) {
    double J = 0.0;
    functional.gradient(q, r, gq, gr, &J);
    const double gnorm = std::sqrt(std::max(0.0, gq.dot(gram * gq) + gr.dot(gram * gr)));
    if (!std::isfinite(J) || !std::isfinite(gnorm)) {
      if (monotone != nullptr) *monotone = false;
      if (opt.throw_on_divergence) {
        throw StepSizeError("minimize: non-finite functional at iteration " + std::to_string(it) +
                            "; reduce gamma (currently " + std::to_string(cfg.gamma) + ")");
      }
      break;
    }
    hist.J_values.push_back(J);
    hist.grad_norms.push_back(gnorm);
    if (opt.record && it % stride == 0) {
      if (adaptive && hist.snapshots.size() == max_snapshots) {
        std::size_t kept = 0;
        for (std::size_t s = 0; s < hist.snapshots.size(); s += 2, ++kept) {
          hist.snapshot_iterations[kept] = hist.snapshot_iterations[s];
          hist.snapshots[kept] = std::move(hist.snapshots[s]);
        }
        hist.snapshot_iterations.resize(kept);
        hist.snapshots.erase(hist.snapshots.begin() + static_cast<std::ptrdiff_t>(kept),
                             hist.snapshots.end());
        stride *= 2;
      }
      if (it % stride == 0) {
        hist.snapshot_iterations.push_back(it);
        hist.snapshots.emplace_back(Field(grid, q), Field(grid, r), start.k, start.epsilon);
      }
    }

    // Increases at roundoff level near the minimum are not divergence.
    if (J > previous * (1.0 + 1e-12)) {
      if (monotone != nullptr) *monotone = false;
      if (++rising >= 5 && opt.throw_on_divergence) {
        throw StepSizeError("minimize: J increased for 5 consecutive iterations (at iteration " +
                            std::to_string(it) + "); reduce gamma (currently " +
                            std::to_string(cfg.gamma) + ")");
      }
    } else {
      rising = 0;
    }
    previous = J;

    if (gnorm <= cfg.grad_tol) {
      hist.converged = true;
      break;
    }
    if (it == cfg.max_iters) break;

    q -= cfg.gamma * gq;
    r -= cfg.gamma * gr;
    bool projected = false;
    if (h2(ops, q) + h2(ops, r) > R) {
      const double s = max_ball_scale(lift, q - f1, r - f2, R);
      q = f1 + s * (q - f1);
      r = f2 + s * (r - f2);
      projected = true;
    }
    hist.projected_flags.push_back(projected ? 1 : 0);
    hist.iterations = it + 1;
  }

  FieldPair final_pair(Field(grid, q), Field(grid, r), start.k, start.epsilon);
  if (opt.record) {
    if (hist.snapshot_iterations.empty() || hist.snapshot_iterations.back() != hist.iterations) {
      hist.snapshot_iterations.push_back(hist.iterations);
      hist.snapshots.push_back(final_pair);
    }
    hist.iterates_norms.reserve(hist.snapshots.size());
    for (const auto& s : hist.snapshots) {
      hist.iterates_norms.push_back(h2(ops, s.q.values() - q) + h2(ops, s.r.values() - r));
    }
    const std::span<const int> its(hist.snapshot_iterations.data(), hist.snapshot_iterations.size() - 1);
    const std::span<const double> ds(hist.iterates_norms.data(), hist.iterates_norms.size() - 1);
    try {
      const ThetaEstimate est = estimate_theta(its, ds);
      hist.floor_dominated = est.floor_dominated;
      if (est.theta) hist.theta_hat = *est.theta;
    } catch (const std::invalid_argument&) {
      // No geometric phase long enough to fit.
      hist.floor_dominated = true;
    }
  }
  return {std::move(final_pair), std::move(hist)};
}

CarlemanFunctional functional_for(const FieldPair& start, const DescentConfig& cfg) {
  FunctionalParams params = cfg.functional;
  params.k = start.k;
  params.epsilon = start.epsilon;
  return CarlemanFunctional(start.grid(), params);
}

}  // namespace

DescentResult minimize(const FieldPair& start, const LiftPair& lift, const DescentConfig& cfg) {
  cfg.validate();
  require_lift_grid(start, lift);
  const CarlemanFunctional functional = functional_for(start, cfg);
  return run_descent(functional, start, lift, cfg, RunOptions{});
}

double probe_step_size(const FieldPair& start, const LiftPair& lift, DescentConfig cfg,
                       int trial_iters, double safety) {
  require_lift_grid(start, lift);
  cfg.max_iters = trial_iters;
  cfg.gamma = 0.25;
  cfg.validate();
  const CarlemanFunctional functional = functional_for(start, cfg);

  auto stable = [&](double gamma) {
    DescentConfig trial = cfg;
    trial.gamma = gamma;
    bool monotone = true;
    run_descent(functional, start, lift, trial, RunOptions{false, false}, &monotone);
    return monotone;
  };

  double gamma = 0.25;
  if (stable(gamma)) {
    if (stable(0.5)) gamma = 0.5;
  } else {
    do {
      gamma *= 0.5;
      if (gamma < 1e-12) throw StepSizeError("probe_step_size: no stable step above 1e-12");
    } while (!stable(gamma));
  }
  return gamma * safety;
}

ThetaEstimate estimate_theta(std::span<const int> iterations, std::span<const double> distances,
                             double floor_fraction) {
  if (iterations.size() != distances.size()) {
    throw std::invalid_argument("estimate_theta: iteration and distance counts differ");
  }
  if (distances.size() < 5) {
    throw std::invalid_argument("estimate_theta: too-short history (need at least 5 points)");
  }
  const double d0 = distances[0];
  std::size_t used = 0;
  while (used < distances.size() && distances[used] > 0.0 && distances[used] > floor_fraction * d0) {
    ++used;
  }
  ThetaEstimate est;
  est.points_used = static_cast<int>(used);
  if (used < 5) {
    throw std::invalid_argument("estimate_theta: fewer than 5 points before the floor");
  }
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < used; ++i) {
    sx += iterations[i];
    sy += std::log(distances[i]);
  }
  const double mx = sx / used;
  const double my = sy / used;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < used; ++i) {
    const double dx = iterations[i] - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(distances[i]) - my);
  }
  const double theta = std::exp(sxy / sxx);
  const bool stalled = distances[used - 1] > 0.5 * d0;
  if (!(theta < 1.0 - 1e-9) || stalled) {
    est.floor_dominated = true;
    return est;
  }
  est.theta = theta;
  return est;
}

ThetaEstimate estimate_theta(const DescentHistory& h, double floor_fraction) {
  if (h.snapshot_iterations.size() < 2) {
    throw std::invalid_argument("estimate_theta: too-short history");
  }
  const std::size_t n = h.snapshot_iterations.size() - 1;
  return estimate_theta(std::span<const int>(h.snapshot_iterations.data(), n),
                        std::span<const double>(h.iterates_norms.data(), n), floor_fraction);
}

}  // namespace convisc
