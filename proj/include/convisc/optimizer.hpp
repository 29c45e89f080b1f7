#pragma once

#include "convisc/functional.hpp"
#include "convisc/transform.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace convisc {

struct DescentConfig {
  double gamma = 0.01;
  int max_iters = 100000;
  double grad_tol = 1e-9;
  FunctionalParams functional;
  /// Iterations between stored snapshots; 0 keeps between 256 and 512
  /// snapshots by thinning (stride doubles whenever the store fills up).
  int snapshot_stride = 0;

  void validate() const;
};

/// Largest s in [0, s_max] with ||F1 + s h_q|| + ||F2 + s h_r|| <= R, by
/// bisection (the feasible set is an interval since the norm sum is convex).
double max_ball_scale(const LiftPair& lift, const Eigen::VectorXd& hq, const Eigen::VectorXd& hr,
                      double R, double s_max = 1.0, double tol = 1e-10);

struct ProjectionResult {
  FieldPair pair;
  bool projected;
  double scale;  ///< factor applied to the homogeneous part
};

/// Keep the boundary data, shrink the homogeneous part fp - lift radially
/// until ||q|| + ||r|| <= R. Throws InfeasibleConstraint when the lift alone
/// leaves the ball.
ProjectionResult project_to_ball(const FieldPair& fp, const LiftPair& lift, double R);

/// Random point lift + s (h_q, h_r) of the ball with smooth random
/// constrained h and s uniform below the ball limit.
FieldPair random_pair_in_ball(const LiftPair& lift, const RieszMap& space, double R, double k,
                              double epsilon, std::mt19937_64& rng, int n_modes = 6);

struct DescentHistory {
  double gamma = 0.0;
  int iterations = 0;
  bool converged = false;
  bool start_outside_third = false;
  /// J at the start (index 0) and after every step.
  std::vector<double> J_values;
  /// H^2 norm of the gradient at each evaluated iterate.
  std::vector<double> grad_norms;
  /// One flag per step: the ball projection was active.
  std::vector<char> projected_flags;
  std::vector<int> snapshot_iterations;
  std::vector<FieldPair> snapshots;
  /// ||q_n - q_final|| + ||r_n - r_final|| at each snapshot.
  std::vector<double> iterates_norms;
  double theta_hat = std::numeric_limits<double>::quiet_NaN();
  bool floor_dominated = false;
  std::vector<std::string> warnings;
};

struct DescentResult {
  FieldPair minimizer;
  DescentHistory history;
};

struct StepResult {
  FieldPair next;
  bool projected;
};

StepResult gd_step(const CarlemanFunctional& functional, const FieldPair& fp, const LiftPair& lift,
                   const DescentConfig& cfg);
StepResult gd_step(const FieldPair& fp, const LiftPair& lift, const DescentConfig& cfg);

/// Fixed-step projected gradient descent from `start` (which must carry the
/// lift's boundary data).
DescentResult minimize(const FieldPair& start, const LiftPair& lift, const DescentConfig& cfg);

/// Doubling/halving probe for a stable fixed step: the largest gamma in
/// (0, 1) whose trial run decreases J monotonically, times `safety`.
double probe_step_size(const FieldPair& start, const LiftPair& lift, DescentConfig cfg,
                       int trial_iters = 200, double safety = 0.5);

struct ThetaEstimate {
  std::optional<double> theta;
  bool floor_dominated = false;
  int points_used = 0;
};

/// Contraction factor from a least-squares fit of log distance against
/// iteration over the decay phase (distances above floor_fraction * first).
ThetaEstimate estimate_theta(std::span<const int> iterations, std::span<const double> distances,
                             double floor_fraction = 1e-3);
ThetaEstimate estimate_theta(const DescentHistory& h, double floor_fraction = 1e-3);

}  // namespace convisc
