#pragma once

#include "convisc/functional.hpp"
#include "convisc/transform.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace convisc {

struct GradientCheckRow {
  int point;
  int direction;
  double analytic;  ///< [J'(x), h] in H^2 x H^2
  double fd;        ///< (J(x + t h) - J(x - t h)) / (2t)
  double rel_error;
};

/// Analytic directional derivatives against central differences at random
/// points of B(R) (sharing the lift's boundary data) and random unit
/// constrained directions.
std::vector<GradientCheckRow> gradient_check(const CarlemanFunctional& functional,
                                             const LiftPair& lift, int points, int directions,
                                             double t, std::uint64_t seed);

struct ConvexityRow {
  double lambda;
  int samples;
  int positive;
  double min_gap;
  /// min over samples of gap / scaled_distance.
  double c1;
};

/// Random same-boundary pairs in B(R) per lambda; params.lambda is overridden.
std::vector<ConvexityRow> convexity_study(const Grid1D& grid, FunctionalParams params,
                                          const LiftPair& lift, const std::vector<double>& lambdas,
                                          int samples, std::uint64_t seed, int n_modes = 6);

struct CarlemanRow {
  double lambda;
  int samples;
  /// min over samples of lhs / (d2_term + lower_term).
  double c0;
  double max_ratio;
};

/// Random fields with u(0) = u'(0) = 0.
std::vector<CarlemanRow> carleman_study(const Grid1D& grid, const std::vector<double>& lambdas,
                                        int samples, std::uint64_t seed, int n_modes = 6);

struct VerifyReport {
  std::vector<double> lambda_tested;
  std::vector<ConvexityRow> convexity;
  std::vector<CarlemanRow> carleman;
  std::vector<GradientCheckRow> gradient;
  double max_gradient_error = 0.0;
  double min_gap = 0.0;
  int samples = 0;
  /// Smallest swept lambda with every convexity gap positive.
  std::optional<double> lambda1;
};

double max_rel_error(const std::vector<GradientCheckRow>& rows);
std::optional<double> empirical_lambda1(const std::vector<ConvexityRow>& rows);

}  // namespace convisc
