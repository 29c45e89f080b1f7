#include "convisc/verification.hpp"

#include "convisc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace convisc {

std::vector<GradientCheckRow> gradient_check(const CarlemanFunctional& functional,
                                             const LiftPair& lift, int points, int directions,
                                             double t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const FunctionalParams& p = functional.params();
  const RieszMap& space = functional.riesz();
  const SparseMatrix& gram = space.gram();
  std::vector<GradientCheckRow> rows;
  for (int i = 0; i < points; ++i) {
    const FieldPair x = random_pair_in_ball(lift, space, p.R, p.k, p.epsilon, rng);
    Eigen::VectorXd gq;
    Eigen::VectorXd gr;
    functional.gradient(x.q.values(), x.r.values(), gq, gr);
    for (int j = 0; j < directions; ++j) {
      Eigen::VectorXd hq = random_constrained_field(space, rng);
      Eigen::VectorXd hr = random_constrained_field(space, rng);
      const double scale = 1.0 / std::sqrt(2.0);
      hq *= scale;
      hr *= scale;
      const double analytic = hq.dot(gram * gq) + hr.dot(gram * gr);
      const double plus = functional.value(x.q.values() + t * hq, x.r.values() + t * hr);
      const double minus = functional.value(x.q.values() - t * hq, x.r.values() - t * hr);
      const double fd = (plus - minus) / (2.0 * t);
      const double denom = std::max({std::abs(analytic), std::abs(fd),
                                     std::numeric_limits<double>::min()});
      rows.push_back({i, j, analytic, fd, std::abs(analytic - fd) / denom});
    }
  }
  return rows;
}

std::vector<ConvexityRow> convexity_study(const Grid1D& grid, FunctionalParams params,
                                          const LiftPair& lift, const std::vector<double>& lambdas,
                                          int samples, std::uint64_t seed, int n_modes) {
  std::vector<ConvexityRow> rows;
  for (double lambda : lambdas) {
    params.lambda = lambda;
    CarlemanFunctional functional(grid, params);
    std::mt19937_64 rng(seed);
    ConvexityRow row{lambda, samples, 0, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
    for (int s = 0; s < samples; ++s) {
      const FieldPair a =
          random_pair_in_ball(lift, functional.riesz(), params.R, params.k, params.epsilon, rng, n_modes);
      const FieldPair b =
          random_pair_in_ball(lift, functional.riesz(), params.R, params.k, params.epsilon, rng, n_modes);
      const ConvexityGap g = convexity_gap(functional, a, b);
      if (g.gap > 0.0) ++row.positive;
      row.min_gap = std::min(row.min_gap, g.gap);
      if (g.scaled_distance > 0.0) row.c1 = std::min(row.c1, g.gap / g.scaled_distance);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<CarlemanRow> carleman_study(const Grid1D& grid, const std::vector<double>& lambdas,
                                        int samples, std::uint64_t seed, int n_modes) {
  const RieszMap space(operators_for(grid), ConstraintSet::carleman());
  std::vector<CarlemanRow> rows;
  for (double lambda : lambdas) {
    std::mt19937_64 rng(seed);
    CarlemanRow row{lambda, samples, std::numeric_limits<double>::infinity(), 0.0};
    for (int s = 0; s < samples; ++s) {
      const Field u(grid, random_constrained_field(space, rng, n_modes));
      const CarlemanTerms c = carleman_check(u, lambda);
      const double ratio = c.lhs / (c.d2_term + c.lower_term);
      row.c0 = std::min(row.c0, ratio);
      row.max_ratio = std::max(row.max_ratio, ratio);
    }
    rows.push_back(row);
  }
  return rows;
}

double max_rel_error(const std::vector<GradientCheckRow>& rows) {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.rel_error);
  return m;
}

std::optional<double> empirical_lambda1(const std::vector<ConvexityRow>& rows) {
  // Smallest lambda from which every larger swept lambda also passes.
  std::vector<ConvexityRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const ConvexityRow& a, const ConvexityRow& b) { return a.lambda < b.lambda; });
  std::optional<double> best;
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    if (it->positive != it->samples) break;
    best = it->lambda;
  }
  return best;
}

}  // namespace convisc
