#pragma once

#include "convisc/grid.hpp"
#include "convisc/transform.hpp"

#include <memory>

namespace convisc {

struct FunctionalParams {
  double lambda = 1.0;   ///< Carleman parameter, >= 1
  double epsilon = 0.1;  ///< viscosity, > 0
  double k = 1.0;        ///< frequency, > 0
  double R = 1.0;        ///< correctness-set radius, > 0

  void validate() const;
};

/// Carleman weight exp(-2 lambda z).
double cwf(double z, double lambda);
Field cwf_field(const Grid1D& grid, double lambda);

struct Residuals {
  Eigen::VectorXd L1;
  Eigen::VectorXd L2;
};

/// Functional J(q, r) = int (L1^2 + L2^2) phi_lambda dz for one frequency,
/// with its gradient. Holds the grid operators and the Riesz factorization so
/// repeated evaluation in a descent loop does not rebuild them.
class CarlemanFunctional {
 public:
  CarlemanFunctional(const Grid1D& grid, FunctionalParams params, Metric metric = Metric::h2);

  const FunctionalParams& params() const noexcept { return params_; }
  const Grid1D& grid() const noexcept { return ops_->grid(); }
  const GridOperators& operators() const noexcept { return *ops_; }
  const RieszMap& riesz() const noexcept { return riesz_; }
  /// Trapezoid weights times the Carleman weight.
  const Eigen::VectorXd& weight() const noexcept { return weight_; }

  Residuals residuals(const Eigen::VectorXd& q, const Eigen::VectorXd& r) const;
  double value(const Eigen::VectorXd& q, const Eigen::VectorXd& r) const;

  /// Nodal gradient of the discrete J (dJ/dq_i, dJ/dr_i), built by
  /// transposing the linearized residual operators.
  void euclidean_gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& r,
                          Eigen::VectorXd& gq, Eigen::VectorXd& gr, double* value = nullptr) const;

  /// Riesz representative of the derivative in the constrained space.
  void gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& r, Eigen::VectorXd& gq,
                Eigen::VectorXd& gr, double* value = nullptr) const;

  double value(const FieldPair& fp) const { return value(fp.q.values(), fp.r.values()); }
  FieldPair gradient(const FieldPair& fp) const;

 private:
  void check(const FieldPair& fp) const;

  FunctionalParams params_;
  std::shared_ptr<const GridOperators> ops_;
  RieszMap riesz_;
  Eigen::VectorXd weight_;
};

Field residual_L1(const FieldPair& fp, const FunctionalParams& params);
Field residual_L2(const FieldPair& fp, const FunctionalParams& params);
double evaluate_J(const FieldPair& fp, const FunctionalParams& params);
FieldPair gradient_J(const FieldPair& fp, const FunctionalParams& params,
                     Metric metric = Metric::h2);

struct ConvexityGap {
  double gap;              ///< J(2) - J(1) - [J'(1), 2 - 1]
  double scaled_distance;  ///< exp(-2 lambda Z) ||2 - 1||^2
};

/// Both pairs must carry the same boundary data (difference in the constrained
/// space, up to roundoff).
ConvexityGap convexity_gap(const FieldPair& fp1, const FieldPair& fp2, const FunctionalParams& params);
ConvexityGap convexity_gap(const CarlemanFunctional& functional, const FieldPair& fp1,
                           const FieldPair& fp2);

struct CarlemanTerms {
  double lhs;         ///< int u_zz^2 phi
  double d2_term;     ///< int u_zz^2 phi
  double lower_term;  ///< lambda int (u_z^2 + lambda^2 u^2) phi
};

/// Terms of the Carleman estimate for u with u(0) = u'(0) = 0.
CarlemanTerms carleman_check(const Field& u, double lambda);

}  // namespace convisc
