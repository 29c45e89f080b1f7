#include "convisc/functional.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace convisc {

void FunctionalParams::validate() const {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("lambda must be >= 1, got " + std::to_string(lambda));
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(k > 0.0)) throw std::invalid_argument("k must be > 0");
  if (!(R > 0.0)) throw std::invalid_argument("R must be > 0");
}

double cwf(double z, double lambda) {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("cwf: lambda must be >= 1, got " + std::to_string(lambda));
  }
  return std::exp(-2.0 * lambda * z);
}

Field cwf_field(const Grid1D& grid, double lambda) {
  return Field::sample(grid, [lambda](double z) { return cwf(z, lambda); });
}

CarlemanFunctional::CarlemanFunctional(const Grid1D& grid, FunctionalParams params, Metric metric)
    : params_(params),
      ops_(operators_for(grid)),
      riesz_(ops_, ConstraintSet::descent(), metric),
      weight_(ops_->weights().cwiseProduct(cwf_field(grid, params.lambda).values())) {
  params_.validate();
}

Residuals CarlemanFunctional::residuals(const Eigen::VectorXd& q, const Eigen::VectorXd& r) const {
  const double k = params_.k;
  const double eps = params_.epsilon;
  const double sk = std::sqrt(k);
  const Eigen::VectorXd qz = ops_->diff1(q);
  const Eigen::VectorXd rz = ops_->diff1(r);
  const Eigen::ArrayXd d = (qz - rz).array();
  const Eigen::ArrayXd common = (2.0 * k / eps) * qz.array() * d + d.square() / (eps * eps) -
                                2.0 * sk * qz.array() - d / (eps * sk);
  Residuals res;
  res.L1 = ops_->diff2(q) + common.matrix();
  res.L2 = ops_->diff2(r) + common.matrix();
  return res;
}

double CarlemanFunctional::value(const Eigen::VectorXd& q, const Eigen::VectorXd& r) const {
  const Residuals res = residuals(q, r);
  return weight_.dot((res.L1.array().square() + res.L2.array().square()).matrix());
}

void CarlemanFunctional::euclidean_gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& r,
                                            Eigen::VectorXd& gq, Eigen::VectorXd& gr,
                                            double* value) const {
  const double k = params_.k;
  const double eps = params_.epsilon;
  const double sk = std::sqrt(k);
  const Eigen::VectorXd qz = ops_->diff1(q);
  const Eigen::VectorXd rz = ops_->diff1(r);
  const Eigen::ArrayXd d = (qz - rz).array();
  const Eigen::ArrayXd common = (2.0 * k / eps) * qz.array() * d + d.square() / (eps * eps) -
                                2.0 * sk * qz.array() - d / (eps * sk);
  const Eigen::ArrayXd L1 = ops_->diff2(q).array() + common;
  const Eigen::ArrayXd L2 = ops_->diff2(r).array() + common;
  if (value != nullptr) *value = weight_.dot((L1.square() + L2.square()).matrix());

  // Coefficients of q_z and r_z in the linearization of the shared term.
  const Eigen::ArrayXd a =
      (2.0 * k / eps) * (d + qz.array()) + 2.0 * d / (eps * eps) - 2.0 * sk - 1.0 / (eps * sk);
  const Eigen::ArrayXd b = -(2.0 * k / eps) * qz.array() - 2.0 * d / (eps * eps) + 1.0 / (eps * sk);

  const Eigen::ArrayXd w = weight_.array();
  const Eigen::ArrayXd wsum = w * (L1 + L2);
  gq = 2.0 * (ops_->d2().transpose() * (w * L1).matrix() +
              ops_->d1().transpose() * (a * wsum).matrix());
  gr = 2.0 * (ops_->d2().transpose() * (w * L2).matrix() +
              ops_->d1().transpose() * (b * wsum).matrix());
}

void CarlemanFunctional::gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& r,
                                  Eigen::VectorXd& gq, Eigen::VectorXd& gr, double* value) const {
  Eigen::VectorXd eq;
  Eigen::VectorXd er;
  euclidean_gradient(q, r, eq, er, value);
  gq = riesz_.from_load(eq);
  gr = riesz_.from_load(er);
}

void CarlemanFunctional::check(const FieldPair& fp) const {
  if (!(fp.grid() == grid())) {
    throw std::invalid_argument("CarlemanFunctional: pair lives on a different grid");
  }
}

FieldPair CarlemanFunctional::gradient(const FieldPair& fp) const {
  check(fp);
  Eigen::VectorXd gq;
  Eigen::VectorXd gr;
  gradient(fp.q.values(), fp.r.values(), gq, gr);
  return FieldPair(Field(grid(), std::move(gq)), Field(grid(), std::move(gr)), fp.k, fp.epsilon);
}

namespace {

FunctionalParams with_pair(FunctionalParams params, const FieldPair& fp) {
  params.k = fp.k;
  params.epsilon = fp.epsilon;
  return params;
}

}  // namespace

Field residual_L1(const FieldPair& fp, const FunctionalParams& params) {
  CarlemanFunctional f(fp.grid(), with_pair(params, fp));
  return Field(fp.grid(), f.residuals(fp.q.values(), fp.r.values()).L1);
}

Field residual_L2(const FieldPair& fp, const FunctionalParams& params) {
  CarlemanFunctional f(fp.grid(), with_pair(params, fp));
  return Field(fp.grid(), f.residuals(fp.q.values(), fp.r.values()).L2);
}

double evaluate_J(const FieldPair& fp, const FunctionalParams& params) {
  return CarlemanFunctional(fp.grid(), with_pair(params, fp)).value(fp);
}

FieldPair gradient_J(const FieldPair& fp, const FunctionalParams& params, Metric metric) {
  return CarlemanFunctional(fp.grid(), with_pair(params, fp), metric).gradient(fp);
}

ConvexityGap convexity_gap(const CarlemanFunctional& functional, const FieldPair& fp1,
                           const FieldPair& fp2) {
  require_same_grid(fp1.q, fp2.q, "convexity_gap");
  const Eigen::VectorXd hq = fp2.q.values() - fp1.q.values();
  const Eigen::VectorXd hr = fp2.r.values() - fp1.r.values();
  const double scale = 1.0 + std::max({fp1.q.values().cwiseAbs().maxCoeff(),
                                       fp1.r.values().cwiseAbs().maxCoeff(),
                                       fp2.q.values().cwiseAbs().maxCoeff(),
                                       fp2.r.values().cwiseAbs().maxCoeff()});
  const RieszMap& space = functional.riesz();
  if (space.violation(hq) > 1e-9 * scale || space.violation(hr) > 1e-9 * scale) {
    throw std::invalid_argument("convexity_gap: the two pairs carry different boundary data");
  }

  Eigen::VectorXd gq;
  Eigen::VectorXd gr;
  double j1 = 0.0;
  functional.gradient(fp1.q.values(), fp1.r.values(), gq, gr, &j1);
  const double j2 = functional.value(fp2.q.values(), fp2.r.values());
  const auto& gram = space.gram();
  const double directional = hq.dot(gram * gq) + hr.dot(gram * gr);

  const auto& ops = functional.operators();
  const double dist2 = ops.h2_inner(hq, hq) + ops.h2_inner(hr, hr);
  const double z = functional.grid().z_max();
  return {j2 - j1 - directional, std::exp(-2.0 * functional.params().lambda * z) * dist2};
}

ConvexityGap convexity_gap(const FieldPair& fp1, const FieldPair& fp2,
                           const FunctionalParams& params) {
  CarlemanFunctional f(fp1.grid(), with_pair(params, fp1));
  return convexity_gap(f, fp1, fp2);
}

CarlemanTerms carleman_check(const Field& u, double lambda) {
  const auto ops = operators_for(u.grid());
  const auto& v = u.values();
  const double scale = 1.0 + v.cwiseAbs().maxCoeff();
  if (std::abs(v[0]) > 1e-9 * scale || std::abs(-3.0 * v[0] + 4.0 * v[1] - v[2]) > 1e-9 * scale) {
    throw std::invalid_argument("carleman_check: u must satisfy u(0) = u'(0) = 0");
  }
  const Eigen::VectorXd w = ops->weights().cwiseProduct(cwf_field(u.grid(), lambda).values());
  const Eigen::ArrayXd uz = ops->diff1(v).array();
  const Eigen::ArrayXd uzz = ops->diff2(v).array();
  const double d2 = w.dot(uzz.square().matrix());
  const double lower = lambda * w.dot((uz.square() + lambda * lambda * v.array().square()).matrix());
  return {d2, d2, lower};
}

}  // namespace convisc
