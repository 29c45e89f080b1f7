#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "convisc/functional.hpp"

#include <cmath>
#include <random>

using namespace convisc;

namespace {

FieldPair random_pair(const Grid1D& g, std::mt19937_64& rng, double k, double eps) {
  // Smooth random fields: a few sine modes plus a cubic.
  auto smooth = [&]() {
    double c[6];
    for (double& x : c) x = uniform_symmetric(rng);
    return Field::sample(g, [&](double z) {
      return c[0] + c[1] * z + c[2] * z * z * z + c[3] * std::sin(3.0 * z) +
             c[4] * std::cos(5.0 * z) + c[5] * std::sin(7.0 * z);
    });
  };
  return FieldPair(smooth(), smooth(), k, eps);
}

double trapz(const Grid1D& g, const std::function<double(double)>& f) {
  double s = 0.5 * (f(0.0) + f(g.z_max()));
  for (int i = 1; i < g.size() - 1; ++i) s += f(g.node(i));
  return s * g.spacing();
}

}  // namespace

TEST_CASE("cwf values") {
  CHECK(cwf(0.0, 1.0) == 1.0);
  CHECK(cwf(0.0, 17.0) == 1.0);
  CHECK(cwf(1.0, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(cwf(0.5, 3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-15));
  CHECK(cwf(0.7, 2.0) < cwf(0.6, 2.0));
  CHECK_THROWS_AS(cwf(0.5, 0.5), std::invalid_argument);
}

TEST_CASE("residuals for q = z, r = 0") {
  const Grid1D g = make_grid(1.0, 101);
  const FieldPair fp(Field::sample(g, [](double z) { return z; }), Field::zeros(g), 4.0, 1.0);
  FunctionalParams params;
  params.lambda = 1.0;
  const Field L1 = residual_L1(fp, params);
  const Field L2 = residual_L2(fp, params);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(L1[i] == doctest::Approx(4.5).epsilon(1e-10));
    CHECK(L2[i] == doctest::Approx(4.5).epsilon(1e-10));
  }
  const double expected = 2.0 * 4.5 * 4.5 * trapz(g, [](double z) { return std::exp(-2.0 * z); });
  CHECK(evaluate_J(fp, params) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("L1 - L2 is the difference of second derivatives") {
  const Grid1D g = make_grid(1.0, 81);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const FieldPair fp = random_pair(g, rng, 1.0 + t * 0.2, 0.1);
    FunctionalParams params;
    const Field d = residual_L1(fp, params) - residual_L2(fp, params);
    const Field expected = diff2(fp.q) - diff2(fp.r);
    const double scale = 1.0 + expected.values().cwiseAbs().maxCoeff();
    CHECK((d.values() - expected.values()).cwiseAbs().maxCoeff() < 1e-10 * scale);
  }
}

TEST_CASE("J is non-negative and decreases in lambda") {
  const Grid1D g = make_grid(1.0, 101);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const FieldPair fp = random_pair(g, rng, 2.0, 0.1);
    FunctionalParams params;
    double previous = INFINITY;
    for (double lambda : {1.0, 2.0, 4.0, 8.0}) {
      params.lambda = lambda;
      const double J = evaluate_J(fp, params);
      CHECK(J >= 0.0);
      CHECK(J <= previous);
      previous = J;
    }
  }
}

TEST_CASE("Euclidean gradient matches central differences node by node") {
  const Grid1D g = make_grid(1.0, 41);
  std::mt19937_64 rng(3);
  const FieldPair fp = random_pair(g, rng, 2.0, 0.3);
  FunctionalParams params;
  params.k = fp.k;
  params.epsilon = fp.epsilon;
  params.lambda = 2.0;
  const CarlemanFunctional f(g, params);
  Eigen::VectorXd gq;
  Eigen::VectorXd gr;
  f.euclidean_gradient(fp.q.values(), fp.r.values(), gq, gr);
  const double t = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    for (int which = 0; which < 2; ++which) {
      Eigen::VectorXd q = fp.q.values();
      Eigen::VectorXd r = fp.r.values();
      Eigen::VectorXd& v = which == 0 ? q : r;
      v[i] += t;
      const double jp = f.value(q, r);
      v[i] -= 2.0 * t;
      const double jm = f.value(q, r);
      const double fd = (jp - jm) / (2.0 * t);
      const double an = which == 0 ? gq[i] : gr[i];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("Riesz gradient gives the directional derivative") {
  const Grid1D g = make_grid(1.0, 101);
  std::mt19937_64 rng(4);
  FunctionalParams params;
  params.k = 2.0;
  params.epsilon = 0.1;
  params.lambda = 3.0;
  const CarlemanFunctional f(g, params);
  for (int t = 0; t < 5; ++t) {
    const FieldPair fp = random_pair(g, rng, 2.0, 0.1);
    const Eigen::VectorXd hq = random_constrained_field(f.riesz(), rng);
    const Eigen::VectorXd hr = random_constrained_field(f.riesz(), rng);
    Eigen::VectorXd gq;
    Eigen::VectorXd gr;
    f.gradient(fp.q.values(), fp.r.values(), gq, gr);
    const auto& G = f.riesz().gram();
    const double analytic = hq.dot(G * gq) + hr.dot(G * gr);
    const double s = 1e-5;
    const double fd = (f.value(fp.q.values() + s * hq, fp.r.values() + s * hr) -
                       f.value(fp.q.values() - s * hq, fp.r.values() - s * hr)) /
                      (2.0 * s);
    CHECK(std::abs(analytic - fd) <= 1e-5 * std::max(std::abs(analytic), std::abs(fd)));
    CHECK(f.riesz().violation(gq) < 1e-9 * (1.0 + gq.cwiseAbs().maxCoeff()));
    CHECK(f.riesz().violation(gr) < 1e-9 * (1.0 + gr.cwiseAbs().maxCoeff()));
    CHECK(gq[0] == 0.0);
    CHECK(gr[0] == 0.0);
  }
}

TEST_CASE("L2 metric gradient is a different representative of the same derivative") {
  const Grid1D g = make_grid(1.0, 101);
  std::mt19937_64 rng(5);
  const FieldPair fp = random_pair(g, rng, 1.5, 0.2);
  FunctionalParams params;
  const FieldPair gh2 = gradient_J(fp, params, Metric::h2);
  const FieldPair gl2 = gradient_J(fp, params, Metric::l2);
  const RieszMap space(operators_for(g), ConstraintSet::descent());
  const Eigen::VectorXd hq = random_constrained_field(space, rng);
  const auto ops = operators_for(g);
  const double via_h2 = ops->h2_inner(hq, gh2.q.values());
  const double via_l2 = hq.dot(ops->weights().cwiseProduct(gl2.q.values()));
  CHECK(via_h2 == doctest::Approx(via_l2).epsilon(1e-8));
}

TEST_CASE("convexity gap") {
  const Grid1D g = make_grid(1.0, 101);
  std::mt19937_64 rng(6);
  FunctionalParams params;
  params.lambda = 2.0;
  const FieldPair a = random_pair(g, rng, 2.0, 0.1);
  const ConvexityGap same = convexity_gap(a, a, params);
  CHECK(same.gap == 0.0);
  CHECK(same.scaled_distance == 0.0);

  const FieldPair b = random_pair(g, rng, 2.0, 0.1);
  CHECK_THROWS_AS(convexity_gap(a, b, params), std::invalid_argument);

  FunctionalParams fixed = params;
  fixed.k = 2.0;
  const CarlemanFunctional f(g, fixed);
  const Eigen::VectorXd hq = random_constrained_field(f.riesz(), rng) * 0.01;
  const Eigen::VectorXd hr = random_constrained_field(f.riesz(), rng) * 0.01;
  const FieldPair c(Field(g, a.q.values() + hq), Field(g, a.r.values() + hr), 2.0, 0.1);
  const ConvexityGap gap = convexity_gap(f, a, c);
  const double dist2 = f.operators().h2_inner(hq, hq) + f.operators().h2_inner(hr, hr);
  CHECK(gap.scaled_distance == doctest::Approx(std::exp(-4.0) * dist2));
}

TEST_CASE("carleman_check examples") {
  const Grid1D g = make_grid(1.0, 201);
  const Field u = Field::sample(g, [](double z) { return z * z; });
  const CarlemanTerms t = carleman_check(u, 2.0);
  CHECK(t.lhs == t.d2_term);
  const double d2 = trapz(g, [](double z) { return 4.0 * std::exp(-4.0 * z); });
  CHECK(t.d2_term == doctest::Approx(d2).epsilon(1e-8));
  const double lower =
      2.0 * trapz(g, [](double z) { return (4.0 * z * z + 4.0 * std::pow(z, 4)) * std::exp(-4.0 * z); });
  CHECK(t.lower_term == doctest::Approx(lower).epsilon(1e-8));
  CHECK_THROWS_AS(carleman_check(Field::sample(g, [](double z) { return z; }), 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(carleman_check(Field::constant(g, 1.0), 2.0), std::invalid_argument);
}

TEST_CASE("functional parameter validation") {
  const Grid1D g = make_grid(1.0, 21);
  FunctionalParams p;
  p.lambda = 0.5;
  CHECK_THROWS_AS(CarlemanFunctional(g, p), std::invalid_argument);
  p = FunctionalParams{};
  p.epsilon = 0.0;
  CHECK_THROWS_AS(CarlemanFunctional(g, p), std::invalid_argument);
  p = FunctionalParams{};
  p.R = -1.0;
  CHECK_THROWS_AS(CarlemanFunctional(g, p), std::invalid_argument);
}
