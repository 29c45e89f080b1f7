#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers.

#include <Eigen/Dense>
#include <Eigen/QR>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Profile = std::function<double(double)>;

inline double u0(double z, double k) { return std::exp(-std::sqrt(k) * z) / (2.0 * std::sqrt(k)); }

/// d u0 / dk for z >= 0.
inline double u0_dk(double z, double k) {
  return u0(z, k) * (-z / (2.0 * std::sqrt(k)) - 1.0 / (2.0 * k));
}

/// Dense solve of y'' - k sigma y = f on [0, Z] with y'(0) - sqrt(k) y(0) = a
/// and y'(Z) + sqrt(k) y(Z) = b. Ghost-point central Robin closures, so the
/// scheme differs from the library's one-sided rows.
inline Eigen::VectorXd robin_bvp(const Profile& sigma, const Profile& f, double k, double a,
                                 double b, double zmax, int n) {
  const double h = zmax / (n - 1);
  const double sk = std::sqrt(k);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const double z = i * h;
    A(i, i) = -2.0 / (h * h) - k * sigma(z);
    rhs[i] = f(z);
    if (i > 0) A(i, i - 1) = 1.0 / (h * h);
    if (i < n - 1) A(i, i + 1) = 1.0 / (h * h);
  }
  // Ghost y_{-1} = y_1 - 2h (sqrt(k) y_0 + a).
  A(0, 1) = 2.0 / (h * h);
  A(0, 0) += -2.0 * sk / h;
  rhs[0] += 2.0 * a / h;
  // Ghost y_{n} = y_{n-2} + 2h (b - sqrt(k) y_{n-1}).
  A(n - 1, n - 2) = 2.0 / (h * h);
  A(n - 1, n - 1) += -2.0 * sk / h;
  rhs[n - 1] -= 2.0 * b / h;
  return A.partialPivLu().solve(rhs);
}

/// Richardson extrapolation of robin_bvp from 2x and 4x refinements of an
/// n-node grid, sampled at the n coarse nodes.
inline Eigen::VectorXd robin_bvp_extrapolated(const Profile& sigma, const Profile& f, double k,
                                              double a, double b, double zmax, int n) {
  const int n2 = 2 * (n - 1) + 1;
  const int n4 = 4 * (n - 1) + 1;
  const Eigen::VectorXd y2 = robin_bvp(sigma, f, k, a, b, zmax, n2);
  const Eigen::VectorXd y4 = robin_bvp(sigma, f, k, a, b, zmax, n4);
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = (4.0 * y4[4 * i] - y2[2 * i]) / 3.0;
  return out;
}

/// Scattered field of v'' - k sigma v = -delta on the coarse nodes.
inline Eigen::VectorXd scattered_field(const Profile& sigma, double k, double zmax, int n) {
  const Profile f = [&](double z) { return k * (sigma(z) - 1.0) * u0(z, k); };
  return robin_bvp_extrapolated(sigma, f, k, 0.0, 0.0, zmax, n);
}

/// g'(k) from the k-sensitivity of the scattered field: s = d vs / dk solves
/// s'' - k sigma s = sigma vs + (sigma - 1)(u0 + k du0/dk) with Robin data
/// from differentiating the boundary conditions; then g' = s'(0) =
/// sqrt(k) s(0) + vs(0) / (2 sqrt(k)).
inline double g_prime(const Profile& sigma, double k, double zmax, int n) {
  // Both fields are solved on the same refined grid so the source of the
  // sensitivity problem is sampled at nodes.
  const double sk = std::sqrt(k);
  auto solve_at = [&](int m) {
    const Profile fv = [&](double z) { return k * (sigma(z) - 1.0) * u0(z, k); };
    const Eigen::VectorXd v = robin_bvp(sigma, fv, k, 0.0, 0.0, zmax, m);
    const double hm = zmax / (m - 1);
    const Profile fs = [&, hm](double z) {
      const int i = static_cast<int>(std::lround(z / hm));
      return sigma(z) * v[i] + (sigma(z) - 1.0) * (u0(z, k) + k * u0_dk(z, k));
    };
    const Eigen::VectorXd s = robin_bvp(sigma, fs, k, v[0] / (2.0 * sk), -v[m - 1] / (2.0 * sk), zmax, m);
    return sk * s[0] + v[0] / (2.0 * sk);
  };
  const int n2 = 2 * (n - 1) + 1;
  const int n4 = 4 * (n - 1) + 1;
  return (4.0 * solve_at(n4) - solve_at(n2)) / 3.0;
}

inline double rel_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / b.norm();
}

/// Dense Levenberg-Marquardt minimizer of the weighted residual functional
/// sum_i w_i e^{-2 lambda z_i} (L1_i^2 + L2_i^2) over pairs that keep the
/// start's value at 0 and one-sided slopes at both ends. Works in an
/// orthonormal null-space basis of the trace constraints.
struct LmResult {
  Eigen::VectorXd q;
  Eigen::VectorXd r;
  double J;
  int iterations;
};

inline LmResult carleman_lm(const Eigen::VectorXd& q_start, const Eigen::VectorXd& r_start, double k,
                            double eps, double lambda, double zmax, int max_iters = 500) {
  const int n = static_cast<int>(q_start.size());
  const double h = zmax / (n - 1);
  Eigen::MatrixXd D1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(n, n);
  D1(0, 0) = -1.5 / h; D1(0, 1) = 2.0 / h; D1(0, 2) = -0.5 / h;
  D1(n - 1, n - 3) = 0.5 / h; D1(n - 1, n - 2) = -2.0 / h; D1(n - 1, n - 1) = 1.5 / h;
  const double h2 = h * h;
  D2(0, 0) = 2.0 / h2; D2(0, 1) = -5.0 / h2; D2(0, 2) = 4.0 / h2; D2(0, 3) = -1.0 / h2;
  D2(n - 1, n - 1) = 2.0 / h2; D2(n - 1, n - 2) = -5.0 / h2; D2(n - 1, n - 3) = 4.0 / h2;
  D2(n - 1, n - 4) = -1.0 / h2;
  for (int i = 1; i < n - 1; ++i) {
    D1(i, i - 1) = -0.5 / h; D1(i, i + 1) = 0.5 / h;
    D2(i, i - 1) = 1.0 / h2; D2(i, i) = -2.0 / h2; D2(i, i + 1) = 1.0 / h2;
  }
  Eigen::VectorXd sw(n);
  for (int i = 0; i < n; ++i) {
    const double trap = (i == 0 || i == n - 1) ? 0.5 * h : h;
    sw[i] = std::sqrt(trap * std::exp(-2.0 * lambda * i * h));
  }

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, n);
  C(0, 0) = 1.0;
  C.row(1) = D1.row(0);
  C.row(2) = D1.row(n - 1);
  // Orthonormal complement of the constraint rows.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  const Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd N = Qfull.rightCols(n - 3);

  const double sk = std::sqrt(k);
  auto residual = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const Eigen::ArrayXd qz = (D1 * q).array();
    const Eigen::ArrayXd rz = (D1 * r).array();
    const Eigen::ArrayXd d = qz - rz;
    const Eigen::ArrayXd common =
        (2.0 * k / eps) * qz * d + d.square() / (eps * eps) - 2.0 * sk * qz - d / (eps * sk);
    Eigen::VectorXd res(2 * n);
    res.head(n) = sw.cwiseProduct(D2 * q + common.matrix());
    res.tail(n) = sw.cwiseProduct(D2 * r + common.matrix());
    if (jac != nullptr) {
      const Eigen::ArrayXd A =
          (2.0 * k / eps) * (qz + d) + 2.0 * d / (eps * eps) - 2.0 * sk - 1.0 / (eps * sk);
      const Eigen::ArrayXd B = -(2.0 * k / eps) * qz - 2.0 * d / (eps * eps) + 1.0 / (eps * sk);
      const Eigen::MatrixXd AD1 = A.matrix().asDiagonal() * D1;
      const Eigen::MatrixXd BD1 = B.matrix().asDiagonal() * D1;
      Eigen::MatrixXd full(2 * n, 2 * n);
      full << D2 + AD1, BD1, AD1, D2 + BD1;
      Eigen::VectorXd sw2(2 * n);
      sw2 << sw, sw;
      full = sw2.asDiagonal() * full;
      jac->resize(2 * n, 2 * (n - 3));
      jac->leftCols(n - 3) = full.leftCols(n) * N;
      jac->rightCols(n - 3) = full.rightCols(n) * N;
    }
    return res;
  };

  Eigen::VectorXd q = q_start;
  Eigen::VectorXd r = r_start;
  Eigen::MatrixXd jac;
  Eigen::VectorXd res = residual(q, r, &jac);
  double J = res.squaredNorm();
  double mu = 1e-3;
  int it = 0;
  const int m = 2 * (n - 3);
  bool stalled = false;
  for (; it < max_iters && !stalled; ++it) {
    const Eigen::VectorXd grad = jac.transpose() * res;
    if (grad.norm() <= 1e-13 * (1.0 + J)) break;
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      const Eigen::VectorXd colscale = jac.colwise().norm().transpose().cwiseMax(1e-300);
      Eigen::MatrixXd aug(2 * n + m, m);
      aug.topRows(2 * n) = jac;
      aug.bottomRows(m) = (std::sqrt(mu) * colscale).asDiagonal();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n + m);
      rhs.head(2 * n) = -res;
      const Eigen::VectorXd step = aug.colPivHouseholderQr().solve(rhs);
      const Eigen::VectorXd qn = q + N * step.head(n - 3);
      const Eigen::VectorXd rn = r + N * step.tail(n - 3);
      Eigen::MatrixXd jn;
      const Eigen::VectorXd resn = residual(qn, rn, &jn);
      const double Jn = resn.squaredNorm();
      if (Jn < J) {
        accepted = true;
        const double drop = (J - Jn) / J;
        q = qn;
        r = rn;
        res = resn;
        jac = jn;
        J = Jn;
        mu = std::max(mu / 3.0, 1e-12);
        stalled = drop < 1e-15;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;
  }
  return {q, r, J, it};
}

}  // namespace oracle
