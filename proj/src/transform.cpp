#include "convisc/transform.hpp"

#include "convisc/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <string>

namespace convisc {

FieldPair::FieldPair(Field q_, Field r_, double k_, double epsilon_)
    : q(std::move(q_)), r(std::move(r_)), k(k_), epsilon(epsilon_) {
  require_same_grid(q, r, "FieldPair");
  if (!(epsilon > 0.0)) throw std::invalid_argument("FieldPair: epsilon must be > 0");
  if (!(k > 0.0)) throw std::invalid_argument("FieldPair: k must be > 0");
}

FieldPair FieldPair::operator+(const FieldPair& o) const { return {q + o.q, r + o.r, k, epsilon}; }
FieldPair FieldPair::operator-(const FieldPair& o) const { return {q - o.q, r - o.r, k, epsilon}; }
FieldPair FieldPair::operator*(double s) const { return {q * s, r * s, k, epsilon}; }

double pair_inner(const FieldPair& a, const FieldPair& b) {
  return h2_inner(a.q, b.q) + h2_inner(a.r, b.r);
}

double pair_norm(const FieldPair& a) { return std::sqrt(std::max(0.0, pair_inner(a, a))); }

double ball_norm(const FieldPair& a) { return h2_norm(a.q) + h2_norm(a.r); }

BoundaryMode parse_boundary_mode(std::string_view name) {
  if (name == "paper-literal") return BoundaryMode::paper_literal;
  if (name == "forward-consistent") return BoundaryMode::forward_consistent;
  throw std::invalid_argument("unknown boundary mode '" + std::string(name) +
                              "' (expected paper-literal or forward-consistent)");
}

std::string_view to_string(BoundaryMode mode) {
  return mode == BoundaryMode::paper_literal ? "paper-literal" : "forward-consistent";
}

double start_slope(const Eigen::VectorXd& v, double spacing) {
  return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * spacing);
}

double end_slope(const Eigen::VectorXd& v, double spacing) {
  const Eigen::Index n = v.size();
  return (v[n - 3] - 4.0 * v[n - 2] + 3.0 * v[n - 1]) / (2.0 * spacing);
}

namespace {

struct Traces {
  double value0;
  double slope0;
  double slopeZ;
};

Traces traces(const Field& f) {
  const double h = f.grid().spacing();
  return {f.values()[0], start_slope(f.values(), h), end_slope(f.values(), h)};
}

}  // namespace

BoundarySet traces_of(const FieldPair& fp, BoundaryMode mode) {
  const Traces tq = traces(fp.q);
  const Traces tr = traces(fp.r);
  return {tq.value0, tq.slope0, tq.slopeZ, tr.value0, tr.slope0, tr.slopeZ, mode};
}

Field compute_p(const Field& w, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("compute_p: k must be > 0");
  Eigen::VectorXd p(w.size());
  for (int i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) {
      throw PhysicalityError("compute_p: w <= 0 at node " + std::to_string(i));
    }
    p[i] = std::log(w[i]) / k;
  }
  return Field(w.grid(), std::move(p));
}

std::vector<Field> compute_q(const std::vector<Field>& p_per_k, const KGrid& kg) {
  if (static_cast<int>(p_per_k.size()) != kg.size()) {
    throw std::invalid_argument("compute_q: need one p field per k sample (" +
                                std::to_string(kg.size()) + "), got " +
                                std::to_string(p_per_k.size()));
  }
  const Grid1D& grid = p_per_k.front().grid();
  for (const auto& p : p_per_k) require_same_grid(p, p_per_k.front(), "compute_q");
  const int nk = kg.size();
  const double dk = kg.step();

  std::vector<Eigen::VectorXd> q(nk, Eigen::VectorXd(grid.size()));
  const auto& P = [&](int i) -> const Eigen::VectorXd& { return p_per_k[i].values(); };
  q[0] = (-3.0 * P(0) + 4.0 * P(1) - P(2)) / (2.0 * dk);
  for (int i = 1; i < nk - 1; ++i) q[i] = (P(i + 1) - P(i - 1)) / (2.0 * dk);
  q[nk - 1] = (P(nk - 3) - 4.0 * P(nk - 2) + 3.0 * P(nk - 1)) / (2.0 * dk);

  std::vector<Field> out;
  out.reserve(nk);
  for (auto& v : q) out.emplace_back(grid, std::move(v));
  return out;
}

Field compute_r(const Field& q, const Field& p, double epsilon) {
  require_same_grid(q, p, "compute_r");
  if (!(epsilon > 0.0)) throw std::invalid_argument("compute_r: epsilon must be > 0");
  return Field(q.grid(), q.values() - epsilon * p.values());
}

FieldPair ChainFamily::pair(int k_index) const {
  return FieldPair(q.at(k_index), r.at(k_index), k_grid.value(k_index), epsilon);
}

ChainFamily build_chain(const std::vector<ForwardSlice>& slices, const KGrid& kg,
                        double epsilon) {
  ChainFamily chain{kg, epsilon, {}, {}, {}};
  chain.p.reserve(slices.size());
  for (const auto& s : slices) chain.p.push_back(compute_p(s.w, s.k));
  chain.q = compute_q(chain.p, kg);
  chain.r.reserve(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    chain.r.push_back(compute_r(chain.q[i], chain.p[i], epsilon));
  }
  return chain;
}

BoundarySet boundary_from_data(const DataG& data, double k, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("boundary_from_data: epsilon must be > 0");
  const auto idx = data.k_grid.index_of(k);
  if (!idx) {
    throw std::invalid_argument("boundary_from_data: k = " + std::to_string(k) +
                                " is not on the data k-grid");
  }
  const double g = data.g[*idx];
  const double gp = data.g_prime[*idx];
  const double sk = std::sqrt(k);
  const double k32 = k * sk;
  const double k52 = k * k * sk;
  BoundarySet b;
  b.mode = BoundaryMode::paper_literal;
  b.q0 = 0.0;
  b.qz0 = 2.0 * sk * gp + g / sk - 6.0 / k52;
  b.qzZ = 0.0;
  b.r0 = -epsilon;
  b.rz0 = 2.0 * sk * (gp - epsilon * g) + g / sk - 6.0 / k52 - 4.0 * epsilon / k32;
  b.rzZ = 0.0;
  return b;
}

BoundarySet boundary_from_chain(const ChainFamily& chain, int k_index, const DataG* measured,
                                const DataG* clean) {
  BoundarySet b = traces_of(chain.pair(k_index), BoundaryMode::forward_consistent);
  if (measured != nullptr && clean != nullptr) {
    const double k = chain.k_grid.value(k_index);
    const BoundarySet noisy = boundary_from_data(*measured, k, chain.epsilon);
    const BoundarySet exact = boundary_from_data(*clean, k, chain.epsilon);
    b.qz0 += noisy.qz0 - exact.qz0;
    b.rz0 += noisy.rz0 - exact.rz0;
  }
  return b;
}

Field build_lift_component(const Grid1D& grid, double value0, double slope0, double slopeZ) {
  const auto ops = operators_for(grid);
  const int n = grid.size();
  const double zmax = grid.z_max();

  // Monomials in s = z/Z keep the cubic well scaled for any Z.
  auto monomial = [&](int power) {
    return Field::sample(grid, [&](double z) { return std::pow(z / zmax, power); }).values();
  };
  const Eigen::VectorXd m1 = monomial(1);
  const Eigen::VectorXd m2 = monomial(2);
  const Eigen::VectorXd m3 = monomial(3);
  auto start_slope = [&](const Eigen::VectorXd& f) { return ops->d1().row(0).dot(f); };
  auto end_slope = [&](const Eigen::VectorXd& f) { return ops->d1().row(n - 1).dot(f); };

  // Constraint rows over (b, c, d) for b s + c s^2 + d s^3.
  const Eigen::Vector3d row0(start_slope(m1), start_slope(m2), start_slope(m3));
  const Eigen::Vector3d rowZ(end_slope(m1), end_slope(m2), end_slope(m3));

  // Particular solution with d = 0.
  Eigen::Matrix2d a;
  a << row0[0], row0[1], rowZ[0], rowZ[1];
  const Eigen::Vector2d bc = a.fullPivLu().solve(Eigen::Vector2d(slope0, slopeZ));
  Eigen::VectorXd particular = Eigen::VectorXd::Constant(n, value0) + bc[0] * m1 + bc[1] * m2;

  const Eigen::Vector3d null = row0.cross(rowZ);
  Eigen::VectorXd homogeneous = null[0] * m1 + null[1] * m2 + null[2] * m3;
  const double nn = ops->h2_inner(homogeneous, homogeneous);
  if (nn > 0.0) particular -= (ops->h2_inner(particular, homogeneous) / nn) * homogeneous;
  particular[0] = value0;
  return Field(grid, std::move(particular));
}

LiftPair build_lift(const BoundarySet& b, const Grid1D& grid) {
  return {build_lift_component(grid, b.q0, b.qz0, b.qzZ),
          build_lift_component(grid, b.r0, b.rz0, b.rzZ)};
}

}  // namespace convisc
