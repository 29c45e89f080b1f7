#include "convisc/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace convisc {

Grid1D::Grid1D(double z_max, int n_nodes) : z_max_(z_max), n_nodes_(n_nodes), spacing_(0.0) {
  if (!(z_max > 0.0) || !std::isfinite(z_max)) {
    throw std::invalid_argument("Grid1D: z_max must be positive and finite, got " +
                                std::to_string(z_max));
  }
  if (n_nodes < 5) {
    throw std::invalid_argument("Grid1D: need at least 5 nodes, got " + std::to_string(n_nodes));
  }
  spacing_ = z_max / (n_nodes - 1);
}

double Grid1D::node(int i) const noexcept {
  if (i == n_nodes_ - 1) return z_max_;
  return i * spacing_;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> out(n_nodes_);
  for (int i = 0; i < n_nodes_; ++i) out[i] = node(i);
  return out;
}

Grid1D make_grid(double z_max, int n_nodes) { return Grid1D(z_max, n_nodes); }

KGrid::KGrid(double k_min, double k_max, int n_k) : k_min_(k_min), k_max_(k_max), n_k_(n_k), step_(0.0) {
  if (!(k_min > 0.0) || !(k_max > k_min) || !std::isfinite(k_max)) {
    throw std::invalid_argument("KGrid: need 0 < k_min < k_max");
  }
  if (n_k < 3) throw std::invalid_argument("KGrid: need at least 3 frequencies");
  step_ = (k_max - k_min) / (n_k - 1);
}

double KGrid::value(int i) const noexcept {
  if (i == n_k_ - 1) return k_max_;
  return k_min_ + i * step_;
}

std::vector<double> KGrid::values() const {
  std::vector<double> out(n_k_);
  for (int i = 0; i < n_k_; ++i) out[i] = value(i);
  return out;
}

std::optional<int> KGrid::index_of(double k) const noexcept {
  const double pos = (k - k_min_) / step_;
  const long idx = std::lround(pos);
  if (idx < 0 || idx >= n_k_) return std::nullopt;
  const double kv = value(static_cast<int>(idx));
  if (std::abs(kv - k) > 1e-12 * std::max(1.0, std::abs(k))) return std::nullopt;
  return static_cast<int>(idx);
}

Field::Field(Grid1D grid, Eigen::VectorXd values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("Field: got " + std::to_string(values_.size()) +
                                " values for a grid of " + std::to_string(grid_.size()) + " nodes");
  }
  if (!values_.allFinite()) throw std::invalid_argument("Field: non-finite value");
}

Field Field::zeros(const Grid1D& grid) { return Field(grid, Eigen::VectorXd::Zero(grid.size())); }

Field Field::constant(const Grid1D& grid, double c) {
  return Field(grid, Eigen::VectorXd::Constant(grid.size(), c));
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument(std::string(where) + ": fields live on different grids");
  }
}

Field Field::operator+(const Field& other) const {
  require_same_grid(*this, other, "Field::operator+");
  return Field(grid_, values_ + other.values_);
}

Field Field::operator-(const Field& other) const {
  require_same_grid(*this, other, "Field::operator-");
  return Field(grid_, values_ - other.values_);
}

Field Field::operator*(double s) const { return Field(grid_, values_ * s); }

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix build_d1(int n, double h) {
  std::vector<Triplet> t;
  t.reserve(2 * n + 2);
  const double c = 1.0 / (2.0 * h);
  t.emplace_back(0, 0, -3.0 * c);
  t.emplace_back(0, 1, 4.0 * c);
  t.emplace_back(0, 2, -1.0 * c);
  for (int i = 1; i < n - 1; ++i) {
    t.emplace_back(i, i - 1, -c);
    t.emplace_back(i, i + 1, c);
  }
  t.emplace_back(n - 1, n - 3, 1.0 * c);
  t.emplace_back(n - 1, n - 2, -4.0 * c);
  t.emplace_back(n - 1, n - 1, 3.0 * c);
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix build_d2(int n, double h) {
  std::vector<Triplet> t;
  t.reserve(3 * n + 2);
  const double c = 1.0 / (h * h);
  t.emplace_back(0, 0, 2.0 * c);
  t.emplace_back(0, 1, -5.0 * c);
  t.emplace_back(0, 2, 4.0 * c);
  t.emplace_back(0, 3, -1.0 * c);
  for (int i = 1; i < n - 1; ++i) {
    t.emplace_back(i, i - 1, c);
    t.emplace_back(i, i, -2.0 * c);
    t.emplace_back(i, i + 1, c);
  }
  t.emplace_back(n - 1, n - 4, -1.0 * c);
  t.emplace_back(n - 1, n - 3, 4.0 * c);
  t.emplace_back(n - 1, n - 2, -5.0 * c);
  t.emplace_back(n - 1, n - 1, 2.0 * c);
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

GridOperators::GridOperators(const Grid1D& grid)
    : grid_(grid),
      d1_(build_d1(grid.size(), grid.spacing())),
      d2_(build_d2(grid.size(), grid.spacing())),
      weights_(Eigen::VectorXd::Constant(grid.size(), grid.spacing())) {
  weights_[0] *= 0.5;
  weights_[grid.size() - 1] *= 0.5;

  SparseMatrix w(grid.size(), grid.size());
  w.reserve(Eigen::VectorXi::Constant(grid.size(), 1));
  for (int i = 0; i < grid.size(); ++i) w.insert(i, i) = weights_[i];
  SparseMatrix d1t = d1_.transpose();
  SparseMatrix d2t = d2_.transpose();
  gram_h2_ = w + SparseMatrix(d1t * w * d1_) + SparseMatrix(d2t * w * d2_);
}

double GridOperators::h2_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  return f.dot(gram_h2_ * g);
}

std::shared_ptr<const GridOperators> operators_for(const Grid1D& grid) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, std::shared_ptr<const GridOperators>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(grid.z_max(), grid.size());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto ops = std::make_shared<const GridOperators>(grid);
  cache.emplace(key, ops);
  return ops;
}

Field diff1(const Field& f) { return Field(f.grid(), operators_for(f.grid())->diff1(f.values())); }

Field diff2(const Field& f) { return Field(f.grid(), operators_for(f.grid())->diff2(f.values())); }

double quad_weighted(const Field& f, const Field& w) {
  require_same_grid(f, w, "quad_weighted");
  return operators_for(f.grid())->quad(f.values().cwiseProduct(w.values()));
}

double h2_inner(const Field& f, const Field& g) {
  require_same_grid(f, g, "h2_inner");
  return operators_for(f.grid())->h2_inner(f.values(), g.values());
}

double h2_norm(const Field& f) { return std::sqrt(std::max(0.0, h2_inner(f, f))); }

std::vector<double> differentiate_in_k(std::span<const double> values, const KGrid& kg) {
  const int n = kg.size();
  if (static_cast<int>(values.size()) != n) {
    throw std::invalid_argument("differentiate_in_k: length does not match the k-grid");
  }
  const double dk = kg.step();
  std::vector<double> out(n);
  out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dk);
  for (int i = 1; i < n - 1; ++i) out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dk);
  out[n - 1] = (values[n - 3] - 4.0 * values[n - 2] + 3.0 * values[n - 1]) / (2.0 * dk);
  return out;
}

RieszMap::RieszMap(std::shared_ptr<const GridOperators> ops, ConstraintSet constraints,
                   Metric metric)
    : ops_(std::move(ops)), constraints_(constraints) {
  const int n = ops_->grid().size();
  std::vector<bool> eliminated(n, false);
  if (constraints_.value_at_start) eliminated[0] = true;
  if (constraints_.slope_at_start) eliminated[2] = true;
  if (constraints_.slope_at_end) eliminated[n - 1] = true;

  std::vector<int> column(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!eliminated[i]) {
      column[i] = static_cast<int>(free_nodes_.size());
      free_nodes_.push_back(i);
    }
  }
  const int m = static_cast<int>(free_nodes_.size());

  // Each row of P as a dense coefficient vector over the free columns; rows
  // for eliminated nodes are combinations of rows built before them.
  std::vector<Eigen::VectorXd> rows(n, Eigen::VectorXd::Zero(m));
  for (int i = 0; i < n; ++i) {
    if (column[i] >= 0) rows[i][column[i]] = 1.0;
  }
  // -3u0 + 4u1 - u2 = 0
  if (constraints_.slope_at_start) rows[2] = 4.0 * rows[1] - 3.0 * rows[0];
  // u_{n-3} - 4u_{n-2} + 3u_{n-1} = 0
  if (constraints_.slope_at_end) rows[n - 1] = (4.0 * rows[n - 2] - rows[n - 3]) / 3.0;

  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (rows[i][j] != 0.0) t.emplace_back(i, j, rows[i][j]);
    }
  }
  basis_.resize(n, m);
  basis_.setFromTriplets(t.begin(), t.end());

  if (metric == Metric::h2) {
    gram_ = ops_->h2_gram();
  } else {
    gram_.resize(n, n);
    for (int i = 0; i < n; ++i) gram_.insert(i, i) = ops_->weights()[i];
  }
  SparseMatrix pt = basis_.transpose();
  SparseMatrix reduced = pt * gram_ * basis_;
  solver_.compute(reduced);
  if (solver_.info() != Eigen::Success) {
    throw std::runtime_error("RieszMap: Gram system is not positive definite");
  }
}

Eigen::VectorXd RieszMap::from_load(const Eigen::VectorXd& load) const {
  Eigen::VectorXd rhs = basis_.transpose() * load;
  Eigen::VectorXd y = solver_.solve(rhs);
  return basis_ * y;
}

Eigen::VectorXd RieszMap::from_density(const Eigen::VectorXd& density) const {
  return from_load(ops_->weights().cwiseProduct(density));
}

Eigen::VectorXd RieszMap::constrain(const Eigen::VectorXd& u) const {
  Eigen::VectorXd y(free_nodes_.size());
  for (std::size_t j = 0; j < free_nodes_.size(); ++j) y[j] = u[free_nodes_[j]];
  return basis_ * y;
}

double RieszMap::violation(const Eigen::VectorXd& u) const {
  const int n = static_cast<int>(u.size());
  double worst = 0.0;
  if (constraints_.value_at_start) worst = std::max(worst, std::abs(u[0]));
  if (constraints_.slope_at_start) worst = std::max(worst, std::abs(-3.0 * u[0] + 4.0 * u[1] - u[2]));
  if (constraints_.slope_at_end) {
    worst = std::max(worst, std::abs(u[n - 3] - 4.0 * u[n - 2] + 3.0 * u[n - 1]));
  }
  return worst;
}

Field riesz_h2(const Field& l2_grad, ConstraintSet constraints) {
  RieszMap map(operators_for(l2_grad.grid()), constraints, Metric::h2);
  return Field(l2_grad.grid(), map.from_density(l2_grad.values()));
}

double uniform_symmetric(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

double standard_normal(std::mt19937_64& rng) {
  double u1 = 0.0;
  do {
    u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd random_constrained_field(const RieszMap& space, std::mt19937_64& rng, int n_modes) {
  const Grid1D& grid = space.operators().grid();
  const double zmax = grid.z_max();
  const ConstraintSet c = space.constraints();

  std::vector<double> amp(n_modes);
  for (int m = 0; m < n_modes; ++m) amp[m] = standard_normal(rng) / ((m + 1.0) * (m + 1.0));
  const double a0 = c.value_at_start ? 0.0 : standard_normal(rng);
  const double a1 = c.slope_at_start ? 0.0 : standard_normal(rng);
  const double a2 = c.slope_at_end ? 0.0 : standard_normal(rng);
  const double a3 = c.slope_at_end ? 0.0 : standard_normal(rng);

  Eigen::VectorXd u(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double s = grid.node(i) / zmax;
    // 1 - cos(m pi s) has zero value and slope at 0 and zero slope at 1.
    double v = a0 + a1 * s + a2 * s * s + a3 * s * s * s;
    for (int m = 0; m < n_modes; ++m) v += amp[m] * (1.0 - std::cos((m + 1) * std::numbers::pi * s));
    u[i] = v;
  }
  u = space.constrain(u);
  const double norm = std::sqrt(space.operators().h2_inner(u, u));
  if (norm > 0.0) u /= norm;
  return u;
}

}  // namespace convisc
