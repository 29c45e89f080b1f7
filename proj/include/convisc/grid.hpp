#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace convisc {

/// Uniform grid on [0, z_max]. Node 0 is exactly 0 and the last node is
/// exactly z_max.
class Grid1D {
 public:
  Grid1D(double z_max, int n_nodes);

  double z_max() const noexcept { return z_max_; }
  int size() const noexcept { return n_nodes_; }
  double spacing() const noexcept { return spacing_; }
  double node(int i) const noexcept;
  std::vector<double> nodes() const;

  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept {
    return a.z_max_ == b.z_max_ && a.n_nodes_ == b.n_nodes_;
  }

 private:
  double z_max_;
  int n_nodes_;
  double spacing_;
};

Grid1D make_grid(double z_max, int n_nodes);

/// Uniform frequency grid on [k_min, k_max], at least three samples.
class KGrid {
 public:
  KGrid(double k_min, double k_max, int n_k);

  double k_min() const noexcept { return k_min_; }
  double k_max() const noexcept { return k_max_; }
  int size() const noexcept { return n_k_; }
  double step() const noexcept { return step_; }
  double value(int i) const noexcept;
  std::vector<double> values() const;

  /// Index of the sample equal to k (relative tolerance 1e-12), if any.
  std::optional<int> index_of(double k) const noexcept;

  friend bool operator==(const KGrid& a, const KGrid& b) noexcept {
    return a.k_min_ == b.k_min_ && a.k_max_ == b.k_max_ && a.n_k_ == b.n_k_;
  }

 private:
  double k_min_;
  double k_max_;
  int n_k_;
  double step_;
};

/// Nodal samples of a function on a Grid1D. Immutable once built.
class Field {
 public:
  Field(Grid1D grid, Eigen::VectorXd values);

  static Field zeros(const Grid1D& grid);
  static Field constant(const Grid1D& grid, double c);

  template <class Fn>
  static Field sample(const Grid1D& grid, Fn&& fn) {
    Eigen::VectorXd v(grid.size());
    for (int i = 0; i < grid.size(); ++i) v[i] = fn(grid.node(i));
    return Field(grid, std::move(v));
  }

  const Grid1D& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  int size() const noexcept { return grid_.size(); }
  double operator[](int i) const { return values_[i]; }
  double front() const { return values_[0]; }
  double back() const { return values_[values_.size() - 1]; }

  Field operator+(const Field& other) const;
  Field operator-(const Field& other) const;
  Field operator*(double s) const;
  friend Field operator*(double s, const Field& f) { return f * s; }

 private:
  Grid1D grid_;
  Eigen::VectorXd values_;
};

/// Throws std::invalid_argument unless both fields live on the same grid.
void require_same_grid(const Field& a, const Field& b, const char* where);

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Finite-difference and quadrature operators for one grid. Second-order
/// central stencils in the interior, second-order one-sided stencils at both
/// ends.
class GridOperators {
 public:
  explicit GridOperators(const Grid1D& grid);

  const Grid1D& grid() const noexcept { return grid_; }
  const SparseMatrix& d1() const noexcept { return d1_; }
  const SparseMatrix& d2() const noexcept { return d2_; }
  /// Trapezoid weights.
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  /// Discrete H^2 Gram matrix: W + D1'WD1 + D2'WD2.
  const SparseMatrix& h2_gram() const noexcept { return gram_h2_; }

  Eigen::VectorXd diff1(const Eigen::VectorXd& f) const { return d1_ * f; }
  Eigen::VectorXd diff2(const Eigen::VectorXd& f) const { return d2_ * f; }

  double quad(const Eigen::VectorXd& f) const { return weights_.dot(f); }
  double h2_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

 private:
  Grid1D grid_;
  SparseMatrix d1_;
  SparseMatrix d2_;
  Eigen::VectorXd weights_;
  SparseMatrix gram_h2_;
};

/// Shared, cached operators for a grid.
std::shared_ptr<const GridOperators> operators_for(const Grid1D& grid);

Field diff1(const Field& f);
Field diff2(const Field& f);

/// Trapezoid approximation of the integral of f*w over [0, z_max].
double quad_weighted(const Field& f, const Field& w);

/// Discrete H^2 inner product: integral of (fg + f'g' + f''g'').
double h2_inner(const Field& f, const Field& g);
double h2_norm(const Field& f);

/// Derivative on a KGrid: central differences inside, second-order one-sided
/// at the two ends.
std::vector<double> differentiate_in_k(std::span<const double> values, const KGrid& kg);

/// Homogeneous boundary constraints eliminated from a discrete space. The
/// slope constraints refer to the one-sided diff1 stencils at the ends.
struct ConstraintSet {
  bool value_at_start = true;
  bool slope_at_start = true;
  bool slope_at_end = true;

  /// u(0) = u'(0) = u'(Z) = 0, the space gradients live in.
  static constexpr ConstraintSet descent() { return {true, true, true}; }
  /// u(0) = u'(0) = 0.
  static constexpr ConstraintSet carleman() { return {true, true, false}; }
};

enum class Metric { h2, l2 };

/// Riesz representative on a constrained subspace. Constrained nodes are
/// eliminated through a basis matrix P (u = P y), so the Gram system
/// P'GP y = P'b stays symmetric positive definite.
class RieszMap {
 public:
  RieszMap(std::shared_ptr<const GridOperators> ops, ConstraintSet constraints,
           Metric metric = Metric::h2);

  const GridOperators& operators() const noexcept { return *ops_; }
  const SparseMatrix& basis() const noexcept { return basis_; }
  const ConstraintSet& constraints() const noexcept { return constraints_; }
  int free_dofs() const noexcept { return static_cast<int>(basis_.cols()); }

  /// Solve for u in the constrained space with <u, h> = load . h for every
  /// constrained h, where load is a nodal load vector.
  Eigen::VectorXd from_load(const Eigen::VectorXd& load) const;

  /// Same, for an L2 density rho: load = W rho.
  Eigen::VectorXd from_density(const Eigen::VectorXd& density) const;

  /// Keep the free nodal values of u, recompute the constrained ones.
  Eigen::VectorXd constrain(const Eigen::VectorXd& u) const;

  /// Largest absolute violation of the constraints by u.
  double violation(const Eigen::VectorXd& u) const;

  /// Gram matrix used by the map (H^2 or L2 mass).
  const SparseMatrix& gram() const noexcept { return gram_; }

 private:
  std::shared_ptr<const GridOperators> ops_;
  ConstraintSet constraints_;
  SparseMatrix basis_;
  std::vector<int> free_nodes_;
  SparseMatrix gram_;
  Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

/// Riesz representative of an L2 gradient density in the constrained H^2 space.
Field riesz_h2(const Field& l2_grad, ConstraintSet constraints = ConstraintSet::descent());

/// Smooth random field in the constrained space with unit H^2 norm.
Eigen::VectorXd random_constrained_field(const RieszMap& space, std::mt19937_64& rng,
                                         int n_modes = 6);

/// Uniform draw on [-1, 1] built from the raw generator output so the sequence
/// is identical across standard libraries.
double uniform_symmetric(std::mt19937_64& rng);
/// Standard normal draw (Box-Muller on uniform_symmetric-style draws).
double standard_normal(std::mt19937_64& rng);

}  // namespace convisc
