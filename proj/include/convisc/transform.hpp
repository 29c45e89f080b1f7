#pragma once

#include "convisc/forward.hpp"
#include "convisc/grid.hpp"

#include <string_view>
#include <vector>

namespace convisc {

/// The unknowns for one frequency: q = dp/dk and r = q - epsilon p.
struct FieldPair {
  Field q;
  Field r;
  double k;
  double epsilon;

  FieldPair(Field q, Field r, double k, double epsilon);

  const Grid1D& grid() const noexcept { return q.grid(); }

  FieldPair operator+(const FieldPair& other) const;
  FieldPair operator-(const FieldPair& other) const;
  FieldPair operator*(double s) const;
};

/// Inner product and norms in H^2 x H^2.
double pair_inner(const FieldPair& a, const FieldPair& b);
double pair_norm(const FieldPair& a);
/// ||q||_{H^2} + ||r||_{H^2}, the quantity bounded by R in the correctness set.
double ball_norm(const FieldPair& a);

enum class BoundaryMode { paper_literal, forward_consistent };

BoundaryMode parse_boundary_mode(std::string_view name);
std::string_view to_string(BoundaryMode mode);

/// The six boundary values for one frequency: q(0), q_z(0), q_z(Z), r(0),
/// r_z(0), r_z(Z).
struct BoundarySet {
  double q0 = 0.0;
  double qz0 = 0.0;
  double qzZ = 0.0;
  double r0 = 0.0;
  double rz0 = 0.0;
  double rzZ = 0.0;
  BoundaryMode mode = BoundaryMode::forward_consistent;
};

/// One-sided second-order slopes at the two ends of nodal values v.
double start_slope(const Eigen::VectorXd& v, double spacing);
double end_slope(const Eigen::VectorXd& v, double spacing);

/// Discrete traces (value at 0, one-sided slopes at 0 and Z) of a pair.
BoundarySet traces_of(const FieldPair& fp, BoundaryMode mode = BoundaryMode::forward_consistent);

Field compute_p(const Field& w, double k);
/// dp/dk on the k-grid, node by node in z.
std::vector<Field> compute_q(const std::vector<Field>& p_per_k, const KGrid& kg);
Field compute_r(const Field& q, const Field& p, double epsilon);

/// p, q, r for every frequency of a forward family.
struct ChainFamily {
  KGrid k_grid;
  double epsilon;
  std::vector<Field> p;
  std::vector<Field> q;
  std::vector<Field> r;

  FieldPair pair(int k_index) const;
};

ChainFamily build_chain(const std::vector<ForwardSlice>& slices, const KGrid& kg, double epsilon);

/// Boundary values evaluated verbatim from g and g' (paper-literal mode).
BoundarySet boundary_from_data(const DataG& data, double k, double epsilon);

/// Boundary values traced from the chain fields at k (forward-consistent
/// mode). When `measured` and `clean` data are both given, the entries that
/// depend on g are shifted by the same amount the data perturbation shifts
/// their literal-mode formulas.
BoundarySet boundary_from_chain(const ChainFamily& chain, int k_index,
                                const DataG* measured = nullptr, const DataG* clean = nullptr);

/// Lift pair satisfying a boundary set.
struct LiftPair {
  Field F1;
  Field F2;
};

/// Minimal-H^2-norm cubic per component matching the discrete traces.
Field build_lift_component(const Grid1D& grid, double value0, double slope0, double slopeZ);
LiftPair build_lift(const BoundarySet& b, const Grid1D& grid);

}  // namespace convisc
