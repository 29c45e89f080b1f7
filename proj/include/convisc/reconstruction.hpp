#pragma once

#include "convisc/forward.hpp"
#include "convisc/functional.hpp"
#include "convisc/optimizer.hpp"
#include "convisc/transform.hpp"

#include <vector>

namespace convisc {

/// p = (q - r) / epsilon.
Field recover_p(const FieldPair& fp);

/// sigma = p_zz + k p_z^2 - 2 sqrt(k) p_z + 1, nodewise.
Field sigma_of_k(const Field& p, double k);

/// Trapezoid average over the k-grid, divided by k_max - k_min.
Field sigma_average(const std::vector<Field>& family, const KGrid& kg);

/// Nodewise max over k of |sigma_k - average|.
Field sigma_spread(const std::vector<Field>& family, const Field& average);

struct InversionResult {
  KGrid k_grid;
  Field sigma_comp;
  std::vector<Field> sigma_per_k;
  std::vector<FieldPair> minimizers;
  std::vector<DescentHistory> histories;
  std::vector<BoundarySet> boundaries;
  FunctionalParams params;
  double data_noise = 0.0;
  Field spread;
  /// One flag per node: sigma_comp < 1 there.
  std::vector<char> below_one;
};

/// Assemble sigma_per_k, sigma_comp, spread and the below-one flags from the
/// per-k minimizers.
void finish_reconstruction(InversionResult& result);

struct ErrorReport {
  std::vector<double> q_error;  ///< ||q_min - q*||_{H^2} per k
  std::vector<double> r_error;  ///< ||r_min - r*||_{H^2} per k
  double sigma_l2 = 0.0;
  double sigma_rel_l2 = 0.0;
  double max_spread = 0.0;
  /// Per k: iterations of the stored snapshots and ||q_n - q*|| + ||r_n - r*||.
  std::vector<std::vector<int>> curve_iterations;
  std::vector<std::vector<double>> field_error_curves;
  /// sigma_comp error assembled from the snapshots of every k at common
  /// iteration counts (runs that stopped early contribute their final state).
  std::vector<int> sigma_curve_iterations;
  std::vector<double> sigma_error_curve;
};

/// Relative discrete L2 norm ||a - b|| / ||b|| with trapezoid weights.
double l2_distance(const Field& a, const Field& b);
double l2_norm(const Field& a);

ErrorReport error_metrics(const InversionResult& result, const ConductivityProfile& truth,
                          const ChainFamily& truth_chain);

}  // namespace convisc
