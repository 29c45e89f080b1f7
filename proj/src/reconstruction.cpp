#include "convisc/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace convisc {

Field recover_p(const FieldPair& fp) {
  return Field(fp.grid(), (fp.q.values() - fp.r.values()) / fp.epsilon);
}

Field sigma_of_k(const Field& p, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("sigma_of_k: k must be > 0");
  const auto ops = operators_for(p.grid());
  const Eigen::ArrayXd pz = ops->diff1(p.values()).array();
  const Eigen::ArrayXd pzz = ops->diff2(p.values()).array();
  const Eigen::ArrayXd s = pzz + k * pz.square() - 2.0 * std::sqrt(k) * pz + 1.0;
  return Field(p.grid(), s.matrix());
}

Field sigma_average(const std::vector<Field>& family, const KGrid& kg) {
  if (static_cast<int>(family.size()) != kg.size()) {
    throw std::invalid_argument("sigma_average: family has " + std::to_string(family.size()) +
                                " members but the k-grid has " + std::to_string(kg.size()));
  }
  const Grid1D& grid = family.front().grid();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(grid.size());
  const double dk = kg.step();
  for (int i = 0; i < kg.size(); ++i) {
    require_same_grid(family[i], family.front(), "sigma_average");
    const double w = (i == 0 || i == kg.size() - 1) ? 0.5 * dk : dk;
    acc += w * family[i].values();
  }
  return Field(grid, acc / (kg.k_max() - kg.k_min()));
}

Field sigma_spread(const std::vector<Field>& family, const Field& average) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(average.size());
  for (const auto& f : family) {
    require_same_grid(f, average, "sigma_spread");
    s = s.cwiseMax((f.values() - average.values()).cwiseAbs());
  }
  return Field(average.grid(), std::move(s));
}

void finish_reconstruction(InversionResult& result) {
  result.sigma_per_k.clear();
  for (const auto& m : result.minimizers) {
    result.sigma_per_k.push_back(sigma_of_k(recover_p(m), m.k));
  }
  result.sigma_comp = sigma_average(result.sigma_per_k, result.k_grid);
  result.spread = sigma_spread(result.sigma_per_k, result.sigma_comp);
  result.below_one.assign(result.sigma_comp.size(), 0);
  for (int i = 0; i < result.sigma_comp.size(); ++i) {
    result.below_one[i] = result.sigma_comp[i] < 1.0 ? 1 : 0;
  }
}

double l2_norm(const Field& a) {
  const auto ops = operators_for(a.grid());
  return std::sqrt(ops->quad(a.values().cwiseAbs2()));
}

double l2_distance(const Field& a, const Field& b) {
  require_same_grid(a, b, "l2_distance");
  return l2_norm(a - b);
}

namespace {

double pair_distance(const GridOperators& ops, const FieldPair& a, const Field& q, const Field& r) {
  const Eigen::VectorXd dq = a.q.values() - q.values();
  const Eigen::VectorXd dr = a.r.values() - r.values();
  return std::sqrt(std::max(0.0, ops.h2_inner(dq, dq))) +
         std::sqrt(std::max(0.0, ops.h2_inner(dr, dr)));
}

}  // namespace

ErrorReport error_metrics(const InversionResult& result, const ConductivityProfile& truth,
                          const ChainFamily& truth_chain) {
  require_same_grid(result.sigma_comp, truth.values(), "error_metrics");
  if (!(truth_chain.k_grid == result.k_grid)) {
    throw std::invalid_argument("error_metrics: truth chain uses a different k-grid");
  }
  const int nk = result.k_grid.size();
  const auto ops = operators_for(result.sigma_comp.grid());
  ErrorReport rep;
  for (int i = 0; i < nk; ++i) {
    const Field& qs = truth_chain.q[i];
    const Field& rs = truth_chain.r[i];
    require_same_grid(qs, result.minimizers[i].q, "error_metrics");
    rep.q_error.push_back(h2_norm(result.minimizers[i].q - qs));
    rep.r_error.push_back(h2_norm(result.minimizers[i].r - rs));

    const DescentHistory& h = result.histories[i];
    rep.curve_iterations.push_back(h.snapshot_iterations);
    std::vector<double> curve;
    curve.reserve(h.snapshots.size());
    for (const auto& s : h.snapshots) curve.push_back(pair_distance(*ops, s, qs, rs));
    rep.field_error_curves.push_back(std::move(curve));
  }
  rep.sigma_l2 = l2_distance(result.sigma_comp, truth.values());
  rep.sigma_rel_l2 = rep.sigma_l2 / l2_norm(truth.values());
  rep.max_spread = result.spread.values().maxCoeff();

  // Common iteration axis: the longest snapshot list.
  std::size_t longest = 0;
  for (int i = 1; i < nk; ++i) {
    if (result.histories[i].snapshot_iterations.size() >
        result.histories[longest].snapshot_iterations.size()) {
      longest = i;
    }
  }
  for (int n : result.histories[longest].snapshot_iterations) {
    std::vector<Field> family;
    family.reserve(nk);
    for (int i = 0; i < nk; ++i) {
      const DescentHistory& h = result.histories[i];
      const auto it = std::upper_bound(h.snapshot_iterations.begin(), h.snapshot_iterations.end(), n);
      const std::size_t j = it == h.snapshot_iterations.begin()
                                ? 0
                                : static_cast<std::size_t>(it - h.snapshot_iterations.begin()) - 1;
      const FieldPair& s = h.snapshots[j];
      family.push_back(sigma_of_k(recover_p(s), s.k));
    }
    rep.sigma_curve_iterations.push_back(n);
    rep.sigma_error_curve.push_back(l2_distance(sigma_average(family, result.k_grid), truth.values()));
  }
  return rep;
}

}  // namespace convisc
