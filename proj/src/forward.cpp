#include "convisc/forward.hpp"

#include "convisc/errors.hpp"
#include "convisc/parallel.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace convisc {

ConductivityProfile::ConductivityProfile(Field values) : values_(std::move(values)) {
  const auto& v = values_.values();
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] < 1.0) {
      throw std::invalid_argument("ConductivityProfile: sigma < 1 at node " + std::to_string(i) +
                                  " (value " + std::to_string(v[i]) + ")");
    }
  }
  constexpr double tol = 1e-12;
  if (std::abs(values_.front() - 1.0) > tol || std::abs(values_.back() - 1.0) > tol) {
    throw std::invalid_argument("ConductivityProfile: sigma must equal 1 at z = 0 and z = Z");
  }
}

double end_taper(double z, double z_max, double width) {
  auto ramp = [](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double s = std::sin(0.5 * std::numbers::pi * x);
    return s * s;
  };
  return ramp(z / width) * ramp((z_max - z) / width);
}

ConductivityProfile flat_profile(const Grid1D& grid) {
  return ConductivityProfile(Field::constant(grid, 1.0));
}

ConductivityProfile bump_profile(const Grid1D& grid, double amplitude, double center,
                                 double width) {
  if (amplitude < 0.0) throw std::invalid_argument("bump_profile: amplitude must be >= 0");
  if (!(width > 0.0)) throw std::invalid_argument("bump_profile: width must be > 0");
  const double zmax = grid.z_max();
  const double taper_width = 0.1 * zmax;
  return ConductivityProfile(Field::sample(grid, [&](double z) {
    const double x = (z - center) / width;
    return 1.0 + amplitude * std::exp(-x * x) * end_taper(z, zmax, taper_width);
  }));
}

ConductivityProfile two_layer_profile(const Grid1D& grid, double depth, double contrast,
                                      double smoothness) {
  if (contrast < 0.0) throw std::invalid_argument("two_layer_profile: contrast must be >= 0");
  if (!(smoothness > 0.0)) throw std::invalid_argument("two_layer_profile: smoothness must be > 0");
  const double zmax = grid.z_max();
  const double taper_width = 0.1 * zmax;
  return ConductivityProfile(Field::sample(grid, [&](double z) {
    const double step = 0.5 * (1.0 + std::tanh((z - depth) / smoothness));
    return 1.0 + contrast * step * end_taper(z, zmax, taper_width);
  }));
}

ConductivityProfile tabulated_profile(const Grid1D& grid, std::span<const double> z,
                                      std::span<const double> sigma) {
  if (z.size() != sigma.size() || z.size() < 2) {
    throw std::invalid_argument("tabulated_profile: need at least two (z, sigma) pairs");
  }
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (!(z[i] > z[i - 1])) throw std::invalid_argument("tabulated_profile: z must increase");
  }
  return ConductivityProfile(Field::sample(grid, [&](double x) {
    if (x <= z.front()) return sigma.front();
    if (x >= z.back()) return sigma.back();
    const auto it = std::upper_bound(z.begin(), z.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - z.begin());
    const double t = (x - z[j - 1]) / (z[j] - z[j - 1]);
    return (1.0 - t) * sigma[j - 1] + t * sigma[j];
  }));
}

FundamentalValue fundamental_solution(double z, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("fundamental_solution: k must be > 0");
  const double sk = std::sqrt(k);
  const double value = std::exp(-sk * std::abs(z)) / (2.0 * sk);
  const double sign = z < 0.0 ? 1.0 : -1.0;
  return {value, sign * sk * value};
}

ForwardSlice solve_forward(const ConductivityProfile& sigma, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("solve_forward: k must be > 0");
  const Grid1D& grid = sigma.grid();
  const int n = grid.size();
  const double h = grid.spacing();
  const double sk = std::sqrt(k);
  const auto& s = sigma.values().values();

  Eigen::VectorXd u0(n);
  for (int i = 0; i < n; ++i) u0[i] = fundamental_solution(grid.node(i), k).value;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * n + 4);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const double c1 = 1.0 / (2.0 * h);
  // vs'(0) - sqrt(k) vs(0) = 0 with the one-sided diff1 stencil.
  t.emplace_back(0, 0, -3.0 * c1 - sk);
  t.emplace_back(0, 1, 4.0 * c1);
  t.emplace_back(0, 2, -1.0 * c1);
  const double c2 = 1.0 / (h * h);
  for (int i = 1; i < n - 1; ++i) {
    t.emplace_back(i, i - 1, c2);
    t.emplace_back(i, i, -2.0 * c2 - k * s[i]);
    t.emplace_back(i, i + 1, c2);
    rhs[i] = k * (s[i] - 1.0) * u0[i];
  }
  // vs'(Z) + sqrt(k) vs(Z) = 0.
  t.emplace_back(n - 1, n - 3, 1.0 * c1);
  t.emplace_back(n - 1, n - 2, -4.0 * c1);
  t.emplace_back(n - 1, n - 1, 3.0 * c1 + sk);

  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw SolverError("solve_forward: factorization failed at k = " + std::to_string(k));
  }
  Eigen::VectorXd vs = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !vs.allFinite()) {
    throw SolverError("solve_forward: solve failed at k = " + std::to_string(k));
  }

  Eigen::VectorXd v = u0 + vs;
  Eigen::VectorXd w(n);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) {
    w[i] = v[i] / u0[i];
    if (!(w[i] > 0.0)) {
      throw PhysicalityError("solve_forward: w <= 0 at node " + std::to_string(i) +
                             " for k = " + std::to_string(k) + "; refine the grid");
    }
    p[i] = std::log(w[i]) / k;
  }
  return ForwardSlice{k, Field(grid, std::move(vs)), Field(grid, std::move(v)),
                      Field(grid, std::move(w)), Field(grid, std::move(p))};
}

std::vector<ForwardSlice> solve_forward_family(const ConductivityProfile& sigma,
                                               const KGrid& kg, int threads) {
  std::vector<std::optional<ForwardSlice>> out(kg.size());
  parallel_for(kg.size(), threads, [&](int i) { out[i] = solve_forward(sigma, kg.value(i)); });
  std::vector<ForwardSlice> slices;
  slices.reserve(out.size());
  for (auto& s : out) slices.push_back(std::move(*s));
  return slices;
}

void DataG::validate() const {
  const auto n = static_cast<std::size_t>(k_grid.size());
  if (g.size() != n || g_prime.size() != n) {
    throw std::invalid_argument("DataG: value count does not match the k-grid");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g[i]) || !std::isfinite(g_prime[i])) {
      throw std::invalid_argument("DataG: non-finite value at k index " + std::to_string(i));
    }
  }
  if (!(noise_level >= 0.0 && noise_level < 1.0)) {
    throw std::invalid_argument("DataG: noise level outside [0, 1)");
  }
}

double boundary_flux(const ForwardSlice& slice) {
  const auto& vs = slice.v_scattered.values();
  const double h = slice.v_scattered.grid().spacing();
  const double dvs = (-3.0 * vs[0] + 4.0 * vs[1] - vs[2]) / (2.0 * h);
  return fundamental_solution(0.0, slice.k).dz + dvs;
}

DataG data_from_slices(const std::vector<ForwardSlice>& slices, const KGrid& kg) {
  if (static_cast<int>(slices.size()) != kg.size()) {
    throw std::invalid_argument("data_from_slices: slice count does not match the k-grid");
  }
  DataG d{kg, {}, {}, 0.0};
  d.g.reserve(slices.size());
  for (const auto& s : slices) d.g.push_back(boundary_flux(s));
  d.g_prime = differentiate_in_k(d.g, kg);
  return d;
}

DataG synth_data(const ConductivityProfile& sigma, const KGrid& kg, int threads) {
  return data_from_slices(solve_forward_family(sigma, kg, threads), kg);
}

DataG add_noise(const DataG& data, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("add_noise: delta must lie in [0, 1), got " + std::to_string(delta));
  }
  if (delta == 0.0) return data;
  DataG out = data;
  std::mt19937_64 rng(seed);
  for (double& g : out.g) g *= 1.0 + delta * uniform_symmetric(rng);
  out.g_prime = differentiate_in_k(out.g, out.k_grid);
  out.noise_level = delta;
  return out;
}

}  // namespace convisc
