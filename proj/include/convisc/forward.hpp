#pragma once

#include "convisc/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace convisc {

/// Samples of sigma(z) on [0, Z]: sigma >= 1 everywhere and sigma = 1 at both
/// ends, matching the homogeneous background outside the layer.
class ConductivityProfile {
 public:
  explicit ConductivityProfile(Field values);

  const Field& values() const noexcept { return values_; }
  const Grid1D& grid() const noexcept { return values_.grid(); }

 private:
  Field values_;
};

/// Smooth taper: 0 with zero slope at both ends, 1 away from them.
double end_taper(double z, double z_max, double width);

ConductivityProfile flat_profile(const Grid1D& grid);
/// 1 + amplitude * exp(-(z-center)^2/width^2), tapered to 1 at the ends.
ConductivityProfile bump_profile(const Grid1D& grid, double amplitude, double center,
                                 double width);
/// Smoothed step of height `contrast` at `depth`, tapered to 1 at the ends.
ConductivityProfile two_layer_profile(const Grid1D& grid, double depth, double contrast,
                                      double smoothness);
/// Piecewise-linear interpolation of (z, sigma) samples onto the grid.
ConductivityProfile tabulated_profile(const Grid1D& grid, std::span<const double> z,
                                      std::span<const double> sigma);

struct FundamentalValue {
  double value;
  /// z-derivative; the z > 0 branch is used at z = 0.
  double dz;
};

/// exp(-sqrt(k)|z|) / (2 sqrt(k)), the whole-line fundamental solution of
/// u'' - k u = -delta.
FundamentalValue fundamental_solution(double z, double k);

/// Forward solution for one frequency on [0, Z].
struct ForwardSlice {
  double k;
  Field v_scattered;
  Field v_total;
  Field w;
  Field p;
};

/// Solve v'' - k sigma v = -delta in scattered-field form v = u0 + vs with
/// exact Robin conditions vs'(0) = sqrt(k) vs(0), vs'(Z) = -sqrt(k) vs(Z).
ForwardSlice solve_forward(const ConductivityProfile& sigma, double k);

std::vector<ForwardSlice> solve_forward_family(const ConductivityProfile& sigma,
                                               const KGrid& kg, int threads = 1);

/// Measured boundary data g(k) = v_z(0+, k) and its k-derivative.
struct DataG {
  KGrid k_grid;
  std::vector<double> g;
  std::vector<double> g_prime;
  double noise_level = 0.0;

  void validate() const;
};

/// g(k) for one forward slice (one-sided trace at 0+).
double boundary_flux(const ForwardSlice& slice);

DataG data_from_slices(const std::vector<ForwardSlice>& slices, const KGrid& kg);
DataG synth_data(const ConductivityProfile& sigma, const KGrid& kg, int threads = 1);

/// Multiplicative uniform noise g(1 + delta xi), xi ~ U[-1, 1], seeded;
/// g' is re-derived from the noisy g.
DataG add_noise(const DataG& data, double delta, std::uint64_t seed);

}  // namespace convisc
