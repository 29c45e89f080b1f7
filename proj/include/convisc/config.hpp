#pragma once

#include "convisc/transform.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace convisc {

struct ProfileSpec {
  std::string name = "bump";  ///< flat | bump | two-layer-smooth | file
  std::string file;           ///< two-column z, sigma table when name == file
  double bump_amplitude = 0.5;
  double bump_center = 0.5;  ///< fraction of z_max
  double bump_width = 0.15;  ///< fraction of z_max
  double layer_depth = 0.5;  ///< fraction of z_max
  double layer_contrast = 0.5;
  double layer_smoothness = 0.05;  ///< fraction of z_max
};

struct ExperimentConfig {
  ProfileSpec profile;
  double z_max = 1.0;
  int n_nodes = 201;
  int n_k = 11;
  double k_min = 1.0;
  double k_max = 3.0;
  std::vector<double> epsilon{0.1};
  std::vector<double> lambda{1.0};
  std::vector<double> delta{0.0};
  double R = 0.5;
  double gamma = 0.0;  ///< 0 probes a stable step per frequency
  int max_iters = 100000;
  double grad_tol = 1e-9;
  std::uint64_t seed = 1;
  BoundaryMode boundary_mode = BoundaryMode::forward_consistent;
  std::string output_dir = "out";
  int threads = 0;
  int snapshot_stride = 0;

  int verify_samples = 100;
  int verify_modes = 64;  ///< Fourier modes in the random fields of verify
  std::vector<double> verify_lambdas{1.0, 2.0, 3.0, 5.0, 8.0};
  std::vector<double> carleman_lambdas{2.0, 4.0, 8.0, 16.0};
  int gradient_points = 10;
  int gradient_directions = 10;
  double gradient_step = 1e-5;
  double verify_k = 0.0;  ///< 0 picks the middle of the k-grid

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  /// Throws ConfigError when a list key holds more than one value.
  void require_single_values(std::string_view verb) const;
};

/// Parse `key = value` lines; '#' starts a comment, lists are comma-separated.
/// Unknown or repeated keys are errors.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Documentation of every accepted key with its default.
std::string config_reference();

/// Resolved parameters as `key = value` lines (round-trips through parse_config).
std::string format_config(const ExperimentConfig& cfg);

}  // namespace convisc
