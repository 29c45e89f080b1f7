#pragma once

#include "convisc/config.hpp"
#include "convisc/experiment.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace convisc {

/// Tab-separated table with one header line naming the columns. Numbers use
/// %.17g so a rerun reproduces the file byte for byte.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;
};

Table read_table(const std::filesystem::path& path);

Table data_table(const DataG& data);
Table chain_table(const SyntheticProblem& problem, int k_index);
/// Both boundary modes side by side for every k of the measured data.
Table boundary_modes_table(const SyntheticProblem& problem, double epsilon);
Table sigma_table(const InversionResult& result, const ConductivityProfile* truth);
Table sigma_per_k_table(const InversionResult& result);
Table convergence_table(const InversionResult& result, const ErrorReport* errors);
Table field_error_table(const InversionResult& result, const ErrorReport& errors);
Table gradient_table(const VerifyReport& rep);
Table convexity_table(const VerifyReport& rep);
Table carleman_table(const VerifyReport& rep);

nlohmann::json config_json(const ExperimentConfig& cfg);
nlohmann::json verify_json(const VerifyReport& rep);
nlohmann::json inversion_summary(const InversionRun& run);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace convisc
