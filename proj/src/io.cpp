#include "convisc/io.hpp"

#include "convisc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace convisc {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

// JSON has no NaN; report it as null.
nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("Table::add: row has " + std::to_string(row.size()) +
                                " entries, header has " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string Table::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += '\t';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += '\t';
      append_number(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

void Table::write(const std::filesystem::path& path) const { write_text(path, to_string()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table '" + path.string() + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty table '" + path.string() + "'");
  std::istringstream head(line);
  for (std::string col; std::getline(head, col, '\t');) t.columns.push_back(col);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, '\t');) row.push_back(std::stod(cell));
    t.add(std::move(row));
  }
  return t;
}

Table data_table(const DataG& data) {
  Table t{{"k", "g", "g_prime"}, {}};
  for (int i = 0; i < data.k_grid.size(); ++i) {
    t.add({data.k_grid.value(i), data.g[i], data.g_prime[i]});
  }
  return t;
}

Table chain_table(const SyntheticProblem& problem, int k_index) {
  Table t{{"z", "sigma", "v_scattered", "v_total", "w", "p", "q", "r"}, {}};
  const ForwardSlice& s = problem.slices.at(k_index);
  const ChainFamily& c = problem.chain;
  for (int i = 0; i < problem.grid.size(); ++i) {
    t.add({problem.grid.node(i), problem.truth.values()[i], s.v_scattered[i], s.v_total[i], s.w[i],
           c.p[k_index][i], c.q[k_index][i], c.r[k_index][i]});
  }
  return t;
}

Table sigma_table(const InversionResult& result, const ConductivityProfile* truth) {
  Table t{{"z", "sigma_comp", "spread", "below_one"}, {}};
  if (truth != nullptr) t.columns.insert(t.columns.begin() + 2, "sigma_true");
  const Grid1D& g = result.sigma_comp.grid();
  for (int i = 0; i < g.size(); ++i) {
    std::vector<double> row{g.node(i), result.sigma_comp[i]};
    if (truth != nullptr) row.push_back(truth->values()[i]);
    row.push_back(result.spread[i]);
    row.push_back(result.below_one[i] ? 1.0 : 0.0);
    t.add(std::move(row));
  }
  return t;
}

Table sigma_per_k_table(const InversionResult& result) {
  Table t{{"z"}, {}};
  char name[48];
  for (int j = 0; j < result.k_grid.size(); ++j) {
    std::snprintf(name, sizeof name, "sigma_k=%.6g", result.k_grid.value(j));
    t.columns.emplace_back(name);
  }
  const Grid1D& g = result.sigma_comp.grid();
  for (int i = 0; i < g.size(); ++i) {
    std::vector<double> row{g.node(i)};
    for (const auto& s : result.sigma_per_k) row.push_back(s[i]);
    t.add(std::move(row));
  }
  return t;
}

Table convergence_table(const InversionResult& result, const ErrorReport* errors) {
  Table t{{"k", "iteration", "J", "grad_norm", "projected", "distance_to_final"}, {}};
  if (errors != nullptr) t.columns.push_back("error");
  for (int j = 0; j < result.k_grid.size(); ++j) {
    const DescentHistory& h = result.histories[j];
    for (std::size_t s = 0; s < h.snapshot_iterations.size(); ++s) {
      const int it = h.snapshot_iterations[s];
      const double projected =
          it > 0 && it <= static_cast<int>(h.projected_flags.size()) ? h.projected_flags[it - 1] : 0.0;
      std::vector<double> row{result.k_grid.value(j), static_cast<double>(it), h.J_values[it],
                              h.grad_norms[it], projected, h.iterates_norms[s]};
      if (errors != nullptr) row.push_back(errors->field_error_curves[j][s]);
      t.add(std::move(row));
    }
  }
  return t;
}

Table boundary_modes_table(const SyntheticProblem& problem, double epsilon) {
  Table t{{"k", "q0_literal", "q0_consistent", "qz0_literal", "qz0_consistent", "qzZ_literal",
           "qzZ_consistent", "r0_literal", "r0_consistent", "rz0_literal", "rz0_consistent",
           "rzZ_literal", "rzZ_consistent"},
          {}};
  for (int j = 0; j < problem.k_grid.size(); ++j) {
    const BoundarySet a = boundary_for(problem.measured, j, epsilon, BoundaryMode::paper_literal,
                                       &problem.chain, &problem.clean);
    const BoundarySet b = boundary_for(problem.measured, j, epsilon, BoundaryMode::forward_consistent,
                                       &problem.chain, &problem.clean);
    t.add({problem.k_grid.value(j), a.q0, b.q0, a.qz0, b.qz0, a.qzZ, b.qzZ, a.r0, b.r0, a.rz0, b.rz0,
           a.rzZ, b.rzZ});
  }
  return t;
}

Table field_error_table(const InversionResult& result, const ErrorReport& errors) {
  Table t{{"k", "gamma", "iterations", "converged", "final_J", "q_error_h2", "r_error_h2", "theta_hat",
           "floor_dominated", "projections"},
          {}};
  for (int j = 0; j < result.k_grid.size(); ++j) {
    const DescentHistory& h = result.histories[j];
    double projections = 0.0;
    for (char f : h.projected_flags) projections += f;
    t.add({result.k_grid.value(j), h.gamma, static_cast<double>(h.iterations), h.converged ? 1.0 : 0.0,
           h.J_values.back(), errors.q_error[j], errors.r_error[j], h.theta_hat,
           h.floor_dominated ? 1.0 : 0.0, projections});
  }
  return t;
}

Table gradient_table(const VerifyReport& rep) {
  Table t{{"point", "direction", "analytic", "finite_difference", "rel_error"}, {}};
  for (const auto& r : rep.gradient) {
    t.add({static_cast<double>(r.point), static_cast<double>(r.direction), r.analytic, r.fd, r.rel_error});
  }
  return t;
}

Table convexity_table(const VerifyReport& rep) {
  Table t{{"lambda", "samples", "positive", "min_gap", "C1"}, {}};
  for (const auto& r : rep.convexity) {
    t.add({r.lambda, static_cast<double>(r.samples), static_cast<double>(r.positive), r.min_gap, r.c1});
  }
  return t;
}

Table carleman_table(const VerifyReport& rep) {
  Table t{{"lambda", "samples", "C0", "max_ratio"}, {}};
  for (const auto& r : rep.carleman) {
    t.add({r.lambda, static_cast<double>(r.samples), r.c0, r.max_ratio});
  }
  return t;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["profile"] = {{"name", cfg.profile.name},
                  {"file", cfg.profile.file},
                  {"bump_amplitude", cfg.profile.bump_amplitude},
                  {"bump_center", cfg.profile.bump_center},
                  {"bump_width", cfg.profile.bump_width},
                  {"layer_depth", cfg.profile.layer_depth},
                  {"layer_contrast", cfg.profile.layer_contrast},
                  {"layer_smoothness", cfg.profile.layer_smoothness}};
  j["z_max"] = cfg.z_max;
  j["n_nodes"] = cfg.n_nodes;
  j["n_k"] = cfg.n_k;
  j["k_min"] = cfg.k_min;
  j["k_max"] = cfg.k_max;
  j["epsilon"] = cfg.epsilon;
  j["lambda"] = cfg.lambda;
  j["delta"] = cfg.delta;
  j["R"] = cfg.R;
  j["gamma"] = cfg.gamma;
  j["max_iters"] = cfg.max_iters;
  j["grad_tol"] = cfg.grad_tol;
  j["seed"] = cfg.seed;
  j["boundary_mode"] = std::string(to_string(cfg.boundary_mode));
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;
  j["snapshot_stride"] = cfg.snapshot_stride;
  j["verify_samples"] = cfg.verify_samples;
  j["verify_modes"] = cfg.verify_modes;
  j["verify_lambdas"] = cfg.verify_lambdas;
  j["carleman_lambdas"] = cfg.carleman_lambdas;
  j["gradient_points"] = cfg.gradient_points;
  j["gradient_directions"] = cfg.gradient_directions;
  j["gradient_step"] = cfg.gradient_step;
  j["verify_k"] = cfg.verify_k;
  return j;
}

nlohmann::json verify_json(const VerifyReport& rep) {
  nlohmann::json j;
  j["samples"] = rep.samples;
  j["lambda_tested"] = rep.lambda_tested;
  j["max_gradient_rel_error"] = rep.max_gradient_error;
  j["min_gap"] = rep.min_gap;
  j["lambda1"] = rep.lambda1 ? nlohmann::json(*rep.lambda1) : nlohmann::json(nullptr);
  for (const auto& r : rep.convexity) {
    j["convexity"].push_back({{"lambda", r.lambda}, {"positive", r.positive}, {"samples", r.samples},
                              {"min_gap", r.min_gap}, {"C1", number_or_null(r.c1)}});
  }
  for (const auto& r : rep.carleman) {
    j["carleman"].push_back({{"lambda", r.lambda}, {"C0", r.c0}, {"max_ratio", r.max_ratio}});
  }
  return j;
}

nlohmann::json inversion_summary(const InversionRun& run) {
  const auto& res = run.result;
  nlohmann::json j;
  j["epsilon"] = res.params.epsilon;
  j["lambda"] = res.params.lambda;
  j["delta"] = res.data_noise;
  j["sigma_l2_error"] = run.errors.sigma_l2;
  j["sigma_rel_l2_error"] = run.errors.sigma_rel_l2;
  j["max_spread"] = run.errors.max_spread;
  int below = 0;
  for (char b : res.below_one) below += b;
  j["nodes_below_one"] = below;
  for (std::size_t i = 0; i < res.histories.size(); ++i) {
    const auto& h = res.histories[i];
    nlohmann::json per{{"k", res.k_grid.value(static_cast<int>(i))},
                       {"gamma", h.gamma},
                       {"iterations", h.iterations},
                       {"converged", h.converged},
                       {"final_J", h.J_values.back()},
                       {"theta_hat", number_or_null(h.theta_hat)},
                       {"floor_dominated", h.floor_dominated},
                       {"q_error_h2", run.errors.q_error[i]},
                       {"r_error_h2", run.errors.r_error[i]}};
    for (const auto& w : h.warnings) per["warnings"].push_back(w);
    j["per_k"].push_back(per);
  }
  return j;
}

}  // namespace convisc
