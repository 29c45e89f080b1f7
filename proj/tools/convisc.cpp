// Command-line driver: forward, invert, verify and sweep runs from a
// key = value config file.
#include "convisc/config.hpp"
#include "convisc/errors.hpp"
#include "convisc/experiment.hpp"
#include "convisc/io.hpp"
#include "convisc/parallel.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace convisc;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

ExperimentConfig resolve(const Options& opt) {
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : load_config(opt.config);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.threads) cfg.threads = *opt.threads;
  cfg.validate();
  return cfg;
}

void write_manifest(const fs::path& dir, const char* verb, const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs, nlohmann::json summary) {
  nlohmann::json m;
  m["verb"] = verb;
  m["config"] = config_json(cfg);
  m["outputs"] = outputs;
  m["summary"] = std::move(summary);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::string k_file(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "chain_k%02d.tsv", i);
  return buf;
}

int cmd_forward(const ExperimentConfig& cfg) {
  cfg.require_single_values("forward");
  const fs::path dir = cfg.output_dir;
  const SyntheticProblem problem = make_problem(cfg, cfg.epsilon.front(), cfg.delta.front());
  std::vector<std::string> outputs{"data.tsv"};
  data_table(problem.measured).write(dir / "data.tsv");
  for (int i = 0; i < problem.k_grid.size(); ++i) {
    chain_table(problem, i).write(dir / k_file(i));
    outputs.push_back(k_file(i));
  }
  write_manifest(dir, "forward", cfg, outputs, {{"n_k", problem.k_grid.size()}});
  std::cout << "forward: wrote " << outputs.size() << " tables to " << dir.string() << "\n";
  return 0;
}

int cmd_invert(const ExperimentConfig& cfg) {
  cfg.require_single_values("invert");
  const fs::path dir = cfg.output_dir;
  const InversionRun run = run_inversion(cfg, cfg.epsilon.front(), cfg.lambda.front(), cfg.delta.front());
  const auto& res = run.result;

  data_table(run.problem.measured).write(dir / "data.tsv");
  sigma_table(res, &run.problem.truth).write(dir / "sigma.tsv");
  sigma_per_k_table(res).write(dir / "sigma_per_k.tsv");
  convergence_table(res, &run.errors).write(dir / "convergence.tsv");
  field_error_table(res, run.errors).write(dir / "per_k.tsv");
  boundary_modes_table(run.problem, res.params.epsilon).write(dir / "boundary_modes.tsv");
  Table curve{{"iteration", "sigma_l2_error"}, {}};
  for (std::size_t i = 0; i < run.errors.sigma_curve_iterations.size(); ++i) {
    curve.add({static_cast<double>(run.errors.sigma_curve_iterations[i]), run.errors.sigma_error_curve[i]});
  }
  curve.write(dir / "sigma_error_curve.tsv");

  std::string log;
  for (std::size_t i = 0; i < res.histories.size(); ++i) {
    for (const auto& w : res.histories[i].warnings) {
      char head[48];
      std::snprintf(head, sizeof head, "k=%.6g: ", res.k_grid.value(static_cast<int>(i)));
      log += std::string("warning: ") + head + w + "\n";
    }
  }
  write_text(dir / "log.txt", log);
  if (!log.empty()) std::cerr << log;

  write_manifest(dir, "invert", cfg,
                 {"data.tsv", "sigma.tsv", "sigma_per_k.tsv", "convergence.tsv", "per_k.tsv",
                  "boundary_modes.tsv", "sigma_error_curve.tsv", "log.txt"},
                 inversion_summary(run));
  std::printf("invert: sigma relative L2 error %.6g (L2 %.6g), max per-k spread %.6g\n",
              run.errors.sigma_rel_l2, run.errors.sigma_l2, run.errors.max_spread);
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  const VerifyReport rep = run_verify(cfg);
  gradient_table(rep).write(dir / "gradient_check.tsv");
  convexity_table(rep).write(dir / "convexity.tsv");
  carleman_table(rep).write(dir / "carleman.tsv");
  const nlohmann::json summary = verify_json(rep);
  write_text(dir / "verify_report.json", summary.dump(2) + "\n");
  write_manifest(dir, "verify", cfg,
                 {"gradient_check.tsv", "convexity.tsv", "carleman.tsv", "verify_report.json"}, summary);
  std::printf("verify: max gradient relative error %.3g, worst convexity gap %.3g\n",
              rep.max_gradient_error, rep.min_gap);
  for (const auto& r : rep.convexity) {
    std::printf("  lambda %-6g positive %d/%d  C1 %.4g\n", r.lambda, r.positive, r.samples, r.c1);
  }
  for (const auto& r : rep.carleman) std::printf("  lambda %-6g C0 %.4g\n", r.lambda, r.c0);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  if (cfg.epsilon.size() < 2 && cfg.lambda.size() < 2 && cfg.delta.size() < 2) {
    throw ConfigError("sweep needs at least one of epsilon, lambda, delta with two or more values");
  }
  const fs::path dir = cfg.output_dir;
  Table t{{"epsilon", "lambda", "delta", "sigma_l2_error", "sigma_rel_l2_error", "max_spread",
           "mean_final_J", "mean_field_error", "mean_theta_hat"},
          {}};
  for (double eps : cfg.epsilon) {
    for (double lam : cfg.lambda) {
      for (double delta : cfg.delta) {
        const InversionRun run = run_inversion(cfg, eps, lam, delta);
        const auto& hs = run.result.histories;
        double j = 0.0;
        double err = 0.0;
        double theta = 0.0;
        int thetas = 0;
        for (std::size_t i = 0; i < hs.size(); ++i) {
          j += hs[i].J_values.back();
          err += run.errors.q_error[i] + run.errors.r_error[i];
          if (std::isfinite(hs[i].theta_hat)) {
            theta += hs[i].theta_hat;
            ++thetas;
          }
        }
        const double n = static_cast<double>(hs.size());
        t.add({eps, lam, delta, run.errors.sigma_l2, run.errors.sigma_rel_l2, run.errors.max_spread,
               j / n, err / n, thetas ? theta / thetas : std::nan("")});
        std::printf("sweep: epsilon %g lambda %g delta %g -> sigma rel L2 error %.6g\n", eps, lam, delta,
                    run.errors.sigma_rel_l2);
      }
    }
  }
  t.write(dir / "sweep.tsv");
  std::vector<std::string> outputs{"sweep.tsv"};
  nlohmann::json summary{{"rows", t.rows.size()}};

  if (cfg.lambda.size() >= 2) {
    ExperimentConfig vc = cfg;
    vc.verify_lambdas = cfg.lambda;
    vc.epsilon = {cfg.epsilon.front()};
    const SyntheticProblem problem = make_problem(vc, vc.epsilon.front(), 0.0);
    const int idx = problem.k_grid.size() / 2;
    const LiftPair lift = build_lift(
        boundary_for(problem.measured, idx, vc.epsilon.front(), vc.boundary_mode, &problem.chain,
                     &problem.clean),
        problem.grid);
    FunctionalParams params;
    params.epsilon = vc.epsilon.front();
    params.k = problem.k_grid.value(idx);
    params.R = vc.R;
    VerifyReport rep;
    rep.convexity = convexity_study(problem.grid, params, lift, cfg.lambda, cfg.verify_samples,
                                    cfg.seed + 1, cfg.verify_modes);
    rep.lambda1 = empirical_lambda1(rep.convexity);
    convexity_table(rep).write(dir / "sweep_convexity.tsv");
    outputs.push_back("sweep_convexity.tsv");
    summary["lambda1"] = rep.lambda1 ? nlohmann::json(*rep.lambda1) : nlohmann::json(nullptr);
    if (rep.lambda1) {
      std::printf("sweep: empirical lambda1 = %g\n", *rep.lambda1);
    } else {
      std::printf("sweep: no swept lambda gave all-positive convexity gaps\n");
    }
  }
  write_manifest(dir, "sweep", cfg, outputs, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convexification with viscosity for 1D conductivity inversion"};
  app.require_subcommand(0, 1);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "Print every config key with its default and exit");

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", opt.seed, "random seed (overrides seed)");
    sub->add_option("--threads", opt.threads, "worker threads, 0 = auto (overrides threads)")
        ->check(CLI::NonNegativeNumber);
  };
  CLI::App* forward = app.add_subcommand("forward", "Synthetic data and exact chain fields");
  CLI::App* invert = app.add_subcommand("invert", "Reconstruct sigma from synthetic data");
  CLI::App* verify = app.add_subcommand("verify", "Gradient, convexity and Carleman checks");
  CLI::App* sweep = app.add_subcommand("sweep", "Inversions over epsilon/lambda/delta lists");
  for (CLI::App* sub : {forward, invert, verify, sweep}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  if (list_keys) {
    std::cout << config_reference();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  try {
    const ExperimentConfig cfg = resolve(opt);
    if (forward->parsed()) return cmd_forward(cfg);
    if (invert->parsed()) return cmd_invert(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    return cmd_sweep(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const StepSizeError& e) {
    std::cerr << "step-size error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
