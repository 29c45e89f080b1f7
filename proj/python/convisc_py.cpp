#include "convisc/config.hpp"
#include "convisc/errors.hpp"
#include "convisc/experiment.hpp"
#include "convisc/functional.hpp"
#include "convisc/verification.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace convisc;

namespace {

ExperimentConfig config_from(const std::string& text) { return parse_config(text, "<python>"); }

Eigen::VectorXd nodes(const Grid1D& g) {
  return Eigen::Map<const Eigen::VectorXd>(g.nodes().data(), g.size());
}

py::dict py_forward(const std::string& text) {
  const ExperimentConfig cfg = config_from(text);
  cfg.require_single_values("forward");
  const SyntheticProblem p = [&] {
    py::gil_scoped_release release;
    return make_problem(cfg, cfg.epsilon.front(), cfg.delta.front());
  }();
  py::dict d;
  d["z"] = nodes(p.grid);
  d["sigma"] = p.truth.values().values();
  d["k"] = p.k_grid.values();
  d["g"] = p.measured.g;
  d["g_prime"] = p.measured.g_prime;
  d["g_clean"] = p.clean.g;
  py::list q;
  py::list r;
  for (int i = 0; i < p.k_grid.size(); ++i) {
    q.append(p.chain.q[i].values());
    r.append(p.chain.r[i].values());
  }
  d["q"] = q;
  d["r"] = r;
  return d;
}

py::dict py_invert(const std::string& text) {
  const ExperimentConfig cfg = config_from(text);
  cfg.require_single_values("invert");
  const InversionRun run = [&] {
    py::gil_scoped_release release;
    return run_inversion(cfg, cfg.epsilon.front(), cfg.lambda.front(), cfg.delta.front());
  }();
  const auto& res = run.result;
  py::dict d;
  d["z"] = nodes(run.problem.grid);
  d["sigma_comp"] = res.sigma_comp.values();
  d["sigma_true"] = run.problem.truth.values().values();
  d["spread"] = res.spread.values();
  d["sigma_rel_l2"] = run.errors.sigma_rel_l2;
  d["k"] = res.k_grid.values();
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<double> theta;
  std::vector<double> gamma;
  std::vector<double> final_J;
  for (const auto& h : res.histories) {
    iterations.push_back(h.iterations);
    converged.push_back(h.converged);
    theta.push_back(h.theta_hat);
    gamma.push_back(h.gamma);
    final_J.push_back(h.J_values.back());
  }
  d["iterations"] = iterations;
  d["converged"] = converged;
  d["theta_hat"] = theta;
  d["gamma"] = gamma;
  d["final_J"] = final_J;
  d["q_error"] = run.errors.q_error;
  d["r_error"] = run.errors.r_error;
  return d;
}

py::dict py_verify(const std::string& text) {
  const ExperimentConfig cfg = config_from(text);
  const VerifyReport rep = [&] {
    py::gil_scoped_release release;
    return run_verify(cfg);
  }();
  py::dict d;
  d["max_gradient_error"] = rep.max_gradient_error;
  d["min_gap"] = rep.min_gap;
  py::list conv;
  for (const auto& r : rep.convexity) {
    conv.append(py::dict(py::arg("lambda") = r.lambda, py::arg("samples") = r.samples,
                         py::arg("positive") = r.positive, py::arg("min_gap") = r.min_gap,
                         py::arg("c1") = r.c1));
  }
  d["convexity"] = conv;
  py::list carl;
  for (const auto& r : rep.carleman) {
    carl.append(py::dict(py::arg("lambda") = r.lambda, py::arg("c0") = r.c0,
                         py::arg("max_ratio") = r.max_ratio));
  }
  d["carleman"] = carl;
  d["lambda1"] = rep.lambda1 ? py::cast(*rep.lambda1) : py::none();
  return d;
}

py::dict solve(const Eigen::VectorXd& sigma, double z_max, double k) {
  const Grid1D g = make_grid(z_max, static_cast<int>(sigma.size()));
  const ForwardSlice s = solve_forward(ConductivityProfile(Field(g, sigma)), k);
  py::dict d;
  d["v_scattered"] = s.v_scattered.values();
  d["v_total"] = s.v_total.values();
  d["w"] = s.w.values();
  d["p"] = s.p.values();
  d["g"] = boundary_flux(s);
  return d;
}

FunctionalParams params_of(double k, double epsilon, double lambda) {
  FunctionalParams p;
  p.k = k;
  p.epsilon = epsilon;
  p.lambda = lambda;
  return p;
}

double functional_value(const Eigen::VectorXd& q, const Eigen::VectorXd& r, double z_max, double k,
                        double epsilon, double lambda) {
  const Grid1D g = make_grid(z_max, static_cast<int>(q.size()));
  return CarlemanFunctional(g, params_of(k, epsilon, lambda)).value(q, r);
}

py::tuple functional_gradient(const Eigen::VectorXd& q, const Eigen::VectorXd& r, double z_max,
                              double k, double epsilon, double lambda) {
  const Grid1D g = make_grid(z_max, static_cast<int>(q.size()));
  Eigen::VectorXd gq;
  Eigen::VectorXd gr;
  CarlemanFunctional(g, params_of(k, epsilon, lambda)).gradient(q, r, gq, gr);
  return py::make_tuple(gq, gr);
}

}  // namespace

PYBIND11_MODULE(_convisc, m) {
  m.doc() = "Convexified reconstruction of a layered conductivity from boundary data";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PhysicalityError>(m, "PhysicalityError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<InfeasibleConstraint>(m, "InfeasibleConstraint", PyExc_RuntimeError);
  py::register_exception<StepSizeError>(m, "StepSizeError", PyExc_RuntimeError);

  m.def("config_reference", &config_reference, "Every accepted config key with its default.");
  m.def("format_config", [](const std::string& text) { return format_config(config_from(text)); },
        py::arg("config") = "", "Resolved configuration for the given config text.");
  m.def("forward", &py_forward, py::arg("config") = "",
        "Synthetic data and exact chain fields for a config text.");
  m.def("invert", &py_invert, py::arg("config") = "",
        "Run the full per-k descent and return the reconstruction.");
  m.def("verify", &py_verify, py::arg("config") = "",
        "Gradient check, convexity study and Carleman study.");
  m.def("solve_forward", &solve, py::arg("sigma"), py::arg("z_max"), py::arg("k"),
        "Forward solve for sigma sampled on a uniform grid of [0, z_max].");
  m.def("functional_value", &functional_value, py::arg("q"), py::arg("r"), py::arg("z_max"),
        py::arg("k"), py::arg("epsilon"), py::arg("lambda_") = 1.0);
  m.def("functional_gradient", &functional_gradient, py::arg("q"), py::arg("r"), py::arg("z_max"),
        py::arg("k"), py::arg("epsilon"), py::arg("lambda_") = 1.0,
        "H2 Riesz representative of the derivative, as (gq, gr).");
}
