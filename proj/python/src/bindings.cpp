#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlbellman/errors.hpp"
#include "nlbellman/field_io.hpp"
#include "nlbellman/nonlocal_eval.hpp"
#include "nlbellman/problem.hpp"
#include "nlbellman/regularity.hpp"
#include "nlbellman/scenario.hpp"
#include "nlbellman/solver.hpp"
#include "nlbellman/symbol.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python package wraps json.dumps/loads.
json parse(const std::string& text) { return json::parse(text); }

py::array_t<double> values_of(const nlb::ScalarField& u) {
  const auto v = u.values();
  if (u.dimension() == 1) return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
  const auto m = static_cast<py::ssize_t>(u.grid().nodes_per_axis());
  return py::array_t<double>({m, m}, v.data());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Concave nonlocal Bellman equations: kernels, evaluation, symbols, solver, diagnostics";

  // Later registrations are tried first, so derived classes come after Error.
  const auto error = py::register_exception<nlb::Error>(m, "Error");
  py::register_exception<nlb::ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<nlb::NonconvergenceError>(m, "NonconvergenceError", error.ptr());
  py::register_exception<nlb::ParseError>(m, "ParseError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "solve",
      [](const std::string& problem, const std::string& quadrature, double tol, int max_iter) {
        const auto p = nlb::BellmanProblem::from_json(parse(problem));
        const auto q = nlb::QuadratureScheme::from_json(parse(quadrature), p.grid.h());
        const nlb::Solution s = [&] {
          py::gil_scoped_release release;
          return nlb::solve_dirichlet(p, q, tol, max_iter);
        }();
        py::dict d;
        d["values"] = values_of(s.field);
        d["control"] = s.policy.index;
        d["iterations"] = s.iterations;
        d["residual"] = s.residual_sup;
        d["residual_history"] = s.residual_history;
        d["max_principle_constant"] = s.max_principle_constant;
        d["sup_norm"] = s.field.sup_norm();
        return d;
      },
      py::arg("problem"), py::arg("quadrature") = "{}", py::arg("tol") = 1e-8, py::arg("max_iter") = 50);

  m.def(
      "symbol",
      [](const std::string& kernel, std::pair<double, double> xi) {
        const auto k = nlb::kernel_from_json(parse(kernel));
        return nlb::symbol(k, {xi.first, xi.second}, nlb::symbol_scheme());
      },
      py::arg("kernel"), py::arg("xi"));

  m.def(
      "comparability_fit",
      [](const std::string& kernel) {
        const auto k = nlb::kernel_from_json(parse(kernel));
        return nlb::to_json(nlb::comparability_fit(k, nlb::default_magnitudes(),
                                                   nlb::default_directions(k.dimension())))
            .dump();
      },
      py::arg("kernel"));

  m.def(
      "fractional_laplacian",
      [](const std::string& exterior, std::pair<double, double> x, double sigma, double h) {
        const auto u = nlb::ScalarField::from_closure(nlb::Grid(1, h, 2.0),
                                                      nlb::ExteriorClosure::from_json(parse(exterior)));
        const auto r = nlb::fractional_laplacian(u, {x.first, x.second}, sigma,
                                                 nlb::QuadratureScheme::for_grid(h));
        return std::make_pair(r.value, r.error());
      },
      py::arg("exterior"), py::arg("x"), py::arg("sigma"), py::arg("h"));

  m.def(
      "diagnose",
      [](const std::string& problem, const std::string& quadrature, const std::string& diagnostics,
         double tol) {
        const auto p = nlb::BellmanProblem::from_json(parse(problem));
        const auto q = nlb::QuadratureScheme::from_json(parse(quadrature), p.grid.h());
        const auto dq = nlb::QuadratureScheme::from_json(parse(diagnostics), p.grid.h());
        py::gil_scoped_release release;
        const auto s = nlb::solve_dirichlet(p, q, tol);
        return nlb::to_json(nlb::diagnose(p, s.field, dq)).dump();
      },
      py::arg("problem"), py::arg("quadrature") = "{}",
      py::arg("diagnostics") = R"({"interpolation_order": 3})", py::arg("tol") = 1e-8);

  m.def(
      "config_hash",
      [](const std::string& config) { return nlb::ScenarioConfig::from_json(parse(config)).hash(); },
      py::arg("config"));

  m.def(
      "run_scenario",
      [](const std::string& config, const std::string& base_dir) {
        const auto c = nlb::ScenarioConfig::from_json(parse(config), base_dir);
        nlb::ScenarioOutcome o;
        {
          py::gil_scoped_release release;
          o = nlb::run_scenario(c);
        }
        json j = {{"exit_code", o.exit_code},
                  {"artifacts", o.artifacts},
                  {"summary", o.summary},
                  {"config_hash", c.hash()}};
        return j.dump();
      },
      py::arg("config"), py::arg("base_dir") = ".");
}
