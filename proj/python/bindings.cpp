// SPDX-License-Identifier: Apache-2.0
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmo/constraints.hpp"
#include "mmo/gmd.hpp"
#include "mmo/relay.hpp"
#include "mmo/sensor.hpp"
#include "mmo/sim/channel.hpp"
#include "mmo/sim/config.hpp"
#include "mmo/sim/experiment.hpp"
#include "mmo/spectral.hpp"
#include "mmo/structure.hpp"
#include "mmo/uplink.hpp"
#include "mmo/waterfill.hpp"

namespace py = pybind11;
using namespace mmo;

namespace {

py::dict run_summary(const std::vector<double>& trace, int iterations, bool converged) {
  py::dict d;
  d["objective_trace"] = trace;
  d["iterations"] = iterations;
  d["converged"] = converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Matrix-monotonic MIMO transceiver design";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<NotPsd>(m, "NotPsd", base.ptr());
  py::register_exception<UnsupportedRank>(m, "UnsupportedRank", base.ptr());
  py::register_exception<Infeasible>(m, "Infeasible", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<ShapingConstraint>(m, "ShapingConstraint")
      .def(py::init([](CMatrix shape) { return ShapingConstraint{std::move(shape)}; }), py::arg("shape"))
      .def_readwrite("shape", &ShapingConstraint::shape);
  py::class_<JointConstraint>(m, "JointConstraint")
      .def(py::init([](double total, double cap) { return JointConstraint{total, cap}; }), py::arg("total"),
           py::arg("cap"))
      .def_readwrite("total", &JointConstraint::total)
      .def_readwrite("cap", &JointConstraint::cap);
  py::class_<WeightedConstraint>(m, "WeightedConstraint")
      .def(py::init([](std::vector<CMatrix> weights, std::vector<double> budgets) {
             return WeightedConstraint{std::move(weights), std::move(budgets)};
           }),
           py::arg("weights"), py::arg("budgets"))
      .def_readwrite("weights", &WeightedConstraint::weights)
      .def_readwrite("budgets", &WeightedConstraint::budgets);
  m.def("per_antenna", &per_antenna, py::arg("budgets"));
  m.def("sum_power", &sum_power, py::arg("n"), py::arg("total"));
  m.def("feasibility_residual", &feasibility_residual, py::arg("constraint"), py::arg("f"));
  m.def("is_feasible", &is_feasible, py::arg("constraint"), py::arg("f"), py::arg("slack") = 1e-6);

  m.def(
      "sorted_evd",
      [](const CMatrix& a) {
        const auto e = sorted_evd(a);
        return py::make_tuple(e.eigvals, e.eigvecs);
      },
      py::arg("a"), "Eigenvalues (descending) and eigenvectors of a Hermitian matrix.");
  m.def("hermitian_sqrt", [](const CMatrix& a) { return hermitian_sqrt(a); }, py::arg("a"));
  m.def(
      "waterfill",
      [](const RVector& gains, double budget) {
        const auto r = waterfill(gains, budget);
        return py::make_tuple(r.powers, r.water_level);
      },
      py::arg("gains"), py::arg("budget"));
  m.def(
      "waterfill_capped",
      [](const RVector& gains, double budget, double cap) {
        const auto r = waterfill_capped(gains, budget, cap);
        return py::make_tuple(r.powers, r.water_level);
      },
      py::arg("gains"), py::arg("budget"), py::arg("cap"));
  m.def(
      "gmd",
      [](const RVector& s) {
        const auto g = gmd_diagonal(s);
        return py::make_tuple(g.q, g.r, g.p);
      },
      py::arg("singular_values"), "Factors (Q, R, P) with diag(s) = Q R P^T and a constant diagonal in R.");

  m.def(
      "solve_log_det",
      [](const CMatrix& pi, const PowerConstraint& c, Index cols) {
        return solve_structure(pi, c, log_det_scalarizer(), cols).dense;
      },
      py::arg("pi"), py::arg("constraint"), py::arg("cols"), "Maximizer of log|I + F^H pi F| under the constraint.");
  m.def("log_det_objective", &log_det_objective, py::arg("pi"), py::arg("f"));

  py::class_<UplinkScenario>(m, "UplinkScenario")
      .def(py::init([](std::vector<CMatrix> channels, CMatrix noise_cov, std::vector<CMatrix> weights,
                       std::vector<PowerConstraint> constraints) {
             return UplinkScenario{std::move(channels), std::move(noise_cov), std::move(weights), std::move(constraints)};
           }),
           py::arg("channels"), py::arg("noise_cov"), py::arg("weights"), py::arg("constraints"))
      .def_readwrite("channels", &UplinkScenario::channels)
      .def_readwrite("noise_cov", &UplinkScenario::noise_cov)
      .def_readwrite("weights", &UplinkScenario::weights)
      .def_readwrite("constraints", &UplinkScenario::constraints);
  m.def("sum_rate", &sum_rate, py::arg("scenario"), py::arg("precoders"));
  m.def(
      "solve_uplink",
      [](const UplinkScenario& sc) {
        const auto st = alternating_solve_uplink(sc);
        py::dict d = run_summary(st.objective_trace, st.iterations, st.converged);
        d["precoders"] = st.realized;
        return d;
      },
      py::arg("scenario"));

  py::class_<SensorScenario>(m, "SensorScenario")
      .def(py::init(&SensorScenario::make), py::arg("source_cov"), py::arg("block_dims"), py::arg("channels"),
           py::arg("noise_covs"), py::arg("constraints"))
      .def_readonly("source_cov", &SensorScenario::source_cov)
      .def_readonly("channels", &SensorScenario::channels);
  m.def("mutual_information", &mutual_information, py::arg("scenario"), py::arg("compressors"));
  m.def(
      "solve_sensors",
      [](const SensorScenario& sc) {
        const auto st = alternating_solve_sensors(sc);
        py::dict d = run_summary(st.objective_trace, st.iterations, st.converged);
        d["compressors"] = st.compressors_X;
        return d;
      },
      py::arg("scenario"));

  py::class_<RelayScenario>(m, "RelayScenario")
      .def(py::init([](std::vector<CMatrix> channels, std::vector<CMatrix> error_covs, std::vector<double> noise_vars,
                       double source_var, Index source_dim, std::vector<PowerConstraint> constraints, int objective) {
             RelayScenario sc;
             sc.est_channels = std::move(channels);
             sc.error_covs = std::move(error_covs);
             sc.noise_vars = std::move(noise_vars);
             sc.source_var = source_var;
             sc.source_dim = source_dim;
             sc.constraints = std::move(constraints);
             sc.objective.kind = objective_kind_from_index(objective);
             return sc;
           }),
           py::arg("channels"), py::arg("error_covs"), py::arg("noise_vars"), py::arg("source_var"),
           py::arg("source_dim"), py::arg("constraints"), py::arg("objective") = 1)
      .def_property_readonly("hops", &RelayScenario::hops);
  m.def(
      "relay_objective",
      [](const RelayScenario& sc, const std::vector<CMatrix>& forwarders) { return evaluate_cascade(sc, forwarders).objective; },
      py::arg("scenario"), py::arg("forwarders"));
  m.def("relay_sum_rate", &relay_sum_rate, py::arg("scenario"), py::arg("forwarders"));
  m.def(
      "solve_relay",
      [](const RelayScenario& sc, bool robust) {
        const auto st = robust ? cascade_solve(sc) : cascade_solve(perfect_csi(sc));
        py::dict d = run_summary(st.objective_trace, st.iterations, st.converged);
        d["forwarders"] = dense_forwarders(st);
        return d;
      },
      py::arg("scenario"), py::arg("robust") = true);

  m.def("exponential_corr", &sim::exponential_corr, py::arg("r"), py::arg("n"));
  m.def(
      "run_experiment",
      [](const std::string& config_text, std::optional<std::uint64_t> seed, std::optional<int> trials, int parallel) {
        sim::RunOptions opts;
        opts.seed = seed;
        opts.trials = trials;
        opts.parallel = parallel;
        const sim::ExperimentConfig cfg = sim::parse_config(config_text);
        std::vector<sim::RunRecord> records;
        {
          py::gil_scoped_release release;
          records = sim::run_experiment(cfg, opts);
        }
        py::list out;
        for (const auto& r : records) {
          py::dict d;
          d["scenario"] = r.scenario;
          d["algorithm"] = r.algorithm;
          d["trial"] = r.trial;
          d["snr_db"] = r.snr_db;
          d["metric_name"] = r.metric_name;
          d["value"] = r.value;
          d["wall_time_ms"] = r.wall_time_ms;
          d["converged"] = r.converged;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("seed") = std::nullopt, py::arg("trials") = std::nullopt, py::arg("parallel") = 1,
      "Runs an experiment described by JSON text and returns one dict per record.");
  m.def(
      "experiment_csv",
      [](const std::string& config_text, std::optional<std::uint64_t> seed, std::optional<int> trials) {
        sim::RunOptions opts;
        opts.seed = seed;
        opts.trials = trials;
        const sim::ExperimentConfig cfg = sim::parse_config(config_text);
        py::gil_scoped_release release;
        return sim::format_csv(sim::run_experiment(cfg, opts));
      },
      py::arg("config"), py::arg("seed") = std::nullopt, py::arg("trials") = std::nullopt);
}
