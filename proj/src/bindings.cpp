#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "platoonmac/delay.hpp"
#include "platoonmac/des.hpp"
#include "platoonmac/edca.hpp"
#include "platoonmac/platoon.hpp"
#include "platoonmac/scenario.hpp"
#include "platoonmac/traffic.hpp"

namespace py = pybind11;
using namespace platoonmac;

PYBIND11_MODULE(_core, m) {
  m.doc() = "platoon stability + 802.11p EDCA delay/reliability pipeline";

  // platoon dynamics
  py::class_<OvfParams>(m, "OvfParams")
      .def(py::init<>())
      .def_readwrite("v0", &OvfParams::v0)
      .def_readwrite("y_m", &OvfParams::y_m)
      .def_readwrite("y_tilde", &OvfParams::y_tilde);

  py::class_<PlatoonModel>(m, "PlatoonModel")
      .def(py::init<>())
      .def_readwrite("a", &PlatoonModel::a)
      .def_readwrite("l", &PlatoonModel::l)
      .def_readwrite("ovf", &PlatoonModel::ovf)
      .def_readwrite("lead_speed", &PlatoonModel::lead_speed)
      .def_readwrite("n_vehicles", &PlatoonModel::n_vehicles)
      .def_readwrite("tau", &PlatoonModel::tau);

  py::class_<Equilibrium>(m, "Equilibrium")
      .def_readonly("headway_star", &Equilibrium::headway_star)
      .def_readonly("v_prime", &Equilibrium::v_prime)
      .def_readonly("d_tilde", &Equilibrium::d_tilde);

  py::class_<DdeTrajectory>(m, "DdeTrajectory")
      .def_readonly("times", &DdeTrajectory::times)
      .def_readonly("headway_perturbations",
                    &DdeTrajectory::headway_perturbations)
      .def_readonly("relative_velocities",
                    &DdeTrajectory::relative_velocities);

  py::enum_<DdeMode>(m, "DdeMode")
      .value("Linearized", DdeMode::Linearized)
      .value("Nonlinear", DdeMode::Nonlinear);

  py::enum_<TrajectoryClass>(m, "TrajectoryClass")
      .value("NonOscillatory", TrajectoryClass::NonOscillatory)
      .value("Oscillatory", TrajectoryClass::Oscillatory)
      .value("Diverging", TrajectoryClass::Diverging);

  m.def("ovf_velocity", &ovf_velocity, py::arg("y"), py::arg("params"));
  m.def("solve_v0_for_equilibrium", &solve_v0_for_equilibrium,
        py::arg("y_star"), py::arg("lead_speed"), py::arg("y_m"),
        py::arg("y_tilde"));
  m.def("equilibrium", &equilibrium, py::arg("model"), py::arg("y_star"));
  m.def("critical_delay", &critical_delay, py::arg("model"), py::arg("eq"));
  m.def("characteristic_roots", &characteristic_roots, py::arg("model"),
        py::arg("eq"), py::arg("tau"));
  m.def("simulate_dde", &simulate_dde, py::arg("model"), py::arg("y_star"),
        py::arg("perturbation"), py::arg("horizon"), py::arg("dt"),
        py::arg("mode") = DdeMode::Linearized);
  m.def("oscillation_detector", &oscillation_detector, py::arg("trajectory"),
        py::arg("settle_fraction"));

  // heterogeneous traffic
  py::enum_<RateKind>(m, "RateKind")
      .value("Linear", RateKind::Linear)
      .value("Quadratic", RateKind::Quadratic)
      .value("Sigmoidal", RateKind::Sigmoidal)
      .value("Logarithmic", RateKind::Logarithmic);

  py::class_<GapModelParams>(m, "GapModelParams")
      .def(py::init<>())
      .def_readwrite("alpha", &GapModelParams::alpha)
      .def_readwrite("beta0", &GapModelParams::beta0);

  py::class_<RateModel>(m, "RateModel")
      .def(py::init<>())
      .def_readwrite("kind", &RateModel::kind)
      .def_readwrite("k", &RateModel::k);

  m.def("gap_probability", &gap_probability, py::arg("y_star"),
        py::arg("lead_speed"), py::arg("params") = GapModelParams{});
  m.def("lambda0", &lambda0, py::arg("p"), py::arg("model"));

  // EDCA analytic
  py::class_<EdcaParams>(m, "EdcaParams")
      .def(py::init<>())
      .def_readwrite("cw_min", &EdcaParams::cw_min)
      .def_readwrite("cw_max", &EdcaParams::cw_max)
      .def_readwrite("aifsn", &EdcaParams::aifsn)
      .def_readwrite("retry_limit", &EdcaParams::retry_limit)
      .def_readwrite("sifs", &EdcaParams::sifs)
      .def_readwrite("slot", &EdcaParams::slot)
      .def_readwrite("data_rate", &EdcaParams::data_rate)
      .def_readwrite("basic_rate", &EdcaParams::basic_rate)
      .def_readwrite("mean_payload_bytes", &EdcaParams::mean_payload_bytes)
      .def_readwrite("tx_range", &EdcaParams::tx_range)
      .def_readwrite("cs_range", &EdcaParams::cs_range);

  py::class_<SlotTiming>(m, "SlotTiming")
      .def_readonly("slot_us", &SlotTiming::slot_us)
      .def_readonly("ttr_us", &SlotTiming::ttr_us)
      .def_readonly("aifs_us", &SlotTiming::aifs_us);

  py::class_<FixedPointSolution>(m, "FixedPointSolution")
      .def_readonly("omega0", &FixedPointSolution::omega0)
      .def_readonly("omega1", &FixedPointSolution::omega1)
      .def_readonly("tau0", &FixedPointSolution::tau0)
      .def_readonly("tau1", &FixedPointSolution::tau1)
      .def_readonly("tau_total", &FixedPointSolution::tau_total)
      .def_readonly("pb0", &FixedPointSolution::pb0)
      .def_readonly("pb1", &FixedPointSolution::pb1)
      .def_readonly("pa0", &FixedPointSolution::pa0)
      .def_readonly("pa1", &FixedPointSolution::pa1)
      .def_readonly("rho0", &FixedPointSolution::rho0)
      .def_readonly("rho1", &FixedPointSolution::rho1)
      .def_readonly("n_cs", &FixedPointSolution::n_cs)
      .def_readonly("iterations", &FixedPointSolution::iterations)
      .def_readonly("residual", &FixedPointSolution::residual);

  py::class_<DelayMoments>(m, "DelayMoments")
      .def_readonly("mean_us", &DelayMoments::mean_us)
      .def_readonly("variance_us2", &DelayMoments::variance_us2);

  m.def("transmission_time", &transmission_time, py::arg("params"));
  m.def("slot_timing", &slot_timing, py::arg("params"));
  m.def("contender_count", &contender_count, py::arg("y_star"),
        py::arg("cs_range"), py::arg("platoon_cap") = 0);
  m.def("solve_fixed_point", &solve_fixed_point, py::arg("lambda0"),
        py::arg("lambda1"), py::arg("n_cs"), py::arg("params"),
        py::arg("damping") = 0.5, py::arg("tol") = 1e-10,
        py::arg("max_iterations") = 10000);
  m.def("access_delay_moments", &access_delay_moments, py::arg("params"),
        py::arg("ac"), py::arg("pb"), py::arg("pv1"));

  // delay distribution, fit, reliability
  py::class_<DelayDistribution>(m, "DelayDistribution")
      .def_readonly("atoms", &DelayDistribution::atoms)
      .def_readonly("total_mass", &DelayDistribution::total_mass)
      .def("mean_us", &DelayDistribution::mean_us)
      .def("variance_us2", &DelayDistribution::variance_us2)
      .def("cdf", &DelayDistribution::cdf, py::arg("x_us"));

  py::class_<CdfFit>(m, "CdfFit")
      .def_readonly("shift_us", &CdfFit::shift_us)
      .def_readonly("rate_per_ms", &CdfFit::rate_per_ms)
      .def_readonly("rms_error", &CdfFit::rms_error);

  py::class_<LinearFit>(m, "LinearFit")
      .def_readonly("slope", &LinearFit::slope)
      .def_readonly("intercept", &LinearFit::intercept);

  m.def("delay_pgf", &delay_pgf, py::arg("solution"), py::arg("params"),
        py::arg("ac"));
  m.def("cdf_fit", &cdf_fit, py::arg("distribution"), py::arg("ttr_us"));
  m.def("reliability_exact", &reliability_exact, py::arg("distribution"),
        py::arg("budget_s"));
  m.def("reliability_fitted", &reliability_fitted, py::arg("fit"),
        py::arg("budget_s"));
  m.def("headway_rate_regression", &headway_rate_regression,
        py::arg("headways"), py::arg("rates"));

  // simulator
  py::enum_<Topology>(m, "Topology")
      .value("SingleDomain", Topology::SingleDomain)
      .value("LineWithRanges", Topology::LineWithRanges);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("n_vehicles", &SimConfig::n_vehicles)
      .def_readwrite("headway", &SimConfig::headway)
      .def_readwrite("lambda0", &SimConfig::lambda0)
      .def_readwrite("lambda1", &SimConfig::lambda1)
      .def_readwrite("duration_s", &SimConfig::duration_s)
      .def_readwrite("warmup_s", &SimConfig::warmup_s)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("topology", &SimConfig::topology)
      .def_readwrite("record_packets", &SimConfig::record_packets)
      .def_readwrite("edca", &SimConfig::edca);

  py::class_<PacketRecord>(m, "PacketRecord")
      .def_readonly("station", &PacketRecord::station)
      .def_readonly("ac", &PacketRecord::ac)
      .def_readonly("arrival_us", &PacketRecord::arrival_us)
      .def_readonly("hol_us", &PacketRecord::hol_us)
      .def_readonly("done_us", &PacketRecord::done_us)
      .def_readonly("outcome", &PacketRecord::outcome);

  py::class_<AcStats>(m, "AcStats")
      .def_readonly("access_us", &AcStats::access_us)
      .def_readonly("sojourn_us", &AcStats::sojourn_us)
      .def_readonly("arrivals", &AcStats::arrivals)
      .def_readonly("transmissions", &AcStats::transmissions)
      .def_readonly("external_collisions", &AcStats::external_collisions)
      .def_readonly("virtual_collisions", &AcStats::virtual_collisions)
      .def_readonly("dropped", &AcStats::dropped)
      .def_readonly("backlog", &AcStats::backlog)
      .def("mean_us", &AcStats::mean_us)
      .def("std_us", &AcStats::std_us);

  py::class_<SimStats>(m, "SimStats")
      .def_property_readonly("ac0",
                             [](const SimStats& s) { return s.ac[0]; })
      .def_property_readonly("ac1",
                             [](const SimStats& s) { return s.ac[1]; })
      .def_readonly("packets", &SimStats::packets)
      .def_readonly("busy_fraction", &SimStats::busy_fraction)
      .def_readonly("rounds", &SimStats::rounds);

  py::class_<ReplicateSummary>(m, "ReplicateSummary")
      .def_readonly("values", &ReplicateSummary::values)
      .def_readonly("mean", &ReplicateSummary::mean)
      .def_readonly("std_dev", &ReplicateSummary::std_dev)
      .def_readonly("ci95_half_width", &ReplicateSummary::ci95_half_width);

  m.def("run_simulation", &run_simulation, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("replicate_mean_delay", &replicate_mean_delay, py::arg("config"),
        py::arg("ac"), py::arg("n_reps"),
        py::call_guard<py::gil_scoped_release>());

  // scenario pipeline
  py::class_<ConfigError>(m, "ConfigError")
      .def_readonly("field", &ConfigError::field)
      .def_readonly("message", &ConfigError::message)
      .def("__repr__", [](const ConfigError& e) {
        return e.field + ": " + e.message;
      });

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("platoon", &ScenarioConfig::platoon)
      .def_readwrite("traffic", &ScenarioConfig::traffic)
      .def_readwrite("rate_models", &ScenarioConfig::rate_models)
      .def_readwrite("edca", &ScenarioConfig::edca)
      .def_readwrite("sweep_start", &ScenarioConfig::sweep_start)
      .def_readwrite("sweep_stop", &ScenarioConfig::sweep_stop)
      .def_readwrite("sweep_step", &ScenarioConfig::sweep_step)
      .def_readwrite("delay_budget_fraction",
                     &ScenarioConfig::delay_budget_fraction)
      .def_readwrite("output_dir", &ScenarioConfig::output_dir)
      .def_readwrite("workers", &ScenarioConfig::workers)
      .def_readwrite("des_enabled", &ScenarioConfig::des_enabled)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def("headway_grid", &ScenarioConfig::headway_grid)
      .def("hash", &ScenarioConfig::hash)
      .def("serialize", &ScenarioConfig::serialize);

  py::class_<TrafficMix>(m, "TrafficMix")
      .def(py::init<>())
      .def_readwrite("gap", &TrafficMix::gap)
      .def_readwrite("rate", &TrafficMix::rate)
      .def_readwrite("lambda1", &TrafficMix::lambda1);

  py::class_<CellResult>(m, "CellResult")
      .def_readonly("headway", &CellResult::headway)
      .def_readonly("rate", &CellResult::rate)
      .def_readonly("gap_p", &CellResult::gap_p)
      .def_readonly("lambda0", &CellResult::lambda0)
      .def_readonly("n_cs", &CellResult::n_cs)
      .def_readonly("fp", &CellResult::fp)
      .def_property_readonly(
          "moments",
          [](const CellResult& c) {
            return std::vector<DelayMoments>{c.moments[0], c.moments[1]};
          })
      .def_property_readonly("fit", [](const CellResult& c) {
        return std::vector<CdfFit>{c.fit[0], c.fit[1]};
      });

  py::class_<DynamicsResult>(m, "DynamicsResult")
      .def_readonly("headway", &DynamicsResult::headway)
      .def_readonly("fvd", &DynamicsResult::fvd)
      .def_readonly("tau_cr", &DynamicsResult::tau_cr)
      .def_readonly("budget_s", &DynamicsResult::budget_s);

  py::class_<CellDiagnostic>(m, "CellDiagnostic")
      .def_readonly("headway", &CellDiagnostic::headway)
      .def_readonly("stage", &CellDiagnostic::stage)
      .def_readonly("message", &CellDiagnostic::message);

  py::class_<ScenarioResult>(m, "ScenarioResult")
      .def_readonly("dynamics", &ScenarioResult::dynamics)
      .def_readonly("cells", &ScenarioResult::cells)
      .def_readonly("diagnostics", &ScenarioResult::diagnostics)
      .def_readonly("config_hash", &ScenarioResult::config_hash);

  m.def(
      "validate_config",
      [](const std::string& text) {
        ConfigParseResult r = validate_config(text);
        return py::make_tuple(r.config ? py::cast(*r.config) : py::none(),
                              r.errors);
      },
      py::arg("text"));
  m.def("run_pipeline", &run_pipeline, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_pipeline_in_memory", &run_pipeline_in_memory, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}
