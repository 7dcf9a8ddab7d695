#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "platoonmac/delay.hpp"
#include "platoonmac/des.hpp"
#include "platoonmac/edca.hpp"
#include "platoonmac/platoon.hpp"
#include "platoonmac/traffic.hpp"

namespace platoonmac {

/// Which car-following variants a run covers.
enum class ModelSelect { Fvd, Movm, Both };

/// Everything a sweep needs: platoon dynamics, traffic mix, EDCA constants,
/// the headway grid and reporting knobs. Populated from key-value config
/// text (dotted paths, one `key = value` per line).
struct ScenarioConfig {
  PlatoonModel platoon;            ///< l gives the FVD value; MOVM uses l = 0
  TrafficMix traffic;
  std::vector<RateKind> rate_models = {RateKind::Linear, RateKind::Quadratic,
                                       RateKind::Sigmoidal,
                                       RateKind::Logarithmic};
  EdcaParams edca;
  double sweep_start = 2.0;        ///< m
  double sweep_stop = 10.0;        ///< m
  double sweep_step = 1.0;         ///< m
  double delay_budget_fraction = 0.10;
  ModelSelect model = ModelSelect::Both;
  std::string output_dir = ".";
  int workers = 0;                 ///< 0 = hardware concurrency

  bool des_enabled = false;        ///< run the simulator alongside
  double des_duration_s = 5.0;
  double des_warmup_s = 1.0;
  int des_replications = 4;
  std::uint64_t seed = 1;

  std::vector<double> headway_grid() const;
  /// FNV-1a hash over the canonical serialization, hex string.
  std::string hash() const;
  std::string serialize() const;
};

struct ConfigError {
  std::string field;               ///< dotted path, e.g. "edca.cw_max1"
  std::string message;
};

/// Parses and validates config text. Reports every violation, not just the
/// first. Unknown keys are errors.
struct ConfigParseResult {
  std::optional<ScenarioConfig> config;  ///< set iff errors is empty
  std::vector<ConfigError> errors;
};
ConfigParseResult validate_config(const std::string& text);

/// One grid cell of the analytic sweep.
struct CellResult {
  double headway = 0;
  RateKind rate = RateKind::Linear;
  double gap_p = 0;
  double lambda0 = 0;
  int n_cs = 0;
  FixedPointSolution fp;
  DelayMoments moments[2];
  CdfFit fit[2];
  DelayDistribution dist[2];
  double reliability_fvd[2] = {0, 0};    ///< fitted CDF at the FVD budget
  double reliability_movm[2] = {0, 0};
  double reliability_fvd_exact[2] = {0, 0};
  double reliability_movm_exact[2] = {0, 0};
};

struct DynamicsResult {
  double headway = 0;
  bool fvd = false;                ///< else MOVM
  double tau_cr = 0;
  double budget_s = 0;
  double v_prime = 0;
  double d_tilde = 0;
};

struct CellDiagnostic {
  double headway = 0;
  std::string stage;               ///< which pipeline step failed
  std::string message;
};

struct ScenarioResult {
  std::vector<DynamicsResult> dynamics;
  std::vector<CellResult> cells;
  std::vector<CellDiagnostic> diagnostics;
  std::string config_hash;
};

/// Runs the full per-headway pipeline (workers cells at a time) and writes
/// one CSV per reported figure into cfg.output_dir:
/// fig2_critical_delay.csv, fig3_mean_delay.csv, fig4_std.csv,
/// fig5_cdf.csv, fig7_reliability_fvd.csv, fig8_reliability_movm.csv,
/// table5_regression.csv, plus des_comparison.csv when the simulator is
/// enabled. A failing cell is recorded in diagnostics and skipped; the
/// other cells still complete. Files are written atomically.
ScenarioResult run_pipeline(const ScenarioConfig& cfg);

/// Variant that only computes; no files written.
ScenarioResult run_pipeline_in_memory(const ScenarioConfig& cfg);

/// Writes the figure CSVs for an already-computed result.
void write_reports(const ScenarioResult& r, const ScenarioConfig& cfg);

}  // namespace platoonmac
