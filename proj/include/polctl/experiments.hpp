#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polctl/config.hpp"
#include "polctl/controller.hpp"
#include "polctl/detection.hpp"

namespace polctl {

/// Aggregate statistics of one run; every field is recomputable from the
/// emitted time series.
struct RunSummary {
  double mean_deviation_deg = 0.0;
  double max_deviation_deg = 0.0;
  double mean_added_loss = 0.0;
  double max_added_loss = 0.0;
  double qber_added = 0.0;
  std::optional<double> recovery_time_90_s;
  std::optional<double> recovery_time_full_s;
  bool recovered = true;
  std::uint64_t iterations = 0;  // control cycles executed (warmup included)
  std::uint64_t seed = 0;
};

/// Deviation/loss statistics over a record sequence (recovery fields and
/// counters are left for the caller).
RunSummary summarize(const std::vector<LoopRecord>& series);

struct RunResult {
  RunSummary summary;
  std::vector<LoopRecord> series;
};

/// Closed-loop (or free-running, experiment.control = off) drift run.
RunResult experiment_run(const ScenarioConfig& cfg);

/// Step-perturbation recovery: converge, kick the channel, time the return
/// of the analyzer power to 90% / 99.9% of its pre-kick value.
RunResult experiment_recovery(const ScenarioConfig& cfg);

struct SweepRow {
  double tau_domega = 0.0;
  double dgd_ps = 0.0;
  double mean_deviation_deg = 0.0;
  double max_deviation_deg = 0.0;
  double mean_added_loss = 0.0;
  double qber_added = 0.0;
  std::uint64_t cycles_per_seed = 0;
  int seeds = 0;
};

/// Residual error of the converged loop across a tau*delta_omega grid,
/// averaged over seeds with randomized channel geometry. Grid points and
/// seeds run as independent jobs (OpenMP when `parallel`).
std::vector<SweepRow> experiment_sweep(const ScenarioConfig& cfg, bool parallel = true);

struct CountRow {
  std::string input;          // launched state: "H" or "D45"
  double analyzer_deg = 0.0;  // physical polarizer angle (Stokes equator angle = 2x)
  CountRecord record;
};

/// Fig.-5-style photon counting sweep of the analyzer against the two
/// launched states under active control.
std::vector<CountRow> experiment_counts(const ScenarioConfig& cfg);

struct OracleReport {
  int samples = 0;
  double max_identity_distance = 0.0;  // phase-quotient distance of R3 R1 T from I
  double min_fidelity_s1 = 1.0;
  double min_fidelity_s3 = 1.0;
  double max_family_distance = 0.0;  // over the theta = -phi family
  bool pass = false;
};

/// Batch verification of the analytic control solution on Haar-random
/// channels.
OracleReport experiment_oracle_check(const ScenarioConfig& cfg);

// Deterministic text renderings of the outputs (stable schemas).
std::string series_csv(const std::vector<LoopRecord>& series);
std::string summary_text(const RunSummary& summary);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string counts_csv(const std::vector<CountRow>& rows);
std::string oracle_text(const OracleReport& report);

/// Minimal record parsed back from a series file (controller snapshot is
/// not part of the schema).
std::vector<LoopRecord> read_series_csv(const std::string& text);

/// Run the configured experiment and write its output files into `out_dir`.
/// Returns a process exit code (nonzero when an oracle check fails).
int run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, bool parallel = true);

}  // namespace polctl
