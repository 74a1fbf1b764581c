#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polctl/controller.hpp"
#include "polctl/detection.hpp"
#include "polctl/fiber.hpp"

namespace polctl {

enum class ExperimentKind { Run, Recovery, Sweep, Counts, OracleCheck };
enum class ChannelInit { Identity, Haar };
enum class ReferenceMux { Wavelength, Time };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Full scenario description. One flat key = value file with dotted section
/// prefixes; unknown keys, duplicates and out-of-range values are hard
/// errors so a typo can never silently change the physics.
struct ScenarioConfig {
  std::uint64_t seed = 1;

  // channel.*
  double dgd_ps = 0.0;
  StokesVector pmd_axis{0.0, 0.0, 1.0};
  double delta_lambda_nm = 0.8;
  double lambda_nm = 1550.0;
  double drift_rate = 0.0;  // rad/sqrt(s)
  ChannelInit channel_init = ChannelInit::Haar;
  ReferenceMux reference_mux = ReferenceMux::Wavelength;

  // controller.*
  double loop_period_us = 25.0;  // per actuator probe
  double dither_init_rad = 0.1;
  double dither_min_rad = 0.01;
  double dither_max_rad = 0.5;
  double noise_std = 0.0;
  double extinction_db = 300.0;  // polarizer rejection; 300 dB is effectively ideal
  double converge_threshold = 1e-4;
  int converge_cycles = 10;

  // detector.*
  double mu = 0.2;
  double gate_ns = 2.5;
  double gate_rate_khz = 100.0;
  double dark_per_ns = 4e-5;
  double efficiency = 1.0;
  double crosstalk = 0.0;

  // experiment.*
  ExperimentKind kind = ExperimentKind::Run;
  double duration_s = 10.0;
  double warmup_max_s = 5.0;
  bool control_on = true;
  int record_every = 1;
  double dt_s = 0.0;  // 0 = one drift step per control cycle
  StokesVector signal_stokes{0.5773502691896258, 0.5773502691896258, 0.5773502691896258};
  double perturb_angle_deg = 90.0;
  StokesVector perturb_axis{0.0, 0.0, 1.0};
  std::vector<double> sweep_tau_domega{0.0, 0.05, 0.1, 0.2, 0.3, 0.5};
  int sweep_seeds = 20;
  double measure_s = 1.0;
  double analyzer_step_deg = 5.0;
  std::int64_t gates = 1000000;
  int oracle_samples = 1000;

  // output.*
  std::string output_dir = ".";
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

/// Range/consistency checks; throws ConfigError. Unit vectors are accepted
/// to 1e-6 and renormalized exactly.
void validate_config(ScenarioConfig& cfg);

// Derived quantities and assembled module parameters.
double delta_omega(const ScenarioConfig& cfg);       // rad/s
double omega0(const ScenarioConfig& cfg);            // rad/s
double probe_period_s(const ScenarioConfig& cfg);    // one actuator probe
double cycle_period_s(const ScenarioConfig& cfg);    // one full control cycle (15 probes)
ChannelSpec make_channel_spec(const ScenarioConfig& cfg);
DetectorParams make_detector_params(const ScenarioConfig& cfg);
ControllerState make_controller_state(const ScenarioConfig& cfg);
ReferenceBasis make_reference_basis(const ScenarioConfig& cfg);

/// Number of feedback probes consumed by one control cycle (3 per actuator,
/// 5 actuators).
constexpr int kProbesPerCycle = 15;

/// Named built-in scenarios (also shipped as files under configs/):
/// paper-point, low-stress, uncontrolled, recovery, sweep, counts,
/// oracle-check.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace polctl
