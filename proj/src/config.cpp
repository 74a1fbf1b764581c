#include "polctl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "polctl/errors.hpp"
#include "polctl/textio.hpp"

namespace polctl {

namespace {

using polctl::format_double;

std::string fmt_double(double v) { return format_double(v); }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  double out = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(out))
    throw ConfigError("invalid number for '" + key + "': " + v);
  return out;
}

long long parse_int(const std::string& v, const std::string& key) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("invalid integer for '" + key + "': " + v);
  return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("invalid unsigned integer for '" + key + "': " + v);
  return out;
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty element in list for '" + key + "'");
    out.push_back(parse_double(item, key));
  }
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

std::string fmt_double_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt_double(v[i]);
  }
  return out;
}

struct KeyHandler {
  const char* key;
  std::function<void(ScenarioConfig&, const std::string&)> parse;
  std::function<std::string(const ScenarioConfig&)> write;
};

// double field helper
KeyHandler dbl(const char* key, double ScenarioConfig::* f) {
  return {key,
          [key, f](ScenarioConfig& c, const std::string& v) { c.*f = parse_double(v, key); },
          [f](const ScenarioConfig& c) { return fmt_double(c.*f); }};
}

const std::vector<KeyHandler>& handlers() {
  static const std::vector<KeyHandler> h = {
      {"seed",
       [](ScenarioConfig& c, const std::string& v) { c.seed = parse_u64(v, "seed"); },
       [](const ScenarioConfig& c) { return std::to_string(c.seed); }},

      dbl("channel.dgd_ps", &ScenarioConfig::dgd_ps),
      {"channel.pmd_axis_s1",
       [](ScenarioConfig& c, const std::string& v) { c.pmd_axis.s1 = parse_double(v, "channel.pmd_axis_s1"); },
       [](const ScenarioConfig& c) { return fmt_double(c.pmd_axis.s1); }},
      {"channel.pmd_axis_s2",
       [](ScenarioConfig& c, const std::string& v) { c.pmd_axis.s2 = parse_double(v, "channel.pmd_axis_s2"); },
       [](const ScenarioConfig& c) { return fmt_double(c.pmd_axis.s2); }},
      {"channel.pmd_axis_s3",
       [](ScenarioConfig& c, const std::string& v) { c.pmd_axis.s3 = parse_double(v, "channel.pmd_axis_s3"); },
       [](const ScenarioConfig& c) { return fmt_double(c.pmd_axis.s3); }},
      dbl("channel.delta_lambda_nm", &ScenarioConfig::delta_lambda_nm),
      dbl("channel.lambda_nm", &ScenarioConfig::lambda_nm),
      dbl("channel.drift_rate", &ScenarioConfig::drift_rate),
      {"channel.init",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "identity") c.channel_init = ChannelInit::Identity;
         else if (v == "haar") c.channel_init = ChannelInit::Haar;
         else throw ConfigError("channel.init must be identity|haar, got '" + v + "'");
       },
       [](const ScenarioConfig& c) {
         return std::string(c.channel_init == ChannelInit::Identity ? "identity" : "haar");
       }},
      {"channel.reference_mux",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "wavelength") c.reference_mux = ReferenceMux::Wavelength;
         else if (v == "time") c.reference_mux = ReferenceMux::Time;
         else throw ConfigError("channel.reference_mux must be wavelength|time, got '" + v + "'");
       },
       [](const ScenarioConfig& c) {
         return std::string(c.reference_mux == ReferenceMux::Wavelength ? "wavelength" : "time");
       }},

      dbl("controller.loop_period_us", &ScenarioConfig::loop_period_us),
      dbl("controller.dither_init_rad", &ScenarioConfig::dither_init_rad),
      dbl("controller.dither_min_rad", &ScenarioConfig::dither_min_rad),
      dbl("controller.dither_max_rad", &ScenarioConfig::dither_max_rad),
      dbl("controller.noise_std", &ScenarioConfig::noise_std),
      dbl("controller.extinction_db", &ScenarioConfig::extinction_db),
      dbl("controller.converge_threshold", &ScenarioConfig::converge_threshold),
      {"controller.converge_cycles",
       [](ScenarioConfig& c, const std::string& v) {
         c.converge_cycles = static_cast<int>(parse_int(v, "controller.converge_cycles"));
       },
       [](const ScenarioConfig& c) { return std::to_string(c.converge_cycles); }},

      dbl("detector.mu", &ScenarioConfig::mu),
      dbl("detector.gate_ns", &ScenarioConfig::gate_ns),
      dbl("detector.gate_rate_khz", &ScenarioConfig::gate_rate_khz),
      dbl("detector.dark_per_ns", &ScenarioConfig::dark_per_ns),
      dbl("detector.efficiency", &ScenarioConfig::efficiency),
      dbl("detector.crosstalk", &ScenarioConfig::crosstalk),

      {"experiment.kind",
       [](ScenarioConfig& c, const std::string& v) { c.kind = experiment_kind_from_string(v); },
       [](const ScenarioConfig& c) { return to_string(c.kind); }},
      dbl("experiment.duration_s", &ScenarioConfig::duration_s),
      dbl("experiment.warmup_max_s", &ScenarioConfig::warmup_max_s),
      {"experiment.control",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "on") c.control_on = true;
         else if (v == "off") c.control_on = false;
         else throw ConfigError("experiment.control must be on|off, got '" + v + "'");
       },
       [](const ScenarioConfig& c) { return std::string(c.control_on ? "on" : "off"); }},
      {"experiment.record_every",
       [](ScenarioConfig& c, const std::string& v) {
         c.record_every = static_cast<int>(parse_int(v, "experiment.record_every"));
       },
       [](const ScenarioConfig& c) { return std::to_string(c.record_every); }},
      dbl("experiment.dt_s", &ScenarioConfig::dt_s),
      {"experiment.signal_s1",
       [](ScenarioConfig& c, const std::string& v) { c.signal_stokes.s1 = parse_double(v, "experiment.signal_s1"); },
       [](const ScenarioConfig& c) { return fmt_double(c.signal_stokes.s1); }},
      {"experiment.signal_s2",
       [](ScenarioConfig& c, const std::string& v) { c.signal_stokes.s2 = parse_double(v, "experiment.signal_s2"); },
       [](const ScenarioConfig& c) { return fmt_double(c.signal_stokes.s2); }},
      {"experiment.signal_s3",
       [](ScenarioConfig& c, const std::string& v) { c.signal_stokes.s3 = parse_double(v, "experiment.signal_s3"); },
       [](const ScenarioConfig& c) { return fmt_double(c.signal_stokes.s3); }},
      dbl("experiment.perturb_angle_deg", &ScenarioConfig::perturb_angle_deg),
      {"experiment.perturb_axis_s1",
       [](ScenarioConfig& c, const std::string& v) { c.perturb_axis.s1 = parse_double(v, "experiment.perturb_axis_s1"); },
       [](const ScenarioConfig& c) { return fmt_double(c.perturb_axis.s1); }},
      {"experiment.perturb_axis_s2",
       [](ScenarioConfig& c, const std::string& v) { c.perturb_axis.s2 = parse_double(v, "experiment.perturb_axis_s2"); },
       [](const ScenarioConfig& c) { return fmt_double(c.perturb_axis.s2); }},
      {"experiment.perturb_axis_s3",
       [](ScenarioConfig& c, const std::string& v) { c.perturb_axis.s3 = parse_double(v, "experiment.perturb_axis_s3"); },
       [](const ScenarioConfig& c) { return fmt_double(c.perturb_axis.s3); }},
      {"experiment.sweep_tau_domega",
       [](ScenarioConfig& c, const std::string& v) {
         c.sweep_tau_domega = parse_double_list(v, "experiment.sweep_tau_domega");
       },
       [](const ScenarioConfig& c) { return fmt_double_list(c.sweep_tau_domega); }},
      {"experiment.sweep_seeds",
       [](ScenarioConfig& c, const std::string& v) {
         c.sweep_seeds = static_cast<int>(parse_int(v, "experiment.sweep_seeds"));
       },
       [](const ScenarioConfig& c) { return std::to_string(c.sweep_seeds); }},
      dbl("experiment.measure_s", &ScenarioConfig::measure_s),
      dbl("experiment.analyzer_step_deg", &ScenarioConfig::analyzer_step_deg),
      {"experiment.gates",
       [](ScenarioConfig& c, const std::string& v) { c.gates = parse_int(v, "experiment.gates"); },
       [](const ScenarioConfig& c) { return std::to_string(c.gates); }},
      {"experiment.oracle_samples",
       [](ScenarioConfig& c, const std::string& v) {
         c.oracle_samples = static_cast<int>(parse_int(v, "experiment.oracle_samples"));
       },
       [](const ScenarioConfig& c) { return std::to_string(c.oracle_samples); }},

      {"output.dir",
       [](ScenarioConfig& c, const std::string& v) { c.output_dir = v; },
       [](const ScenarioConfig& c) { return c.output_dir; }},
  };
  return h;
}

void require_unit_axis(StokesVector& v, const char* key) {
  double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6)
    throw ConfigError(std::string(key) + " must be a unit vector (|norm - 1| <= 1e-6)");
  v = v.normalized();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Run: return "run";
    case ExperimentKind::Recovery: return "recovery";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Counts: return "counts";
    case ExperimentKind::OracleCheck: return "oracle-check";
  }
  return "run";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "run") return ExperimentKind::Run;
  if (s == "recovery") return ExperimentKind::Recovery;
  if (s == "sweep") return ExperimentKind::Sweep;
  if (s == "counts") return ExperimentKind::Counts;
  if (s == "oracle-check") return ExperimentKind::OracleCheck;
  throw ConfigError("experiment.kind must be run|recovery|sweep|counts|oracle-check, got '" + s + "'");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    bool matched = false;
    for (const auto& h : handlers()) {
      if (key == h.key) {
        h.parse(cfg, value);
        matched = true;
        break;
      }
    }
    if (!matched) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& h : handlers()) {
    out += h.key;
    out += " = ";
    out += h.write(cfg);
    out += "\n";
  }
  return out;
}

void validate_config(ScenarioConfig& cfg) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(cfg.dgd_ps >= 0.0, "channel.dgd_ps must be >= 0");
  require(cfg.delta_lambda_nm >= 0.0, "channel.delta_lambda_nm must be >= 0");
  require(cfg.lambda_nm > 0.0, "channel.lambda_nm must be > 0");
  require(cfg.drift_rate >= 0.0, "channel.drift_rate must be >= 0");
  require_unit_axis(cfg.pmd_axis, "channel.pmd_axis");

  require(cfg.loop_period_us > 0.0, "controller.loop_period_us must be > 0");
  require(cfg.dither_min_rad > 0.0, "controller.dither_min_rad must be > 0");
  require(cfg.dither_min_rad <= cfg.dither_init_rad && cfg.dither_init_rad <= cfg.dither_max_rad,
          "controller dither steps must satisfy min <= init <= max");
  require(cfg.noise_std >= 0.0, "controller.noise_std must be >= 0");
  require(cfg.extinction_db >= 0.0, "controller.extinction_db must be >= 0");
  require(cfg.converge_threshold > 0.0 && cfg.converge_threshold < 1.0,
          "controller.converge_threshold must be in (0,1)");
  require(cfg.converge_cycles >= 1, "controller.converge_cycles must be >= 1");

  require(cfg.mu >= 0.0, "detector.mu must be >= 0");
  require(cfg.gate_ns >= 0.0, "detector.gate_ns must be >= 0");
  require(cfg.gate_rate_khz > 0.0, "detector.gate_rate_khz must be > 0");
  require(cfg.dark_per_ns >= 0.0, "detector.dark_per_ns must be >= 0");
  require(cfg.efficiency >= 0.0 && cfg.efficiency <= 1.0, "detector.efficiency must be in [0,1]");
  require(cfg.crosstalk >= 0.0 && cfg.crosstalk <= 1.0, "detector.crosstalk must be in [0,1]");

  require(cfg.duration_s > 0.0, "experiment.duration_s must be > 0");
  require(cfg.warmup_max_s >= 0.0, "experiment.warmup_max_s must be >= 0");
  require(cfg.record_every >= 1, "experiment.record_every must be >= 1");
  require(cfg.dt_s >= 0.0, "experiment.dt_s must be >= 0");
  require(cfg.dt_s == 0.0 || cfg.dt_s <= cycle_period_s(cfg),
          "experiment.dt_s must not exceed the control cycle period");
  require_unit_axis(cfg.signal_stokes, "experiment.signal");
  require(std::isfinite(cfg.perturb_angle_deg), "experiment.perturb_angle_deg must be finite");
  require_unit_axis(cfg.perturb_axis, "experiment.perturb_axis");
  require(!cfg.sweep_tau_domega.empty(), "experiment.sweep_tau_domega must be non-empty");
  for (double v : cfg.sweep_tau_domega)
    require(v >= 0.0, "experiment.sweep_tau_domega entries must be >= 0");
  require(cfg.sweep_seeds >= 1, "experiment.sweep_seeds must be >= 1");
  require(cfg.measure_s > 0.0, "experiment.measure_s must be > 0");
  require(cfg.analyzer_step_deg > 0.0 && cfg.analyzer_step_deg <= 180.0,
          "experiment.analyzer_step_deg must be in (0,180]");
  require(cfg.gates >= 1, "experiment.gates must be >= 1");
  require(cfg.oracle_samples >= 1, "experiment.oracle_samples must be >= 1");
  require(!cfg.output_dir.empty(), "output.dir must be non-empty");
  if (cfg.kind == ExperimentKind::Sweep)
    require(cfg.delta_lambda_nm > 0.0, "sweep requires channel.delta_lambda_nm > 0");
}

double delta_omega(const ScenarioConfig& cfg) {
  return delta_omega_from_delta_lambda(cfg.delta_lambda_nm * 1e-9, cfg.lambda_nm * 1e-9);
}

double omega0(const ScenarioConfig& cfg) { return omega_from_lambda(cfg.lambda_nm * 1e-9); }

double probe_period_s(const ScenarioConfig& cfg) { return cfg.loop_period_us * 1e-6; }

double cycle_period_s(const ScenarioConfig& cfg) {
  return probe_period_s(cfg) * kProbesPerCycle;
}

ChannelSpec make_channel_spec(const ScenarioConfig& cfg) {
  ChannelSpec spec;
  spec.dgd_tau = cfg.dgd_ps * 1e-12;
  spec.pmd_axis = cfg.pmd_axis;
  spec.omega0 = omega0(cfg);
  spec.delta_omega = delta_omega(cfg);
  spec.drift_rate = cfg.drift_rate;
  spec.time_multiplexed = cfg.reference_mux == ReferenceMux::Time;
  spec.seed = derive_seed(cfg.seed, 1);
  return spec;
}

DetectorParams make_detector_params(const ScenarioConfig& cfg) {
  return {cfg.mu, cfg.gate_ns * 1e-9, cfg.gate_rate_khz * 1e3,
          cfg.dark_per_ns, cfg.efficiency, cfg.crosstalk};
}

ControllerState make_controller_state(const ScenarioConfig& cfg) {
  ControllerState ctrl;
  ctrl.dither_step = cfg.dither_init_rad;
  ctrl.dither_min = cfg.dither_min_rad;
  ctrl.dither_max = cfg.dither_max_rad;
  return ctrl;
}

ReferenceBasis make_reference_basis(const ScenarioConfig& cfg) {
  ReferenceBasis basis = ReferenceBasis::standard();
  basis.extinction = std::pow(10.0, -cfg.extinction_db / 10.0);
  return basis;
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig cfg;
  const double aligned = 0.5773502691896258;  // residual rotation axis parallel to the signal SOP
  if (name == "paper-point") {
    cfg.kind = ExperimentKind::Run;
    cfg.seed = 7;
    cfg.dgd_ps = 0.54;
    cfg.pmd_axis = {-aligned, aligned, aligned};
    cfg.drift_rate = 0.3;
    cfg.duration_s = 7200.0;
    cfg.record_every = 256;
  } else if (name == "low-stress") {
    cfg.kind = ExperimentKind::Run;
    cfg.seed = 11;
    cfg.dgd_ps = 0.0797;
    cfg.pmd_axis = {-aligned, aligned, aligned};
    cfg.drift_rate = 0.02;
    cfg.duration_s = 600.0;
    cfg.record_every = 64;
  } else if (name == "uncontrolled") {
    cfg.kind = ExperimentKind::Run;
    cfg.seed = 7;
    cfg.dgd_ps = 0.54;
    cfg.pmd_axis = {-aligned, aligned, aligned};
    cfg.drift_rate = 0.3;
    cfg.duration_s = 7200.0;
    cfg.record_every = 256;
    cfg.control_on = false;
    cfg.warmup_max_s = 0.0;
  } else if (name == "recovery") {
    cfg.kind = ExperimentKind::Recovery;
    cfg.seed = 3;
    cfg.dgd_ps = 0.0;
    cfg.drift_rate = 0.0;
    cfg.duration_s = 0.2;
    cfg.perturb_angle_deg = 90.0;
    cfg.perturb_axis = {0.0, 0.0, 1.0};
  } else if (name == "sweep") {
    cfg.kind = ExperimentKind::Sweep;
    cfg.seed = 5;
    cfg.drift_rate = 0.05;
    cfg.warmup_max_s = 1.5;
    cfg.measure_s = 0.75;
  } else if (name == "counts") {
    cfg.kind = ExperimentKind::Counts;
    cfg.seed = 9;
    cfg.dgd_ps = 0.54;
    cfg.pmd_axis = {-aligned, aligned, aligned};
    cfg.drift_rate = 0.1;
  } else if (name == "oracle-check") {
    cfg.kind = ExperimentKind::OracleCheck;
    cfg.seed = 13;
    cfg.oracle_samples = 1000;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  validate_config(cfg);
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"paper-point", "low-stress", "uncontrolled", "recovery", "sweep", "counts", "oracle-check"};
}

}  // namespace polctl
