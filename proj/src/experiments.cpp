#include "polctl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polctl/batch.hpp"
#include "polctl/errors.hpp"
#include "polctl/textio.hpp"

namespace polctl {

namespace {

constexpr double kDegPerRad = 57.29577951308232;

// sub-seed salts: 1 drift, 2 geometry/init, 3 detector noise, 4 photon
// counting, 5 oracle sampling
enum : std::uint64_t { kSaltDrift = 1, kSaltGeometry = 2, kSaltNoise = 3, kSaltCounts = 4, kSaltOracle = 5 };

struct Runtime {
  FiberChannel ch;
  ControllerState ctrl;
  ReferenceBasis basis;
  RngStream noise_rng;
  JonesVector signal;
  double cycle;
};

Runtime make_runtime(const ScenarioConfig& cfg, std::uint64_t seed) {
  ChannelSpec spec = make_channel_spec(cfg);
  spec.seed = derive_seed(seed, kSaltDrift);
  JonesMatrix u0 = JonesMatrix::identity();
  if (cfg.channel_init == ChannelInit::Haar) {
    RngStream init_rng(derive_seed(seed, kSaltGeometry));
    u0 = haar_random(init_rng);
  }
  return Runtime{FiberChannel(spec, u0), make_controller_state(cfg), make_reference_basis(cfg),
                 RngStream(derive_seed(seed, kSaltNoise)), stokes_to_jones(cfg.signal_stokes),
                 cycle_period_s(cfg)};
}

void drift_one_cycle(FiberChannel& ch, double cycle, double dt) {
  int n_sub = dt == 0.0 ? 1 : std::max(1, static_cast<int>(std::llround(cycle / dt)));
  double dt_eff = cycle / n_sub;
  for (int s = 0; s < n_sub; ++s) ch.step(dt_eff);
}

/// Run unrecorded control cycles until convergence is declared or the
/// budget runs out. Returns whether the tracker fired.
bool warmup(Runtime& rt, const ScenarioConfig& cfg) {
  if (!cfg.control_on || cfg.warmup_max_s <= 0.0) return !cfg.control_on;
  auto budget = std::llround(cfg.warmup_max_s / rt.cycle);
  ConvergenceTracker tracker(cfg.converge_threshold, cfg.converge_cycles);
  for (std::int64_t c = 0; c < budget; ++c) {
    StepReport rep = control_step(rt.ctrl, rt.ch, rt.basis, cfg.noise_std, rt.noise_rng);
    drift_one_cycle(rt.ch, rt.cycle, cfg.dt_s);
    tracker.update(rep.last);
    if (tracker.converged()) return true;
  }
  return false;
}

double analyzer_power(const Runtime& rt) {
  auto [r1, r3] = realize(rt.ctrl);
  JonesVector out = apply(r3 * (r1 * rt.ch.transfer(rt.ch.spec().omega0)), rt.signal);
  return fidelity(rt.signal, out);
}

}  // namespace

RunSummary summarize(const std::vector<LoopRecord>& series) {
  RunSummary s;
  if (series.empty()) return s;
  std::vector<double> angles;
  angles.reserve(series.size());
  double dev_sum = 0.0, loss_sum = 0.0;
  for (const auto& r : series) {
    angles.push_back(r.deviation);
    dev_sum += r.deviation;
    loss_sum += r.loss;
    s.max_deviation_deg = std::max(s.max_deviation_deg, r.deviation * kDegPerRad);
    s.max_added_loss = std::max(s.max_added_loss, r.loss);
  }
  s.mean_deviation_deg = dev_sum / series.size() * kDegPerRad;
  s.mean_added_loss = loss_sum / series.size();
  s.qber_added = qber_added(angles);
  return s;
}

RunResult experiment_run(const ScenarioConfig& cfg) {
  Runtime rt = make_runtime(cfg, cfg.seed);
  warmup(rt, cfg);
  LoopSchedule sched{cfg.dt_s, cfg.duration_s, rt.cycle, cfg.record_every};
  auto series = run_closed_loop(rt.ch, rt.ctrl, rt.basis, sched, cfg.noise_std, rt.noise_rng,
                                rt.signal, cfg.control_on);
  RunSummary s = summarize(series);
  s.iterations = rt.ctrl.iteration;
  s.seed = cfg.seed;
  return {s, std::move(series)};
}

RunResult experiment_recovery(const ScenarioConfig& cfg) {
  if (!cfg.control_on) throw ConfigError("recovery requires experiment.control = on");
  Runtime rt = make_runtime(cfg, cfg.seed);
  bool converged = warmup(rt, cfg);

  double p0 = analyzer_power(rt);
  double t0 = rt.ch.sim_time();
  rt.ch.perturb(cfg.perturb_axis, cfg.perturb_angle_deg / kDegPerRad);

  std::optional<double> t90, tfull;
  double p_kicked = analyzer_power(rt);
  if (p_kicked >= 0.9 * p0) t90 = 0.0;
  if (p_kicked >= 0.999 * p0) tfull = 0.0;

  LoopSchedule sched{cfg.dt_s, cfg.duration_s, rt.cycle, cfg.record_every};
  auto series = run_closed_loop(rt.ch, rt.ctrl, rt.basis, sched, cfg.noise_std, rt.noise_rng,
                                rt.signal, true);
  for (auto& r : series) r.t -= t0;  // time measured from the perturbation

  for (const auto& r : series) {
    double power = 1.0 - r.loss;
    if (!t90 && power >= 0.9 * p0) t90 = r.t;
    if (!tfull && power >= 0.999 * p0) tfull = r.t;
    if (t90 && tfull) break;
  }

  RunSummary s = summarize(series);
  s.iterations = rt.ctrl.iteration;
  s.seed = cfg.seed;
  s.recovered = converged && t90.has_value() && tfull.has_value();
  s.recovery_time_90_s = t90.value_or(cfg.duration_s);
  s.recovery_time_full_s = tfull.value_or(cfg.duration_s);
  return {s, std::move(series)};
}

namespace {

struct SweepCell {
  double mean_dev_deg = 0.0;
  double max_dev_deg = 0.0;
  double mean_loss = 0.0;
  double qber = 0.0;
  std::uint64_t cycles = 0;
  bool ok = false;
};

SweepCell sweep_job(const ScenarioConfig& cfg, double tau_domega, std::uint64_t job_seed) {
  SweepCell cell;
  try {
    RngStream geom(derive_seed(job_seed, kSaltGeometry));
    ChannelSpec spec = make_channel_spec(cfg);
    spec.dgd_tau = tau_domega / delta_omega(cfg);
    spec.pmd_axis = random_unit_stokes(geom);
    spec.seed = derive_seed(job_seed, kSaltDrift);
    FiberChannel ch(spec, haar_random(geom));
    ControllerState ctrl = make_controller_state(cfg);
    ReferenceBasis basis = make_reference_basis(cfg);
    RngStream noise(derive_seed(job_seed, kSaltNoise));
    JonesVector signal = stokes_to_jones(random_unit_stokes(geom));
    double cycle = cycle_period_s(cfg);

    auto budget = std::llround(cfg.warmup_max_s / cycle);
    ConvergenceTracker tracker(cfg.converge_threshold, cfg.converge_cycles);
    for (std::int64_t c = 0; c < budget && !tracker.converged(); ++c) {
      StepReport rep = control_step(ctrl, ch, basis, cfg.noise_std, noise);
      drift_one_cycle(ch, cycle, cfg.dt_s);
      tracker.update(rep.last);
    }

    LoopSchedule sched{cfg.dt_s, cfg.measure_s, cycle, 1};
    auto series = run_closed_loop(ch, ctrl, basis, sched, cfg.noise_std, noise, signal, true);
    RunSummary s = summarize(series);
    cell = {s.mean_deviation_deg, s.max_deviation_deg, s.mean_added_loss, s.qber_added,
            ctrl.iteration, true};
  } catch (const std::exception&) {
    cell.ok = false;  // surfaced after the parallel region
  }
  return cell;
}

}  // namespace

std::vector<SweepRow> experiment_sweep(const ScenarioConfig& cfg, bool parallel) {
  const auto& grid = cfg.sweep_tau_domega;
  const int seeds = cfg.sweep_seeds;
  const std::size_t n_jobs = grid.size() * static_cast<std::size_t>(seeds);

  auto cells = run_jobs<SweepCell>(
      n_jobs,
      [&](std::size_t job) {
        std::size_t g = job / seeds;
        std::size_t s = job % seeds;
        std::uint64_t job_seed = derive_seed(derive_seed(cfg.seed, 100 + g), s);
        return sweep_job(cfg, grid[g], job_seed);
      },
      parallel);

  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SweepRow row;
    row.tau_domega = grid[g];
    row.dgd_ps = grid[g] / delta_omega(cfg) * 1e12;
    row.seeds = seeds;
    for (int s = 0; s < seeds; ++s) {
      const SweepCell& cell = cells[g * seeds + s];
      if (!cell.ok) throw SolverError("sweep job failed at grid point " + std::to_string(g));
      row.mean_deviation_deg += cell.mean_dev_deg / seeds;
      row.max_deviation_deg = std::max(row.max_deviation_deg, cell.max_dev_deg);
      row.mean_added_loss += cell.mean_loss / seeds;
      row.qber_added += cell.qber / seeds;
      row.cycles_per_seed = cell.cycles;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<CountRow> experiment_counts(const ScenarioConfig& cfg) {
  Runtime rt = make_runtime(cfg, cfg.seed);
  warmup(rt, cfg);
  auto [r1, r3] = realize(rt.ctrl);
  JonesMatrix m0 = r3 * (r1 * rt.ch.transfer(rt.ch.spec().omega0));
  DetectorParams det = make_detector_params(cfg);
  RngStream counts_rng(derive_seed(cfg.seed, kSaltCounts));

  struct Input {
    const char* label;
    JonesVector state;
  };
  const Input inputs[] = {{"H", jones_h()}, {"D45", jones_d45()}};

  std::vector<CountRow> rows;
  for (const Input& in : inputs) {
    StokesVector received = jones_to_stokes(apply(m0, in.state));
    for (double chi = 0.0; chi < 180.0 - 1e-9; chi += cfg.analyzer_step_deg) {
      double eq = 2.0 * chi / kDegPerRad;
      StokesVector analyzer{std::cos(eq), std::sin(eq), 0.0};
      rows.push_back({in.label, chi,
                      simulate_counts(det, analyzer, received, cfg.gates, counts_rng)});
    }
  }
  return rows;
}

OracleReport experiment_oracle_check(const ScenarioConfig& cfg) {
  RngStream rng(derive_seed(cfg.seed, kSaltOracle));
  OracleReport rep;
  rep.samples = cfg.oracle_samples;
  const JonesVector s1 = jones_h();
  const JonesVector s3 = jones_d45();
  const JonesMatrix eye = JonesMatrix::identity();

  auto check = [&](const JonesMatrix& t, double phi, double& max_dist) {
    OracleSolution sol = oracle_solve(t, phi);
    JonesMatrix m = sol.r3 * (sol.r1 * t);
    max_dist = std::max(max_dist, phase_distance(m, eye));
    rep.min_fidelity_s1 = std::min(rep.min_fidelity_s1, fidelity(apply(m, s1), s1));
    rep.min_fidelity_s3 = std::min(rep.min_fidelity_s3, fidelity(apply(m, s3), s3));
  };

  for (int i = 0; i < cfg.oracle_samples; ++i) check(haar_random(rng), 0.0, rep.max_identity_distance);

  const double family_phis[] = {0.0, M_PI_2, M_PI, 1.5 * M_PI};
  int family_n = std::min(cfg.oracle_samples, 100);
  for (double phi : family_phis)
    for (int i = 0; i < family_n; ++i) check(haar_random(rng), phi, rep.max_family_distance);

  rep.pass = rep.max_identity_distance < 1e-9 && rep.max_family_distance < 1e-9 &&
             rep.min_fidelity_s1 >= 1.0 - 1e-10 && rep.min_fidelity_s3 >= 1.0 - 1e-10;
  return rep;
}

std::string series_csv(const std::vector<LoopRecord>& series) {
  std::string out = "t_s,sig_s1,sig_s2,sig_s3,deviation_deg,loss,i1,i3\n";
  for (const auto& r : series) {
    out += format_double(r.t);
    out += ',';
    out += format_double(r.signal.s1);
    out += ',';
    out += format_double(r.signal.s2);
    out += ',';
    out += format_double(r.signal.s3);
    out += ',';
    out += format_double(r.deviation * kDegPerRad);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += format_double(r.i1);
    out += ',';
    out += format_double(r.i3);
    out += '\n';
  }
  return out;
}

std::string summary_text(const RunSummary& s) {
  std::string out;
  auto line = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  };
  line("mean_deviation_deg", format_double(s.mean_deviation_deg));
  line("max_deviation_deg", format_double(s.max_deviation_deg));
  line("mean_added_loss", format_double(s.mean_added_loss));
  line("max_added_loss", format_double(s.max_added_loss));
  line("qber_added", format_double(s.qber_added));
  if (s.recovery_time_90_s) line("recovery_time_90_s", format_double(*s.recovery_time_90_s));
  if (s.recovery_time_full_s) line("recovery_time_full_s", format_double(*s.recovery_time_full_s));
  if (s.recovery_time_90_s || s.recovery_time_full_s)
    line("recovered", s.recovered ? "true" : "false");
  line("iterations", std::to_string(s.iterations));
  line("seed", std::to_string(s.seed));
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "tau_domega,dgd_ps,mean_deviation_deg,max_deviation_deg,mean_added_loss,qber_added,"
      "cycles_per_seed,seeds\n";
  for (const auto& r : rows) {
    out += format_double(r.tau_domega);
    out += ',';
    out += format_double(r.dgd_ps);
    out += ',';
    out += format_double(r.mean_deviation_deg);
    out += ',';
    out += format_double(r.max_deviation_deg);
    out += ',';
    out += format_double(r.mean_added_loss);
    out += ',';
    out += format_double(r.qber_added);
    out += ',';
    out += std::to_string(r.cycles_per_seed);
    out += ',';
    out += std::to_string(r.seeds);
    out += '\n';
  }
  return out;
}

std::string counts_csv(const std::vector<CountRow>& rows) {
  std::string out = "input,analyzer_deg,analyzer_s1,analyzer_s2,analyzer_s3,gates,clicks\n";
  for (const auto& r : rows) {
    out += r.input;
    out += ',';
    out += format_double(r.analyzer_deg);
    out += ',';
    out += format_double(r.record.analyzer_stokes.s1);
    out += ',';
    out += format_double(r.record.analyzer_stokes.s2);
    out += ',';
    out += format_double(r.record.analyzer_stokes.s3);
    out += ',';
    out += std::to_string(r.record.gates);
    out += ',';
    out += std::to_string(r.record.clicks);
    out += '\n';
  }
  return out;
}

std::string oracle_text(const OracleReport& rep) {
  std::string out;
  out += "samples = " + std::to_string(rep.samples) + "\n";
  out += "max_identity_distance = " + format_double(rep.max_identity_distance) + "\n";
  out += "min_fidelity_s1 = " + format_double(rep.min_fidelity_s1) + "\n";
  out += "min_fidelity_s3 = " + format_double(rep.min_fidelity_s3) + "\n";
  out += "max_family_distance = " + format_double(rep.max_family_distance) + "\n";
  out += std::string("pass = ") + (rep.pass ? "true" : "false") + "\n";
  return out;
}

std::vector<LoopRecord> read_series_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != "t_s,sig_s1,sig_s2,sig_s3,deviation_deg,loss,i1,i3")
    throw ConfigError("read_series_csv: unexpected header");
  std::vector<LoopRecord> out;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    double v[8];
    for (int i = 0; i < 8; ++i) {
      if (!std::getline(ls, field, ',')) throw ConfigError("read_series_csv: short row");
      v[i] = std::strtod(field.c_str(), nullptr);
    }
    LoopRecord r;
    r.t = v[0];
    r.signal = {v[1], v[2], v[3]};
    r.deviation = v[4] / kDegPerRad;
    r.loss = v[5];
    r.i1 = v[6];
    r.i3 = v[7];
    out.push_back(r);
  }
  return out;
}

int run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, bool parallel) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::string path = out_dir + "/" + name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file: " + path);
    f << content;
  };

  switch (cfg.kind) {
    case ExperimentKind::Run: {
      RunResult r = experiment_run(cfg);
      write("run_series.csv", series_csv(r.series));
      write("run_summary.txt", summary_text(r.summary));
      return 0;
    }
    case ExperimentKind::Recovery: {
      RunResult r = experiment_recovery(cfg);
      write("recovery_series.csv", series_csv(r.series));
      write("recovery_summary.txt", summary_text(r.summary));
      return 0;
    }
    case ExperimentKind::Sweep: {
      write("sweep_table.csv", sweep_csv(experiment_sweep(cfg, parallel)));
      return 0;
    }
    case ExperimentKind::Counts: {
      write("counts_table.csv", counts_csv(experiment_counts(cfg)));
      return 0;
    }
    case ExperimentKind::OracleCheck: {
      OracleReport rep = experiment_oracle_check(cfg);
      write("oracle_report.txt", oracle_text(rep));
      return rep.pass ? 0 : 1;
    }
  }
  return 2;
}

}  // namespace polctl
