// Compares the serial reference job runner against the OpenMP one on a
// representative sweep workload and checks that both produce identical rows.
#include <chrono>
#include <cstdio>

#include "polctl/batch.hpp"
#include "polctl/config.hpp"
#include "polctl/experiments.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

polctl::ScenarioConfig workload() {
  polctl::ScenarioConfig cfg = polctl::preset("sweep");
  cfg.sweep_seeds = 8;
  cfg.warmup_max_s = 0.5;
  cfg.measure_s = 0.25;
  return cfg;
}

}  // namespace

int main() {
  polctl::ScenarioConfig cfg = workload();
  std::size_t jobs = cfg.sweep_tau_domega.size() * static_cast<std::size_t>(cfg.sweep_seeds);
  std::printf("sweep workload: %zu jobs, %d OpenMP threads available\n", jobs,
              polctl::max_threads());

  auto t0 = Clock::now();
  auto serial = polctl::experiment_sweep(cfg, /*parallel=*/false);
  double t_serial = seconds_since(t0);

  t0 = Clock::now();
  auto parallel = polctl::experiment_sweep(cfg, /*parallel=*/true);
  double t_parallel = seconds_since(t0);

  bool identical = polctl::sweep_csv(serial) == polctl::sweep_csv(parallel);
  std::printf("serial:   %8.3f s\n", t_serial);
  std::printf("parallel: %8.3f s\n", t_parallel);
  std::printf("speedup:  %8.2fx\n", t_serial / t_parallel);
  std::printf("rows identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
