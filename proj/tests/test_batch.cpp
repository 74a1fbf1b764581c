#include <doctest.h>

#include "polctl/batch.hpp"
#include "polctl/experiments.hpp"
#include "polctl/rng.hpp"

using namespace polctl;

TEST_CASE("run_jobs: parallel results equal the serial reference") {
  auto job = [](std::size_t i) {
    RngStream rng(derive_seed(99, i));
    double acc = 0.0;
    for (int k = 0; k < 1000; ++k) acc += rng.normal();
    return acc;
  };
  auto serial = run_jobs<double>(64, job, false);
  auto parallel = run_jobs<double>(64, job, true);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("sweep rows are identical across serial, parallel and repeated runs") {
  ScenarioConfig cfg = preset("sweep");
  cfg.sweep_tau_domega = {0.0, 0.1, 0.3};
  cfg.sweep_seeds = 4;
  cfg.warmup_max_s = 0.4;
  cfg.measure_s = 0.15;
  std::string serial = sweep_csv(experiment_sweep(cfg, false));
  std::string parallel = sweep_csv(experiment_sweep(cfg, true));
  std::string again = sweep_csv(experiment_sweep(cfg, true));
  CHECK(serial == parallel);
  CHECK(parallel == again);
}
