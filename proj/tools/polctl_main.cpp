#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "polctl/config.hpp"
#include "polctl/errors.hpp"
#include "polctl/experiments.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  bool serial = false;
  bool seed_given = false;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path, "scenario config file")->required();
  cmd->add_option("--out", opt.out_dir, "output directory (default: output.dir from the config)");
  cmd->add_option("--seed", opt.seed, "override the scenario seed")
      ->each([&opt](const std::string&) { opt.seed_given = true; });
  cmd->add_flag("--serial", opt.serial, "run batch jobs on a single thread");
}

int run_kind(polctl::ExperimentKind kind, const CliOptions& opt) {
  polctl::ScenarioConfig cfg = polctl::load_config_file(opt.config_path);
  if (cfg.kind != kind)
    throw polctl::ConfigError("config sets experiment.kind = " + polctl::to_string(cfg.kind) +
                              " but the '" + polctl::to_string(kind) + "' subcommand was invoked");
  // seed precedence: --seed flag > POLCTL_SEED env > config file
  if (opt.seed_given) {
    cfg.seed = opt.seed;
  } else if (const char* env = std::getenv("POLCTL_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw polctl::ConfigError(std::string("POLCTL_SEED is not an unsigned integer: ") + env);
    }
  }
  std::string out_dir = opt.out_dir.empty() ? cfg.output_dir : opt.out_dir;
  int rc = polctl::run_scenario(cfg, out_dir, !opt.serial);
  std::cout << polctl::to_string(cfg.kind) << ": outputs written to " << out_dir
            << (rc == 0 ? "" : " (FAILED)") << "\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop polarization control simulator for fiber quantum channels"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
    polctl::ExperimentKind kind;
  };
  const Sub subs[] = {
      {"run", "closed-loop (or free-running) drift experiment", polctl::ExperimentKind::Run},
      {"recovery", "step-perturbation recovery experiment", polctl::ExperimentKind::Recovery},
      {"sweep", "residual error vs tau*delta_omega grid", polctl::ExperimentKind::Sweep},
      {"counts", "photon counting analyzer sweep", polctl::ExperimentKind::Counts},
      {"oracle-check", "verify the analytic control solution", polctl::ExperimentKind::OracleCheck},
  };

  CliOptions opts[std::size(subs)];
  for (std::size_t i = 0; i < std::size(subs); ++i)
    add_common(app.add_subcommand(subs[i].name, subs[i].desc), opts[i]);

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < std::size(subs); ++i)
      if (app.get_subcommand(subs[i].name)->parsed()) return run_kind(subs[i].kind, opts[i]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
