// Experiment runner: build problem -> generate schedule -> run engine ->
// emit trace and diagnostics artifacts.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "disc/errors.hpp"
#include "disc/experiment.hpp"
#include "disc/schedule.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DISC-ADMM solver and asynchrony simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::int64_t seed_override = -1;
  bool quiet = false, dump_schedule = false, strict_rho = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "path to the experiment config")->required();
    cmd->add_option("--seed", seed_override, "override the config seed");
    cmd->add_option("--output", output_dir, "override the output directory");
    cmd->add_flag("--quiet", quiet, "suppress progress output");
    cmd->add_flag("--strict-rho", strict_rho, "fail instead of warn when rho <= rho_min");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run a single experiment");
  add_common(run_cmd);
  run_cmd->add_flag("--dump-schedule", dump_schedule, "print the generated schedule");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep_cmd);
  std::string axis;
  std::vector<double> values;
  sweep_cmd->add_option("--axis", axis, "parameter to sweep: T, sigma, tau1, tau2, rho")
      ->required();
  sweep_cmd->add_option("--values", values, "values for the swept parameter")
      ->required()
      ->delimiter(',');

  CLI::App* sched_cmd = app.add_subcommand("schedule", "generate and dump a schedule");
  std::int64_t sT = 100, sK = 4;
  disc::DelayModel delay;
  std::string sched_out;
  sched_cmd->add_option("--T", sT, "horizon");
  sched_cmd->add_option("--K", sK, "node count");
  sched_cmd->add_option("--tau1", delay.tau1, "gradient age bound");
  sched_cmd->add_option("--tau2", delay.tau2, "update gap bound");
  sched_cmd->add_option("--drop-prob", delay.drop_prob, "drop probability");
  sched_cmd->add_option("--z-freq", delay.z_freq, "z update frequency bound");
  std::int64_t sched_seed = 0;
  sched_cmd->add_option("--seed", sched_seed, "schedule seed");
  sched_cmd->add_option("--out", sched_out, "write to this file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sched_cmd->parsed()) {
      delay.seed = static_cast<std::uint64_t>(sched_seed);
      const disc::Schedule schedule =
          disc::generate(delay, static_cast<int>(sT), static_cast<int>(sK));
      if (sched_out.empty()) {
        disc::save_schedule(schedule, std::cout);
      } else {
        std::ofstream out(sched_out);
        disc::save_schedule(schedule, out);
      }
      return 0;
    }

    disc::ExperimentConfig config = disc::ExperimentConfig::parse_file(config_path);
    if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
    if (!output_dir.empty()) config.output_dir = output_dir;
    disc::RunOptions options{quiet, dump_schedule, strict_rho};

    if (run_cmd->parsed()) return disc::run_experiment(config, options);
    return disc::sweep(config, axis, values, options);
  } catch (const disc::ScheduleError& e) {
    std::cerr << "schedule infeasible: " << e.what() << '\n';
    return disc::kScheduleInfeasible;
  } catch (const disc::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return disc::kDiverged;
  } catch (const disc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return disc::kInvalidConfig;
  }
}
