#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "disc/inexact.hpp"
#include "disc/schedule.hpp"

namespace disc {

/// Flat key-value experiment description (dotted sections, one key per
/// line). Every field has a default so partial configs stay valid.
struct ExperimentConfig {
  // problem.*
  std::string problem = "convex_quadratic";
  int K = 4, n = 10;
  double theta = 0.5, lambda = 0.1, mu = 0.1, l1 = 0.0, condition = 2.0;
  int m = 2, r = 1;
  std::string graph = "path";      // path | ring | complete | file
  std::string graph_file;

  // engine
  std::string engine = "fusion";   // fusion | decentralized

  // solver.*
  std::string rho = "auto";        // "auto" = 2 * rho_min, or a number
  double eta = 1.0;
  int T = 1000;
  double eps_stop = 0.0;
  double inner_tol = 1e-10;
  int inner_iters = 20000;
  bool parallel = true;

  // delay.*
  int tau1 = 0, tau2 = 1;
  double drop_prob = 0.0;
  double z_freq = 0.5;
  double message_loss = 0.0;

  // error.*
  std::string error = "exact";     // exact | gaussian | quantize | adversarial
  double sigma = 0.0, step = 0.0, bound = 0.0;

  std::uint64_t seed = 0;
  std::string output_dir = "out";

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_file(const std::string& path);

  DelayModel delay_model() const;
  ErrorModel error_model() const;
};

struct RunOptions {
  bool quiet = false;
  bool dump_schedule = false;
  bool strict_rho = false;
};

// Exit codes for the experiment runner.
enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 2,
  kDiverged = 3,
  kScheduleInfeasible = 4,
};

/// Builds the problem, generates the schedule, runs the engine, and
/// writes trace.csv, errors.csv, schedule.txt, summary.txt, constants.txt
/// into the output directory. Returns an ExitCode. When `out_trace` is
/// non-null the full trace is also handed back for in-process analysis.
int run_experiment(const ExperimentConfig& config, const RunOptions& options = {},
                   struct RunTrace* out_trace = nullptr);

/// Runs the config once per value of `axis` (T, sigma, tau1, tau2, rho)
/// with a shared seed and writes sweep.csv plus a rate summary.
int sweep(const ExperimentConfig& config, const std::string& axis,
          const std::vector<double>& values, const RunOptions& options = {});

}  // namespace disc
