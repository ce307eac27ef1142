#include "disc/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "disc/diagnostics.hpp"
#include "disc/engine_decentralized.hpp"
#include "disc/engine_fusion.hpp"
#include "disc/problems.hpp"
#include "disc/rng.hpp"

namespace disc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config: key '" + key + "' has non-numeric value '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParameterError("config: key '" + key + "' has non-boolean value '" + value + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config: line " + std::to_string(line_no) + " is not key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "problem.name") config.problem = value;
    else if (key == "problem.K") config.K = to_int(key, value);
    else if (key == "problem.n") config.n = to_int(key, value);
    else if (key == "problem.theta") config.theta = to_double(key, value);
    else if (key == "problem.lambda") config.lambda = to_double(key, value);
    else if (key == "problem.mu") config.mu = to_double(key, value);
    else if (key == "problem.l1") config.l1 = to_double(key, value);
    else if (key == "problem.condition") config.condition = to_double(key, value);
    else if (key == "problem.m") config.m = to_int(key, value);
    else if (key == "problem.r") config.r = to_int(key, value);
    else if (key == "problem.graph") config.graph = value;
    else if (key == "problem.graph_file") config.graph_file = value;
    else if (key == "engine") config.engine = value;
    else if (key == "solver.rho") config.rho = value;
    else if (key == "solver.eta") config.eta = to_double(key, value);
    else if (key == "solver.T") config.T = to_int(key, value);
    else if (key == "solver.eps_stop") config.eps_stop = to_double(key, value);
    else if (key == "solver.inner_tol") config.inner_tol = to_double(key, value);
    else if (key == "solver.inner_iters") config.inner_iters = to_int(key, value);
    else if (key == "solver.parallel") config.parallel = to_bool(key, value);
    else if (key == "delay.tau1") config.tau1 = to_int(key, value);
    else if (key == "delay.tau2") config.tau2 = to_int(key, value);
    else if (key == "delay.drop_prob") config.drop_prob = to_double(key, value);
    else if (key == "delay.z_freq") config.z_freq = to_double(key, value);
    else if (key == "delay.message_loss") config.message_loss = to_double(key, value);
    else if (key == "error.kind") config.error = value;
    else if (key == "error.sigma") config.sigma = to_double(key, value);
    else if (key == "error.step") config.step = to_double(key, value);
    else if (key == "error.bound") config.bound = to_double(key, value);
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(to_double(key, value));
    else if (key == "output_dir") config.output_dir = value;
    else throw ParameterError("config: unknown key '" + key + "'");
  }
  return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open " + path);
  return parse(in);
}

DelayModel ExperimentConfig::delay_model() const {
  DelayModel model;
  model.tau1 = tau1;
  model.tau2 = tau2;
  model.drop_prob = drop_prob;
  model.z_freq = z_freq;
  model.seed = substream(seed, 0x5c4ed);
  return model;
}

ErrorModel ExperimentConfig::error_model() const {
  const std::uint64_t error_seed = substream(seed, 0xe44);
  if (error == "exact") return ErrorModel::exact();
  if (error == "gaussian") return ErrorModel::additive_gaussian(sigma, error_seed);
  if (error == "quantize") return ErrorModel::uniform_quantize(step);
  if (error == "adversarial") return ErrorModel::bounded_adversarial(bound, error_seed);
  throw ParameterError("config: unknown error kind '" + error + "'");
}

namespace {

Graph build_graph(const ExperimentConfig& config) {
  if (config.graph == "path") return Graph::path(config.K);
  if (config.graph == "ring") return Graph::ring(config.K);
  if (config.graph == "complete") return Graph::complete(config.K);
  if (config.graph == "file") {
    std::ifstream in(config.graph_file);
    if (!in) throw ParameterError("config: cannot open graph file " + config.graph_file);
    return Graph::from_edge_list(in);
  }
  throw ParameterError("config: unknown graph '" + config.graph + "'");
}

Recipe build_recipe(const ExperimentConfig& config, const Graph* graph) {
  const std::uint64_t pseed = substream(config.seed, 0x9b0b);
  if (config.engine == "decentralized") {
    return decentralized_quadratic(*graph, config.mu, pseed);
  }
  if (config.problem == "convex_quadratic") {
    return convex_quadratic_consensus(config.K, config.n, pseed, config.mu, config.condition);
  }
  if (config.problem == "nonconvex_regression") {
    return nonconvex_regression(config.K, config.n, config.theta, config.lambda, pseed,
                                config.l1, config.condition);
  }
  if (config.problem == "dc") return dc_problem(config.K, config.n, pseed);
  if (config.problem == "product") return product_problem(config.K, config.n, pseed);
  if (config.problem == "bilinear") return bilinear_factorization(config.m, config.r, pseed);
  throw ParameterError("config: unknown problem '" + config.problem + "'");
}

void write_summary(const std::filesystem::path& dir, const RunTrace& trace, double rho,
                   double wall_seconds, const Vector* optimum) {
  std::ofstream out(dir / "summary.txt");
  char buf[64];
  auto line = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << name << " = " << buf << '\n';
  };
  out << "engine = " << trace.engine << '\n';
  line("rho", rho);
  out << "slots = " << trace.slots_run << '\n';
  out << "stopped_early = " << (trace.stopped_early ? "yes" : "no") << '\n';
  line("final_theta", trace.final_theta());
  line("min_theta", trace.min_theta());
  line("final_consensus_residual",
       trace.rows.empty() ? 0.0 : trace.rows.back().consensus_residual);
  line("final_lagrangian", trace.rows.empty() ? 0.0 : trace.rows.back().lagrangian);
  line("E_T", trace.final_average_error());
  if (optimum) {
    line("distance_to_known_optimum", (trace.final_z - *optimum).norm());
  }
  out << "rho_warning = " << (trace.rho_warning ? "yes" : "no") << '\n';
  line("wall_seconds", wall_seconds);
}

}  // namespace

int run_experiment(const ExperimentConfig& config, const RunOptions& options,
                   RunTrace* out_trace) {
  namespace fs = std::filesystem;
  Graph graph;
  std::optional<Recipe> built;
  SolverConfig solver;
  DelayModel delay;
  ErrorModel error;
  double rho = 0.0;
  try {
    if (config.engine != "fusion" && config.engine != "decentralized") {
      throw ParameterError("config: unknown engine '" + config.engine + "'");
    }
    if (config.T < 1) throw ParameterError("config: solver.T must be >= 1");
    if (config.engine == "decentralized") graph = build_graph(config);
    built.emplace(build_recipe(config, &graph));
    delay = config.delay_model();
    error = config.error_model();

    if (config.rho == "auto") {
      rho = 2.0 * rho_min(built->problem, delay.tau());
    } else {
      rho = to_double("solver.rho", config.rho);
    }
    if (rho <= 0.0) throw ParameterError("config: solver.rho must be positive");
    if (config.eta <= 0.0) throw ParameterError("config: solver.eta must be positive");

    solver.rho = rho;
    solver.eta = config.eta;
    solver.horizon = config.T;
    solver.stop_eps = config.eps_stop;
    solver.inner_tol = config.inner_tol;
    solver.inner_max_iters = config.inner_iters;
    solver.strict_rho = options.strict_rho;
    solver.parallel = config.parallel;
  } catch (const ParameterError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  }

  const Recipe& recipe = *built;
  Schedule schedule;
  try {
    schedule = generate(delay, config.T, recipe.problem.nodes());
  } catch (const ScheduleError& e) {
    std::cerr << "schedule infeasible: " << e.what() << '\n';
    return kScheduleInfeasible;
  }

  const auto start = std::chrono::steady_clock::now();
  RunTrace trace;
  try {
    if (config.engine == "fusion") {
      trace = run_fusion(recipe.problem, solver, schedule, error, &recipe.surrogates);
    } else {
      MessageLossModel loss;
      loss.prob = config.message_loss;
      loss.seed = substream(config.seed, 0x10c5);
      loss.max_staleness = std::max(1, config.tau1);
      trace = run_decentralized(recipe.problem, graph, solver, schedule, error, loss);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const ParameterError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "trace.csv");
    trace.to_csv(out);
  }
  {
    std::ofstream out(dir / "errors.csv");
    trace.ledger.to_csv(out);
  }
  {
    std::ofstream out(dir / "schedule.txt");
    save_schedule(schedule, out);
  }
  {
    std::ofstream out(dir / "constants.txt");
    TheoremConstants::compute(recipe.problem, rho, solver.eta, delay.tau()).dump(out);
  }
  write_summary(dir, trace, rho, wall, recipe.known_optimum ? &*recipe.known_optimum : nullptr);
  if (options.dump_schedule) save_schedule(schedule, std::cout);

  if (!options.quiet) {
    std::cout << "engine=" << trace.engine << " rho=" << rho << " slots=" << trace.slots_run
              << " final_theta=" << trace.final_theta()
              << " E_T=" << trace.final_average_error() << '\n';
    if (trace.rho_warning) {
      std::cout << "warning: rho is at or below rho_min for the observed delays\n";
    }
  }
  if (out_trace) *out_trace = std::move(trace);
  return kOk;
}

int sweep(const ExperimentConfig& config, const std::string& axis,
          const std::vector<double>& values, const RunOptions& options) {
  namespace fs = std::filesystem;
  if (values.empty()) {
    std::cerr << "invalid config: sweep needs at least one value\n";
    return kInvalidConfig;
  }
  if (axis != "T" && axis != "sigma" && axis != "tau1" && axis != "tau2" && axis != "rho") {
    std::cerr << "invalid config: unknown sweep axis '" << axis << "'\n";
    return kInvalidConfig;
  }

  std::vector<RunTrace> traces;
  const fs::path root(config.output_dir);
  for (double value : values) {
    ExperimentConfig point = config;
    if (axis == "T") point.T = static_cast<int>(value);
    if (axis == "sigma") {
      point.error = value == 0.0 ? "exact" : "gaussian";
      point.sigma = value;
    }
    if (axis == "tau1") point.tau1 = static_cast<int>(value);
    if (axis == "tau2") point.tau2 = static_cast<int>(value);
    if (axis == "rho") point.rho = std::to_string(value);

    std::ostringstream sub;
    sub << axis << '=' << value;
    point.output_dir = (root / sub.str()).string();
    traces.emplace_back();
    const int status = run_experiment(point, options, &traces.back());
    if (status != kOk) return status;
  }

  fs::create_directories(root);
  if (traces.size() >= 2) {
    std::vector<const RunTrace*> refs;
    for (const RunTrace& t : traces) refs.push_back(&t);
    const RateSummary summary = rate_summary(refs);
    std::ofstream csv(root / "sweep.csv");
    summary.to_csv(csv);
    std::ofstream txt(root / "sweep.txt");
    txt << "axis = " << axis << '\n' << summary.text();
    if (!options.quiet) std::cout << summary.text();
  } else {
    // single-value sweep degenerates to run_experiment plus this wrapper
    std::ofstream csv(root / "sweep.csv");
    csv << "slots,min_theta,t_times_min_theta,floor_theta,average_error\n";
    char buf[64];
    const RunTrace& t = traces.front();
    csv << t.slots_run;
    for (double v : {t.min_theta(), t.slots_run * t.min_theta(), t.tail_mean_theta(0.1),
                     t.final_average_error()}) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      csv << ',' << buf;
    }
    csv << '\n';
  }
  return kOk;
}

}  // namespace disc
