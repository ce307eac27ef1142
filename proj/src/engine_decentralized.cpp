#include "disc/engine_decentralized.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>

#include "disc/diagnostics.hpp"
#include "disc/rng.hpp"

namespace disc {

Graph::Graph(int nodes, std::vector<std::pair<int, int>> edges)
    : nodes_(nodes), edges_(std::move(edges)) {
  if (nodes < 1) throw ParameterError("Graph: need at least one node");
  neighborhoods_.assign(static_cast<size_t>(nodes), {});
  for (int k = 0; k < nodes; ++k) neighborhoods_[static_cast<size_t>(k)].push_back(k);
  for (auto& [a, b] : edges_) {
    if (a < 0 || a >= nodes || b < 0 || b >= nodes) {
      throw ParameterError("Graph: edge endpoint out of range");
    }
    if (a == b) continue;  // self loops are implicit
    neighborhoods_[static_cast<size_t>(a)].push_back(b);
    neighborhoods_[static_cast<size_t>(b)].push_back(a);
  }
  for (auto& nb : neighborhoods_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

Graph Graph::path(int nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k + 1 < nodes; ++k) edges.emplace_back(k, k + 1);
  return Graph(nodes, std::move(edges));
}

Graph Graph::ring(int nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int k = 0; k + 1 < nodes; ++k) edges.emplace_back(k, k + 1);
  if (nodes > 2) edges.emplace_back(nodes - 1, 0);
  return Graph(nodes, std::move(edges));
}

Graph Graph::complete(int nodes) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < nodes; ++a) {
    for (int b = a + 1; b < nodes; ++b) edges.emplace_back(a, b);
  }
  return Graph(nodes, std::move(edges));
}

Graph Graph::from_edge_list(std::istream& in) {
  std::vector<std::pair<int, int>> edges;
  int max_node = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    int a, b;
    if (!(row >> a >> b)) throw ParameterError("Graph: malformed edge line: " + line);
    edges.emplace_back(a, b);
    max_node = std::max({max_node, a, b});
  }
  return Graph(max_node + 1, std::move(edges));
}

void Graph::save(std::ostream& out) const {
  for (const auto& [a, b] : edges_) out << a << ' ' << b << '\n';
}

bool Graph::adjacent(int a, int b) const {
  const auto& nb = neighborhoods_[static_cast<size_t>(a)];
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<CoordMask> Graph::masks() const {
  std::vector<CoordMask> out;
  out.reserve(static_cast<size_t>(nodes_));
  for (int k = 0; k < nodes_; ++k) {
    out.emplace_back(nodes_, neighborhoods_[static_cast<size_t>(k)]);
  }
  return out;
}

DecentralizedState init_decentralized_state(const ConsensusProblem& problem) {
  DecentralizedState state;
  const int K = problem.nodes();
  state.z = problem.feasible().project(Vector::Zero(K));
  state.xs.assign(static_cast<size_t>(K), Vector::Zero(K));
  state.ys.assign(static_cast<size_t>(K), Vector::Zero(K));
  state.views.assign(static_cast<size_t>(K), state.z);
  state.t = 0;
  return state;
}

double zj_update(double z_old, double hs_grad_j, double hs_lipschitz,
                 const std::vector<double>& x_kj, const std::vector<double>& y_kj,
                 double l1_weight, double lower, double upper, const SolverConfig& config) {
  if (x_kj.size() != y_kj.size() || x_kj.empty()) {
    throw ScheduleError("zj_update: neighbor messages missing");
  }
  double numerator = hs_lipschitz * z_old - hs_grad_j;
  for (size_t i = 0; i < x_kj.size(); ++i) numerator += config.rho * x_kj[i] + y_kj[i];
  const double weight = hs_lipschitz + config.rho * static_cast<double>(x_kj.size());
  double v = numerator / weight;
  const double threshold = l1_weight / weight;
  if (v > threshold) {
    v -= threshold;
  } else if (v < -threshold) {
    v += threshold;
  } else {
    v = 0.0;
  }
  return std::min(std::max(v, lower), upper);
}

double xkj_update(double x_old, double y_old, double zj_new, double grad_component,
                  const SolverConfig& config) {
  return (config.rho * zj_new - y_old + x_old / config.eta - grad_component) /
         (config.rho + 1.0 / config.eta);
}

double ykj_update(double y_old, double x_new, double zj_new, const SolverConfig& config) {
  return y_old + config.rho * (x_new - zj_new);
}

namespace {

void check_problem_matches_graph(const ConsensusProblem& problem, const Graph& graph) {
  if (problem.dim() != graph.nodes() || problem.nodes() != graph.nodes()) {
    throw CapabilityError("run_decentralized: problem must be general-form consensus with "
                          "n == K over the graph");
  }
  if (!problem.regularizer().separable) {
    throw CapabilityError("run_decentralized: regularizer must be separable");
  }
  for (int k = 0; k < graph.nodes(); ++k) {
    if (problem.loss(k).mask.active() != graph.closed_neighborhood(k)) {
      throw CapabilityError("run_decentralized: mask of node " + std::to_string(k) +
                            " does not match its closed neighborhood");
    }
  }
}

}  // namespace

RunTrace run_decentralized(const ConsensusProblem& problem, const Graph& graph,
                           const SolverConfig& config, const Schedule& schedule,
                           const ErrorModel& error_model,
                           const MessageLossModel& message_loss) {
  if (config.rho <= 0.0) throw ParameterError("run_decentralized: rho must be positive");
  if (config.eta <= 0.0) throw ParameterError("run_decentralized: eta must be positive");
  check_problem_matches_graph(problem, graph);
  const int K = graph.nodes();
  if (schedule.nodes() != K) {
    throw ScheduleError("run_decentralized: schedule node count mismatch");
  }

  RunTrace trace;
  trace.engine = "decentralized";
  trace.rho = config.rho;
  trace.eta = config.eta;
  trace.exact = error_model.is_exact() && message_loss.prob == 0.0;

  // synchronous = every node and coordinate active every slot, no losses
  trace.synchronous = message_loss.prob == 0.0;
  for (int t = 1; t <= schedule.horizon() && trace.synchronous; ++t) {
    trace.synchronous = static_cast<int>(schedule.x_active(t).size()) == K &&
                        static_cast<int>(schedule.z_active(t).size()) == K;
  }

  {
    const double needed = rho_min(problem, 2);
    if (config.rho <= needed) {
      if (config.strict_rho) {
        throw ParameterError("run_decentralized: rho below rho_min in strict mode");
      }
      trace.rho_warning = true;
    }
  }

  DecentralizedState state = init_decentralized_state(problem);
  trace.initial_lagrangian =
      augmented_lagrangian(problem, state.xs, state.z, state.ys, config.rho);
  trace.initial_theta = stationarity(problem, state.z);

  const RegularizerSpec& reg = problem.regularizer();
  const int T = schedule.horizon();
  // first slot at which node k's view of z_j went stale; -1 = in sync
  std::vector<std::vector<int>> stale_since(static_cast<size_t>(K),
                                            std::vector<int>(static_cast<size_t>(K), -1));

  std::vector<Vector> new_xs(static_cast<size_t>(K));
  std::vector<Vector> new_ys(static_cast<size_t>(K));
  std::vector<double> slot_err(static_cast<size_t>(K), 0.0);
  double err_running_total = 0.0;

  for (int t = 1; t <= T; ++t) {
    // --- sub-slot 1: z updates on active coordinates ---
    const Vector z_old = state.z;
    const Vector hs_grad = reg.smooth_grad(state.z);
    Vector z_new = state.z;
    const std::vector<int>& zactive = schedule.z_active(t);
    const int zcount = static_cast<int>(zactive.size());

    auto update_coord = [&](int j) {
      const auto& nbrs = graph.closed_neighborhood(j);
      std::vector<double> xk(nbrs.size()), yk(nbrs.size());
      for (size_t i = 0; i < nbrs.size(); ++i) {
        xk[i] = state.xs[static_cast<size_t>(nbrs[i])][j];
        yk[i] = state.ys[static_cast<size_t>(nbrs[i])][j];
      }
      const double lo = problem.feasible().lower()[j];
      const double hi = problem.feasible().upper()[j];
      const double l1 = reg.nonsmooth == NonsmoothKind::L1 ? reg.l1_weight : 0.0;
      z_new[j] = zj_update(state.z[j], hs_grad[j], reg.lipschitz, xk, yk, l1, lo, hi, config);
    };
    if (config.parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (int i = 0; i < zcount; ++i) update_coord(zactive[static_cast<size_t>(i)]);
    } else {
      for (int i = 0; i < zcount; ++i) update_coord(zactive[static_cast<size_t>(i)]);
    }
    state.z = z_new;

    // broadcast: updated coordinates reach neighbors unless the message is
    // lost; staleness past tau1 forces a delivery
    for (int j : zactive) {
      for (int k : graph.closed_neighborhood(j)) {
        int& since = stale_since[static_cast<size_t>(k)][static_cast<size_t>(j)];
        bool deliver = true;
        if (k != j && message_loss.prob > 0.0) {
          const double roll = uniform01(substream(message_loss.seed, 0x3d,
                                                  static_cast<std::uint64_t>(t),
                                                  static_cast<std::uint64_t>(j * K + k)));
          deliver = roll >= message_loss.prob;
          if (!deliver && since >= 0 && t - since >= message_loss.max_staleness) deliver = true;
        }
        if (deliver) {
          state.views[static_cast<size_t>(k)][j] = state.z[j];
          since = -1;
        } else if (since < 0) {
          since = t;
        }
      }
    }

    // --- sub-slot 2: x/y updates from local snapshots ---
    const std::vector<int>& active = schedule.x_active(t);
    const int active_count = static_cast<int>(active.size());
    std::exception_ptr failure;

    auto update_node = [&](int k) {
      const size_t ks = static_cast<size_t>(k);
      const NodeLoss& node = problem.loss(k);
      const Vector true_grad = node.grad(state.views[ks]);
      PerturbedGradient pg = perturb_gradient(error_model, true_grad, t, k);
      Vector err = pg.grad - true_grad;
      node.mask.apply_in_place(err);
      slot_err[ks] = err.squaredNorm();

      Vector x_new = state.xs[ks];
      Vector y_new = state.ys[ks];
      for (int j : node.mask.active()) {
        const double vj = state.views[ks][j];
        x_new[j] = xkj_update(state.xs[ks][j], state.ys[ks][j], vj, true_grad[j] + err[j],
                              config);
        y_new[j] = ykj_update(state.ys[ks][j], x_new[j], vj, config);
      }
      new_xs[ks] = std::move(x_new);
      new_ys[ks] = std::move(y_new);
    };
    auto update_node_safe = [&](int k) {
      try {
        update_node(k);
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
        if (!failure) failure = std::current_exception();
      }
    };

    if (config.parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (int i = 0; i < active_count; ++i) update_node_safe(active[static_cast<size_t>(i)]);
    } else {
      for (int i = 0; i < active_count; ++i) update_node_safe(active[static_cast<size_t>(i)]);
    }
    if (failure) std::rethrow_exception(failure);

    TraceRow row;
    row.slot = t;
    double err_sum = 0.0;
    for (int k : active) {
      const size_t ks = static_cast<size_t>(k);
      const double dx = problem.loss(k).mask.masked_norm_sq(new_xs[ks] - state.xs[ks]);
      row.sum_dx_sq += dx;
      row.max_dx = std::max(row.max_dx, dx);
      err_sum += slot_err[ks];
      trace.ledger.record(t, k, slot_err[ks]);
      state.xs[ks] = std::move(new_xs[ks]);
      state.ys[ks] = std::move(new_ys[ks]);
    }
    trace.ledger.note_slot(t);

    row.dz_sq = (state.z - z_old).squaredNorm();
    row.max_dz = row.dz_sq;
    state.t = t;

    if (!state.z.allFinite() ||
        state.z.lpNorm<Eigen::Infinity>() > config.divergence_guard) {
      throw DivergenceError("run_decentralized: iterates left the guard region at slot " +
                            std::to_string(t), t);
    }
    for (const Vector& v : state.xs) {
      if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > config.divergence_guard) {
        throw DivergenceError("run_decentralized: iterates left the guard region at slot " +
                              std::to_string(t), t);
      }
    }

    row.lagrangian = augmented_lagrangian(problem, state.xs, state.z, state.ys, config.rho);
    row.theta = stationarity(problem, state.z);
    row.consensus_residual = consensus_residual(problem, state.xs, state.z);
    row.coord_residual.assign(static_cast<size_t>(K), 0.0);
    for (int j = 0; j < K; ++j) {
      double worst = 0.0;
      for (int k : graph.closed_neighborhood(j)) {
        const double d = state.xs[static_cast<size_t>(k)][j] - state.z[j];
        worst = std::max(worst, d * d);
      }
      row.coord_residual[static_cast<size_t>(j)] = worst;
    }
    row.error_sq = active.empty() ? 0.0 : err_sum / active.size();
    err_running_total += row.error_sq;
    row.e_t_running = err_running_total / t;
    trace.rows.push_back(std::move(row));
    trace.slots_run = t;

    double stop_stat = trace.rows.back().max_dx;
    for (int k = 0; k < K; ++k) {
      stop_stat = std::max(stop_stat, problem.loss(k).mask.masked_norm_sq(
                                          state.xs[static_cast<size_t>(k)] - state.z));
    }
    if (stop_stat <= config.stop_eps) {
      trace.stopped_early = true;
      break;
    }
  }

  trace.final_z = state.z;
  trace.final_xs = state.xs;
  trace.final_ys = state.ys;
  return trace;
}

}  // namespace disc
