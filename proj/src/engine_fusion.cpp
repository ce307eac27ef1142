#include "disc/engine_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "disc/diagnostics.hpp"

namespace disc {

double BregmanGenerator::divergence(const Vector& u, const Vector& v) const {
  if (phi.empty()) return 0.5 * (u - v).squaredNorm();
  return phi.value(u) - phi.value(v) - phi.grad(v).dot(u - v);
}

SolverState init_state(const ConsensusProblem& problem) {
  SolverState state;
  const int n = problem.dim();
  const int K = problem.nodes();
  state.z = problem.feasible().project(Vector::Zero(n));
  state.xs.assign(static_cast<size_t>(K), Vector::Zero(n));
  state.ys.assign(static_cast<size_t>(K), Vector::Zero(n));
  state.grad_cache.assign(static_cast<size_t>(K), Vector::Zero(n));
  state.grad_cache_stamp.assign(static_cast<size_t>(K), 0);
  state.t = 0;
  return state;
}

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

void check_weight(double w) {
  if (!(w > 0.0)) throw ParameterError("prox_hc: weight must be positive");
}

}  // namespace

Vector prox_hc(const Vector& u, double weight, const RegularizerSpec& regularizer,
               const FeasibleSet& feasible) {
  check_weight(weight);
  return prox_hc(u, Vector(Vector::Constant(u.size(), weight)), regularizer, feasible);
}

Vector prox_hc(const Vector& u, const Vector& weights, const RegularizerSpec& regularizer,
               const FeasibleSet& feasible) {
  if (weights.size() != u.size()) throw DimensionError("prox_hc: weights size mismatch");
  if (feasible.dim() != u.size()) throw DimensionError("prox_hc: feasible set size mismatch");
  Vector out(u.size());
  switch (regularizer.nonsmooth) {
    case NonsmoothKind::Zero:
      for (int j = 0; j < u.size(); ++j) {
        check_weight(weights[j]);
        out[j] = feasible.clamp1(j, u[j]);
      }
      return out;
    case NonsmoothKind::L1:
      // exact because X is a coordinate product: threshold, then clip
      for (int j = 0; j < u.size(); ++j) {
        check_weight(weights[j]);
        out[j] = feasible.clamp1(j, soft_threshold(u[j], regularizer.l1_weight / weights[j]));
      }
      return out;
  }
  throw CapabilityError("prox_hc: unsupported nonsmooth regularizer");
}

Vector z_update_linear(const SolverState& state, const ConsensusProblem& problem,
                       const SolverConfig& config) {
  const int n = problem.dim();
  const RegularizerSpec& reg = problem.regularizer();
  const double L_h = reg.lipschitz;

  // quadratic-upper-bound surrogate of h^s anchored at z^t; coordinate j
  // carries weight L_h + rho * (number of masks covering j)
  Vector numerator = L_h * state.z - reg.smooth_grad(state.z);
  Vector weights = Vector::Constant(n, L_h);
  for (int k = 0; k < problem.nodes(); ++k) {
    const CoordMask& mask = problem.loss(k).mask;
    const Vector& x = state.xs[static_cast<size_t>(k)];
    const Vector& y = state.ys[static_cast<size_t>(k)];
    for (int j : mask.active()) {
      numerator[j] += config.rho * x[j] + y[j];
      weights[j] += config.rho;
    }
  }
  return prox_hc((numerator.array() / weights.array()).matrix(), weights, reg,
                 problem.feasible());
}

Vector x_update_linear(const SolverState& state, const ConsensusProblem& problem, int k,
                       const Vector& z_new, const Vector& stale_grad,
                       const SolverConfig& config) {
  const Vector& x_old = state.xs[static_cast<size_t>(k)];
  const Vector& y_old = state.ys[static_cast<size_t>(k)];
  const double denom = 1.0 / config.eta + config.rho;
  Vector out = x_old;
  for (int j : problem.loss(k).mask.active()) {
    out[j] = (config.rho * z_new[j] - y_old[j] + x_old[j] / config.eta - stale_grad[j]) / denom;
  }
  return out;
}

Vector x_update_general(const SolverState& state, const ConsensusProblem& problem, int k,
                        const Vector& z_new, const SurrogateModel& surrogate,
                        const Vector& anchor, const Vector& error,
                        const SolverConfig& config) {
  const CoordMask& mask = problem.loss(k).mask;
  const Vector& x_old = state.xs[static_cast<size_t>(k)];
  const Vector& y_old = state.ys[static_cast<size_t>(k)];
  const BregmanGenerator& breg = config.bregman;

  const Vector phi_grad_old = breg.grad_at(mask.apply(x_old));
  const double step =
      1.0 / (surrogate.curvature() + config.rho + breg.grad_lipschitz / config.eta);

  Vector x = x_old;
  double residual = kInf;
  for (int it = 0; it < config.inner_max_iters; ++it) {
    Vector grad = surrogate.grad(x, anchor) + error;
    mask.apply_in_place(grad);
    const Vector phi_grad = breg.grad_at(mask.apply(x));
    for (int j : mask.active()) {
      grad[j] += y_old[j] + config.rho * (x[j] - z_new[j]) +
                 (phi_grad[j] - phi_grad_old[j]) / config.eta;
    }
    residual = grad.norm();
    if (residual <= config.inner_tol) return x;
    for (int j : mask.active()) x[j] -= step * grad[j];
  }
  throw ConvergenceError("x_update_general: inner solver did not reach tolerance", residual);
}

Vector y_update(const SolverState& state, const ConsensusProblem& problem, int k,
                const Vector& x_new, const Vector& z_new, const SolverConfig& config) {
  const Vector& y_old = state.ys[static_cast<size_t>(k)];
  Vector out = y_old;
  for (int j : problem.loss(k).mask.active()) {
    out[j] += config.rho * (x_new[j] - z_new[j]);
  }
  return out;
}

namespace {

bool schedule_is_synchronous(const Schedule& schedule) {
  for (int t = 1; t <= schedule.horizon(); ++t) {
    if (static_cast<int>(schedule.x_active(t).size()) != schedule.nodes()) return false;
    for (int k = 0; k < schedule.nodes(); ++k) {
      if (schedule.stamp(t, k) != t + 1) return false;
    }
  }
  return true;
}

// Largest gradient age and update gap actually present in the schedule.
void observed_delays(const Schedule& schedule, int* tau1, int* tau2) {
  *tau1 = 0;
  *tau2 = 1;
  for (int k = 0; k < schedule.nodes(); ++k) {
    int last_active = 0;
    for (int t = 1; t <= schedule.horizon(); ++t) {
      if (schedule.x_is_active(t, k)) {
        *tau1 = std::max(*tau1, t + 1 - schedule.stamp(t, k));
        *tau2 = std::max(*tau2, t - last_active);
        last_active = t;
      }
    }
  }
}

void guard_finite(const std::vector<Vector>& xs, const std::vector<Vector>& ys,
                  const Vector& z, int slot, double bound, const char* engine) {
  auto bad = [bound](const Vector& v) {
    return !v.allFinite() || v.lpNorm<Eigen::Infinity>() > bound;
  };
  bool diverged = bad(z);
  for (const Vector& x : xs) diverged = diverged || bad(x);
  for (const Vector& y : ys) diverged = diverged || bad(y);
  if (diverged) {
    throw DivergenceError(std::string(engine) + ": iterates left the guard region at slot " +
                          std::to_string(slot), slot);
  }
}

}  // namespace

RunTrace run_fusion(const ConsensusProblem& problem, const SolverConfig& config,
                    const Schedule& schedule, const ErrorModel& error_model,
                    const std::vector<SurrogateModel>* surrogates) {
  if (config.rho <= 0.0) throw ParameterError("run_fusion: rho must be positive");
  if (config.eta <= 0.0) throw ParameterError("run_fusion: eta must be positive");
  const int K = problem.nodes();
  if (schedule.nodes() != K) throw ScheduleError("run_fusion: schedule node count mismatch");
  if (surrogates && static_cast<int>(surrogates->size()) != K) {
    throw ParameterError("run_fusion: need one surrogate per node");
  }

  RunTrace trace;
  trace.engine = "fusion";
  trace.rho = config.rho;
  trace.eta = config.eta;
  trace.exact = error_model.is_exact();
  trace.synchronous = schedule_is_synchronous(schedule);
  observed_delays(schedule, &trace.tau1, &trace.tau2);

  {
    const double needed = rho_min(problem, trace.tau1 + trace.tau2 + 1);
    if (config.rho <= needed) {
      if (config.strict_rho) {
        throw ParameterError("run_fusion: rho below rho_min in strict mode");
      }
      trace.rho_warning = true;
    }
  }

  SolverState state = init_state(problem);
  const int T = schedule.horizon();
  trace.initial_lagrangian =
      augmented_lagrangian(problem, state.xs, state.z, state.ys, config.rho);
  trace.initial_theta = stationarity(problem, state.z);

  // ring buffer of z iterates deep enough for the oldest stamp in use
  const int depth = trace.tau1 + 3;
  std::vector<Vector> z_ring(static_cast<size_t>(depth));
  z_ring[static_cast<size_t>(1 % depth)] = state.z;  // z^1

  std::vector<Vector> new_xs(static_cast<size_t>(K));
  std::vector<Vector> new_ys(static_cast<size_t>(K));
  std::vector<Vector> new_grads(static_cast<size_t>(K));
  std::vector<double> slot_err(static_cast<size_t>(K), 0.0);

  double err_running_total = 0.0;
  trace.rows.reserve(static_cast<size_t>(T));

  for (int t = 1; t <= T; ++t) {
    const Vector z_new = z_update_linear(state, problem, config);
    z_ring[static_cast<size_t>((t + 1) % depth)] = z_new;

    const std::vector<int>& active = schedule.x_active(t);
    const int active_count = static_cast<int>(active.size());

    std::exception_ptr failure;
    auto update_node = [&](int k) {
      const size_t ks = static_cast<size_t>(k);
      const int stamp = schedule.stamp(t, k);
      if (stamp < 1 || stamp < t + 2 - depth) {
        throw ScheduleError("run_fusion: stamp outside the z history window");
      }
      const Vector& anchor = z_ring[static_cast<size_t>(stamp % depth)];
      const NodeLoss& node = problem.loss(k);
      const Vector true_grad = node.grad(anchor);
      PerturbedGradient pg = perturb_gradient(error_model, true_grad, stamp, k);
      Vector err = pg.grad - true_grad;
      node.mask.apply_in_place(err);
      slot_err[ks] = err.squaredNorm();

      const bool linear = !surrogates ||
                          (*surrogates)[ks].family() == SurrogateFamily::Linear;
      Vector x_new;
      if (linear) {
        x_new = x_update_linear(state, problem, k, z_new, (true_grad + err).eval(), config);
      } else {
        x_new = x_update_general(state, problem, k, z_new, (*surrogates)[ks], anchor, err,
                                 config);
      }
      new_grads[ks] = true_grad + err;
      new_ys[ks] = y_update(state, problem, k, x_new, z_new, config);
      new_xs[ks] = std::move(x_new);
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

    // commit in node-index order; skipped nodes stay bitwise identical
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
      state.grad_cache[ks] = std::move(new_grads[ks]);
      state.grad_cache_stamp[ks] = schedule.stamp(t, k);
    }
    trace.ledger.note_slot(t);

    row.dz_sq = (z_new - state.z).squaredNorm();
    row.max_dz = row.dz_sq;
    state.z = z_new;
    state.t = t;

    guard_finite(state.xs, state.ys, state.z, t, config.divergence_guard, "run_fusion");

    row.lagrangian = augmented_lagrangian(problem, state.xs, state.z, state.ys, config.rho);
    row.theta = stationarity(problem, state.z);
    row.consensus_residual = consensus_residual(problem, state.xs, state.z);
    row.error_sq = active.empty() ? 0.0 : err_sum / active.size();
    err_running_total += row.error_sq;
    row.e_t_running = err_running_total / t;
    trace.rows.push_back(std::move(row));
    trace.slots_run = t;

    // Algorithm-1 stopping test
    double stop_stat = trace.rows.back().max_dx;
    for (int k = 0; k < K; ++k) {
      stop_stat = std::max(stop_stat, (state.z - state.xs[static_cast<size_t>(k)]).squaredNorm());
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
