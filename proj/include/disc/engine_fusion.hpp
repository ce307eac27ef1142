#pragma once

#include <optional>
#include <vector>

#include "disc/core.hpp"
#include "disc/inexact.hpp"
#include "disc/schedule.hpp"
#include "disc/surrogates.hpp"
#include "disc/trace.hpp"

namespace disc {

/// Bregman generator phi for the x-update proximity term. The default is
/// phi(u) = ||u||^2 / 2, giving d_phi(u, v) = ||u - v||^2 / 2 with
/// strong-convexity and gradient-Lipschitz constants both 1.
struct BregmanGenerator {
  SmoothFn phi;                   // empty = half squared norm
  double strong_convexity = 1.0;  // varphi
  double grad_lipschitz = 1.0;    // L_phi

  bool is_default() const { return phi.empty(); }
  Vector grad_at(const Vector& u) const { return phi.empty() ? u : phi.grad(u); }
  double divergence(const Vector& u, const Vector& v) const;
};

struct SolverConfig {
  double rho = 1.0;
  double eta = 1.0;  // defaults to varphi
  BregmanGenerator bregman;
  int horizon = 1000;       // T
  double stop_eps = 0.0;    // epsilon for the max{||z-x||^2, ||dx||^2} test
  double inner_tol = 1e-10;
  int inner_max_iters = 20000;
  bool strict_rho = false;
  bool parallel = true;     // OpenMP over per-node updates
  double divergence_guard = 1e12;
};

struct SolverState {
  std::vector<Vector> xs, ys;
  Vector z;
  int t = 0;
  std::vector<Vector> grad_cache;     // latest accepted gradient per node
  std::vector<int> grad_cache_stamp;  // 0 = none yet
};

SolverState init_state(const ConsensusProblem& problem);

/// argmin_{v in X} h^c(v) + (weight/2) ||v - u||^2, exact for the
/// supported h^c variants (zero, lambda l1). Box X makes both
/// coordinatewise: soft-threshold by lambda/weight, then clip.
Vector prox_hc(const Vector& u, double weight, const RegularizerSpec& regularizer,
               const FeasibleSet& feasible);

/// Coordinatewise weights variant; used by the engines where coordinate
/// coverage differs across j.
Vector prox_hc(const Vector& u, const Vector& weights, const RegularizerSpec& regularizer,
               const FeasibleSet& feasible);

/// z^{t+1} from the quadratic-upper-bound surrogate of h^s:
/// prox over (L_h z^t + sum_k (rho x_k + y_k) - grad h^s(z^t)) with
/// coordinatewise weight L_h + rho * coverage_j. For full masks this is
/// the classic averaged form with denominator L_h + rho K.
Vector z_update_linear(const SolverState& state, const ConsensusProblem& problem,
                       const SolverConfig& config);

/// x_k^{t+1} = (rho z^{t+1} - y_k^t + x_k^t / eta - stale_grad) / (1/eta + rho)
/// on the node's mask; coordinates outside the mask pass through.
Vector x_update_linear(const SolverState& state, const ConsensusProblem& problem, int k,
                       const Vector& z_new, const Vector& stale_grad,
                       const SolverConfig& config);

/// General-surrogate x-update: minimizes the surrogate-augmented local
/// Lagrangian plus (1/eta) d_phi(P_k x, P_k x^t) by gradient descent with
/// fixed step 1/(L_surrogate + rho + L_phi/eta). `error` is the additive
/// gradient perturbation (zero vector for exact runs).
Vector x_update_general(const SolverState& state, const ConsensusProblem& problem, int k,
                        const Vector& z_new, const SurrogateModel& surrogate,
                        const Vector& anchor, const Vector& error,
                        const SolverConfig& config);

/// y_k^{t+1} = y_k^t + rho P_k(x_k^{t+1} - z^{t+1}).
Vector y_update(const SolverState& state, const ConsensusProblem& problem, int k,
                const Vector& x_new, const Vector& z_new, const SolverConfig& config);

/// Fusion-centric run. When `surrogates` is null or a node's entry is the
/// Linear family, the closed-form updates are used; otherwise the inner
/// solver path. The schedule's stamps choose the gradient anchors; the
/// error model perturbs every consumed gradient.
RunTrace run_fusion(const ConsensusProblem& problem, const SolverConfig& config,
                    const Schedule& schedule, const ErrorModel& error_model,
                    const std::vector<SurrogateModel>* surrogates = nullptr);

}  // namespace disc
