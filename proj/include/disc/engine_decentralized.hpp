#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "disc/core.hpp"
#include "disc/engine_fusion.hpp"
#include "disc/inexact.hpp"
#include "disc/schedule.hpp"
#include "disc/trace.hpp"

namespace disc {

/// Undirected communication graph; closed neighborhoods include the node
/// itself.
class Graph {
 public:
  Graph() = default;
  Graph(int nodes, std::vector<std::pair<int, int>> edges);

  static Graph path(int nodes);
  static Graph ring(int nodes);
  static Graph complete(int nodes);
  static Graph from_edge_list(std::istream& in);

  void save(std::ostream& out) const;

  int nodes() const { return nodes_; }
  bool adjacent(int a, int b) const;
  const std::vector<int>& closed_neighborhood(int k) const {
    return neighborhoods_[static_cast<size_t>(k)];
  }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// Coordinate masks [P_k]_{jj} = 1 iff j in N_k for the general-form
  /// consensus problem (n = K).
  std::vector<CoordMask> masks() const;

 private:
  int nodes_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighborhoods_;  // sorted, closed
};

/// Bernoulli loss per (edge, slot, direction) for the z broadcasts.
/// Losses that would leave a neighbor's view stale past `max_staleness`
/// slots are overridden by forced deliveries, mirroring the bounded-delay
/// enforcement in the schedule generator.
struct MessageLossModel {
  double prob = 0.0;
  std::uint64_t seed = 0;
  int max_staleness = 1;  // tau1 role for the snapshot ages
};

struct DecentralizedState {
  std::vector<Vector> xs, ys;       // supported on closed neighborhoods
  Vector z;                         // simulator ground truth
  std::vector<Vector> views;        // per-node received snapshot of z
  int t = 0;
};

DecentralizedState init_decentralized_state(const ConsensusProblem& problem);

/// Scalar z_j update over the coordinate's neighborhood: prox of
/// (L_h z_j^t + sum_{k in N_j} (rho x_kj + y_kj) - d h^s/d z_j) with
/// weight L_h + rho |N_j|.
double zj_update(double z_old, double hs_grad_j, double hs_lipschitz,
                 const std::vector<double>& x_kj, const std::vector<double>& y_kj,
                 double l1_weight, double lower, double upper, const SolverConfig& config);

/// x_{kj}^{t+1} = (rho z_j^{t+1} - y_kj + x_kj / eta - grad_j) / (rho + 1/eta).
double xkj_update(double x_old, double y_old, double zj_new, double grad_component,
                  const SolverConfig& config);

/// y_{kj}^{t+1} = y_kj + rho (x_kj^{t+1} - z_j^{t+1}).
double ykj_update(double y_old, double x_new, double zj_new, const SolverConfig& config);

/// Fully decentralized run over the graph. The problem must have n == K,
/// masks equal to the closed neighborhoods, and a separable regularizer.
/// Each slot has two sub-slots: active coordinates update and broadcast
/// z_j, then nodes in S_t^x update x/y from their local snapshots.
RunTrace run_decentralized(const ConsensusProblem& problem, const Graph& graph,
                           const SolverConfig& config, const Schedule& schedule,
                           const ErrorModel& error_model,
                           const MessageLossModel& message_loss = {});

}  // namespace disc
