#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "disc/core.hpp"
#include "disc/inexact.hpp"

namespace disc {

struct TraceRow {
  int slot = 0;
  double lagrangian = 0.0;
  double theta = 0.0;               // stationarity proxy at z^{t+1}
  double consensus_residual = 0.0;  // max_k ||P_k(x_k - z)||^2
  double max_dx = 0.0;              // max_k ||P_k(x_k^{t+1} - x_k^t)||^2
  double max_dz = 0.0;              // ||z^{t+1} - z^t||^2
  double error_sq = 0.0;            // mean ||e_k^t||^2 over active nodes
  double e_t_running = 0.0;         // running E_T under the same convention

  // extra fields consumed by the diagnostics monitors, not serialized
  double sum_dx_sq = 0.0;           // sum_k ||P_k dx_k||^2
  double dz_sq = 0.0;               // == max_dz, kept for clarity
  std::vector<double> coord_residual;  // decentralized: per-coordinate residual
};

/// Full record of one solver run plus enough configuration echo for the
/// post-hoc monitors to check their preconditions.
struct RunTrace {
  std::string engine;        // "fusion" or "decentralized"
  double rho = 0.0, eta = 1.0;
  int tau1 = 0, tau2 = 1;
  bool exact = true;         // no injected error
  bool synchronous = false;  // tau1 = 0, tau2 = 1, no drops
  bool rho_warning = false;  // rho below rho_min in non-strict mode
  int slots_run = 0;
  bool stopped_early = false;
  double initial_lagrangian = 0.0;  // L at the initial state, before slot 1
  double initial_theta = 0.0;

  std::vector<TraceRow> rows;
  ErrorLedger ledger;

  Vector final_z;
  std::vector<Vector> final_xs, final_ys;

  double final_theta() const { return rows.empty() ? 0.0 : rows.back().theta; }
  double min_theta() const;
  double final_average_error() const {
    return rows.empty() ? 0.0 : rows.back().e_t_running;
  }
  /// Mean theta over the last `fraction` of recorded slots.
  double tail_mean_theta(double fraction = 0.1) const;

  void to_csv(std::ostream& out) const;
};

}  // namespace disc
