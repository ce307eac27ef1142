#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "disc/core.hpp"
#include "disc/trace.hpp"

namespace disc {

/// Constants from the convergence analysis, evaluated for a concrete
/// (problem, rho, eta, tau). Above rho_min both C_x - C_x' and
/// C_z - C_z' are positive.
struct TheoremConstants {
  double rho = 0.0, eta = 1.0;
  double varphi = 1.0, L_phi = 1.0;
  double L_g = 0.0, L_h = 0.0;
  int K = 0, tau = 0, lambda_p = 1;

  double upsilon = 0.0;        // 9 L_g / (2 rho^2) + 1/rho
  double upsilon_prime = 0.0;  // 1 / (rho - 3 L_g)
  double C_x = 0.0, C_z = 0.0, C_e = 0.0;
  double C_x_prime = 0.0, C_z_prime = 0.0, C_e_prime = 0.0;
  double rho_min = 0.0;

  double descent_x() const { return C_x - C_x_prime; }
  double descent_z() const { return C_z - C_z_prime; }
  bool positive() const { return descent_x() > 0.0 && descent_z() > 0.0; }

  static TheoremConstants compute(const ConsensusProblem& problem, double rho, double eta,
                                  int tau, double varphi = 1.0, double L_phi = 1.0);
  void dump(std::ostream& out) const;
};

/// rho_min = max{ 18 L_g, (L_h + K L_g tau) / (2 lambda_p) }.
double rho_min(const ConsensusProblem& problem, int tau);

/// Squared norm of the proximal-gradient residual
/// (1/alpha) (z - prox_{alpha (h^c + I_X)}(z - alpha grad F(z)))
/// with F = h^s + sum_k g_k. Equals ||grad F(z)||^2 exactly when h^c = 0
/// and X = R^n. alpha <= 0 selects the default 1/(L_h + K L_g).
double stationarity(const ConsensusProblem& problem, const Vector& z, double alpha = 0.0);

struct DescentReport {
  int violations = 0;
  int first_violation_slot = -1;
  double worst_excess = 0.0;
  bool pass() const { return violations == 0; }
};

/// Checks, slot by slot, that
///   L^{t+1} - L^t <= -(C_x - C_x') sum_k ||dx_k||^2 - (C_z - C_z') ||dz||^2 + 1e-9.
/// Only valid for exact synchronous traces; anything else raises
/// CapabilityError because the omitted error terms are not reconstructed.
DescentReport descent_monitor(const RunTrace& trace, const TheoremConstants& constants);

struct RateRow {
  int slots = 0;
  double min_theta = 0.0;
  double t_times_min_theta = 0.0;
  double floor_theta = 0.0;  // mean theta over the last 10% of slots
  double average_error = 0.0;
};

struct RateSummary {
  std::vector<RateRow> rows;
  /// max/min of T * min theta across the traces.
  double t_min_theta_spread() const;
  /// floors sorted by measured E_T are nondecreasing.
  bool floors_monotone_in_error() const;
  void to_csv(std::ostream& out) const;
  std::string text() const;
};

RateSummary rate_summary(const std::vector<const RunTrace*>& traces);

}  // namespace disc
