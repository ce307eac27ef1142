#include "disc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "disc/engine_fusion.hpp"

namespace disc {

double rho_min(const ConsensusProblem& problem, int tau) {
  const double L_g = problem.max_loss_smoothness();
  const double L_h = problem.regularizer().lipschitz;
  const double K = problem.nodes();
  const double lambda_p = problem.coverage_min();
  return std::max(18.0 * L_g, (L_h + K * L_g * tau) / (2.0 * lambda_p));
}

TheoremConstants TheoremConstants::compute(const ConsensusProblem& problem, double rho,
                                           double eta, int tau, double varphi, double L_phi) {
  TheoremConstants c;
  c.rho = rho;
  c.eta = eta;
  c.varphi = varphi;
  c.L_phi = L_phi;
  c.L_g = problem.max_loss_smoothness();
  c.L_h = problem.regularizer().lipschitz;
  c.K = problem.nodes();
  c.tau = tau;
  c.lambda_p = problem.coverage_min();
  c.rho_min = disc::rho_min(problem, tau);

  const double Lg = c.L_g;
  c.upsilon = 9.0 * Lg / (2.0 * rho * rho) + 1.0 / rho;
  c.upsilon_prime = 1.0 / (rho - 3.0 * Lg);

  const double phi_term = 2.0 * L_phi * L_phi / (eta * eta) + Lg * Lg;
  c.C_x = rho / 4.0 + varphi / eta - 4.5 * Lg - 20.0 * c.upsilon * phi_term;
  c.C_z = (c.lambda_p * rho - c.L_h - c.K * Lg * tau) / 2.0 -
          20.0 * c.K * c.upsilon * Lg * Lg * tau * tau;
  c.C_e = 40.0 * c.upsilon + 1.0 / rho;
  c.C_x_prime = 2.5 * c.upsilon_prime * phi_term;
  c.C_z_prime = 10.0 * c.upsilon_prime * c.K * Lg * Lg * tau;
  c.C_e_prime = 5.0 * c.upsilon_prime;
  return c;
}

void TheoremConstants::dump(std::ostream& out) const {
  auto line = [&out](const char* name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << name << " = " << buf << '\n';
  };
  line("rho", rho);
  line("eta", eta);
  line("varphi", varphi);
  line("L_phi", L_phi);
  line("L_g", L_g);
  line("L_h", L_h);
  out << "K = " << K << '\n';
  out << "tau = " << tau << '\n';
  out << "lambda_p = " << lambda_p << '\n';
  line("rho_min", rho_min);
  line("upsilon", upsilon);
  line("upsilon_prime", upsilon_prime);
  line("C_x", C_x);
  line("C_z", C_z);
  line("C_e", C_e);
  line("C_x_prime", C_x_prime);
  line("C_z_prime", C_z_prime);
  line("C_e_prime", C_e_prime);
  line("descent_x", descent_x());
  line("descent_z", descent_z());
}

double stationarity(const ConsensusProblem& problem, const Vector& z, double alpha) {
  if (alpha <= 0.0) {
    const double scale =
        problem.regularizer().lipschitz + problem.nodes() * problem.max_loss_smoothness();
    alpha = scale > 0.0 ? 1.0 / scale : 1.0;
  }
  Vector grad = problem.regularizer().smooth_grad(z);
  for (const NodeLoss& node : problem.losses()) grad += node.grad(z);
  const Vector moved =
      prox_hc(z - alpha * grad, 1.0 / alpha, problem.regularizer(), problem.feasible());
  return ((z - moved) / alpha).squaredNorm();
}

DescentReport descent_monitor(const RunTrace& trace, const TheoremConstants& constants) {
  if (!trace.exact) {
    throw CapabilityError("descent_monitor: trace has injected error; the bound omits "
                          "its error terms");
  }
  if (!trace.synchronous) {
    throw CapabilityError("descent_monitor: trace is not synchronous");
  }
  constexpr double kSlack = 1e-9;
  DescentReport report;
  const double cx = constants.descent_x();
  const double cz = constants.descent_z();
  for (size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    const double prev = i == 0 ? trace.initial_lagrangian : trace.rows[i - 1].lagrangian;
    const double drop = row.lagrangian - prev;
    const double allowed = -cx * row.sum_dx_sq - cz * row.dz_sq + kSlack;
    if (drop > allowed) {
      report.violations++;
      if (report.first_violation_slot < 0) report.first_violation_slot = row.slot;
      report.worst_excess = std::max(report.worst_excess, drop - allowed);
    }
  }
  return report;
}

double RateSummary::t_min_theta_spread() const {
  double lo = kInf, hi = 0.0;
  for (const RateRow& row : rows) {
    lo = std::min(lo, row.t_times_min_theta);
    hi = std::max(hi, row.t_times_min_theta);
  }
  return (rows.empty() || lo <= 0.0) ? kInf : hi / lo;
}

bool RateSummary::floors_monotone_in_error() const {
  std::vector<RateRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const RateRow& a, const RateRow& b) { return a.average_error < b.average_error; });
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].floor_theta < sorted[i - 1].floor_theta) return false;
  }
  return true;
}

void RateSummary::to_csv(std::ostream& out) const {
  out << "slots,min_theta,t_times_min_theta,floor_theta,average_error\n";
  char buf[64];
  for (const RateRow& row : rows) {
    out << row.slots;
    for (double v : {row.min_theta, row.t_times_min_theta, row.floor_theta, row.average_error}) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::string RateSummary::text() const {
  std::ostringstream out;
  out << "slots  min_theta  T*min_theta  floor_theta  E_T\n";
  for (const RateRow& row : rows) {
    out << row.slots << "  " << row.min_theta << "  " << row.t_times_min_theta << "  "
        << row.floor_theta << "  " << row.average_error << '\n';
  }
  out << "spread(T*min_theta) = " << t_min_theta_spread() << '\n';
  out << "floors monotone in E_T: " << (floors_monotone_in_error() ? "yes" : "no") << '\n';
  return out.str();
}

RateSummary rate_summary(const std::vector<const RunTrace*>& traces) {
  if (traces.size() < 2) {
    throw ParameterError("rate_summary: need at least two traces to compare");
  }
  RateSummary summary;
  for (const RunTrace* trace : traces) {
    RateRow row;
    row.slots = trace->slots_run;
    row.min_theta = trace->min_theta();
    row.t_times_min_theta = trace->slots_run * row.min_theta;
    row.floor_theta = trace->tail_mean_theta(0.1);
    row.average_error = trace->final_average_error();
    summary.rows.push_back(row);
  }
  return summary;
}

}  // namespace disc
