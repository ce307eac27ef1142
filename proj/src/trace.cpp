#include "disc/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace disc {

namespace {
void put(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}
}  // namespace

double RunTrace::min_theta() const {
  double best = kInf;
  for (const TraceRow& row : rows) best = std::min(best, row.theta);
  return best;
}

double RunTrace::tail_mean_theta(double fraction) const {
  if (rows.empty()) return 0.0;
  const int count = std::max(1, static_cast<int>(std::floor(rows.size() * fraction)));
  double total = 0.0;
  for (size_t i = rows.size() - static_cast<size_t>(count); i < rows.size(); ++i) {
    total += rows[i].theta;
  }
  return total / count;
}

void RunTrace::to_csv(std::ostream& out) const {
  const bool per_coord = !rows.empty() && !rows.front().coord_residual.empty();
  out << "slot,lagrangian,theta,consensus_residual,max_dx,max_dz,error_sq,E_T_running";
  if (per_coord) {
    for (size_t j = 0; j < rows.front().coord_residual.size(); ++j) out << ",zres_" << j;
  }
  out << '\n';
  for (const TraceRow& row : rows) {
    out << row.slot << ',';
    put(out, row.lagrangian);
    out << ',';
    put(out, row.theta);
    out << ',';
    put(out, row.consensus_residual);
    out << ',';
    put(out, row.max_dx);
    out << ',';
    put(out, row.max_dz);
    out << ',';
    put(out, row.error_sq);
    out << ',';
    put(out, row.e_t_running);
    if (per_coord) {
      for (double r : row.coord_residual) {
        out << ',';
        put(out, r);
      }
    }
    out << '\n';
  }
}

}  // namespace disc
