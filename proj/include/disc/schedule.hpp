#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "disc/errors.hpp"

namespace disc {

/// Delay / drop parameters for schedule generation. tau1 bounds gradient
/// age, tau2 bounds the gap between consecutive updates of a node.
struct DelayModel {
  int tau1 = 0;
  int tau2 = 1;
  double drop_prob = 0.0;
  double z_freq = 0.5;  // f_j, must stay in (0,1) for a satisfiable schedule
  std::uint64_t seed = 0;

  int tau() const { return tau1 + tau2 + 1; }
};

/// Slotted update schedule over slots t = 1..T. For every active (t, k)
/// pair, stamp(t, k) is the index of the z-iterate anchoring node k's
/// gradient at slot t (z^1 is the initial iterate, z^{t+1} the one
/// produced at slot t).
class Schedule {
 public:
  Schedule() = default;
  Schedule(int T, int K);

  int horizon() const { return T_; }
  int nodes() const { return K_; }

  bool x_is_active(int t, int k) const { return stamp_at(t, k) > 0; }
  bool z_is_active(int t, int j) const;
  int stamp(int t, int k) const;  // throws ScheduleError if (t, k) inactive

  const std::vector<int>& x_active(int t) const;
  const std::vector<int>& z_active(int t) const;

  void set_x_update(int t, int k, int stamp);
  void set_z_active(int t, int j, bool active);
  void finalize();  // rebuilds active lists after direct edits

 private:
  int stamp_at(int t, int k) const;

  int T_ = 0, K_ = 0;
  std::vector<std::vector<int>> stamps_;    // [t-1][k], 0 when inactive
  std::vector<std::vector<uint8_t>> z_on_;  // [t-1][j]
  std::vector<std::vector<int>> x_lists_, z_lists_;
};

/// Generates a schedule satisfying all four invariants: bounded gradient
/// age, freshness, bounded update gap, and z-update frequency. Random
/// drops and stamp delays are drawn per (seed, slot, node), so schedules
/// generated for different horizons share prefixes. Forced updates are
/// inserted where a drop would violate the tau2 window or the z
/// frequency. Throws ScheduleError when the parameters are unsatisfiable.
Schedule generate(const DelayModel& model, int T, int K);

struct ScheduleIssue {
  int slot = 0;
  int node = 0;  // node or z coordinate, depending on the rule
  std::string rule;
};

struct ScheduleReport {
  std::vector<ScheduleIssue> issues;
  bool pass() const { return issues.empty(); }
  const ScheduleIssue& first() const { return issues.front(); }
};

ScheduleReport validate(const Schedule& schedule, const DelayModel& model);

/// (t+1)_k = max{ i <= t+1 : k in S_{i-1}^x }, or the sentinel 1 when the
/// node has not updated yet.
int last_update_index(const Schedule& schedule, int t, int k);

void save_schedule(const Schedule& schedule, std::ostream& out);
Schedule load_schedule(std::istream& in);

}  // namespace disc
