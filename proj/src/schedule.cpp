#include "disc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "disc/rng.hpp"

namespace disc {

namespace {
constexpr std::uint64_t kDropTag = 0xd0;
constexpr std::uint64_t kStampTag = 0x57;
constexpr std::uint64_t kZTag = 0x2f;
}  // namespace

Schedule::Schedule(int T, int K) : T_(T), K_(K) {
  if (T < 1 || K < 1) throw ParameterError("Schedule: T and K must be positive");
  stamps_.assign(static_cast<size_t>(T), std::vector<int>(static_cast<size_t>(K), 0));
  z_on_.assign(static_cast<size_t>(T), std::vector<uint8_t>(static_cast<size_t>(K), 0));
  x_lists_.resize(static_cast<size_t>(T));
  z_lists_.resize(static_cast<size_t>(T));
}

int Schedule::stamp_at(int t, int k) const {
  if (t < 1 || t > T_ || k < 0 || k >= K_) {
    throw RangeError("Schedule: slot or node out of range");
  }
  return stamps_[static_cast<size_t>(t - 1)][static_cast<size_t>(k)];
}

bool Schedule::z_is_active(int t, int j) const {
  if (t < 1 || t > T_ || j < 0 || j >= K_) {
    throw RangeError("Schedule: slot or coordinate out of range");
  }
  return z_on_[static_cast<size_t>(t - 1)][static_cast<size_t>(j)] != 0;
}

int Schedule::stamp(int t, int k) const {
  const int s = stamp_at(t, k);
  if (s == 0) {
    throw ScheduleError("Schedule: node " + std::to_string(k) + " inactive at slot " +
                        std::to_string(t));
  }
  return s;
}

const std::vector<int>& Schedule::x_active(int t) const {
  if (t < 1 || t > T_) throw RangeError("Schedule: slot out of range");
  return x_lists_[static_cast<size_t>(t - 1)];
}

const std::vector<int>& Schedule::z_active(int t) const {
  if (t < 1 || t > T_) throw RangeError("Schedule: slot out of range");
  return z_lists_[static_cast<size_t>(t - 1)];
}

void Schedule::set_x_update(int t, int k, int stamp) {
  if (t < 1 || t > T_ || k < 0 || k >= K_) throw RangeError("Schedule: out of range");
  stamps_[static_cast<size_t>(t - 1)][static_cast<size_t>(k)] = stamp;
}

void Schedule::set_z_active(int t, int j, bool active) {
  if (t < 1 || t > T_ || j < 0 || j >= K_) throw RangeError("Schedule: out of range");
  z_on_[static_cast<size_t>(t - 1)][static_cast<size_t>(j)] = active ? 1 : 0;
}

void Schedule::finalize() {
  for (int t = 1; t <= T_; ++t) {
    auto& xl = x_lists_[static_cast<size_t>(t - 1)];
    auto& zl = z_lists_[static_cast<size_t>(t - 1)];
    xl.clear();
    zl.clear();
    for (int k = 0; k < K_; ++k) {
      if (stamps_[static_cast<size_t>(t - 1)][static_cast<size_t>(k)] > 0) xl.push_back(k);
      if (z_on_[static_cast<size_t>(t - 1)][static_cast<size_t>(k)]) zl.push_back(k);
    }
  }
}

Schedule generate(const DelayModel& model, int T, int K) {
  if (model.tau1 < 0 || model.tau2 < 1) {
    throw ScheduleError("generate: need tau1 >= 0 and tau2 >= 1");
  }
  if (model.drop_prob < 0.0 || model.drop_prob >= 1.0) {
    throw ScheduleError("generate: drop_prob must lie in [0, 1)");
  }
  if (T < model.tau2) {
    throw ScheduleError("generate: horizon shorter than tau2; update-gap invariant "
                        "unsatisfiable");
  }
  if (model.z_freq <= 0.0 || model.z_freq >= 1.0) {
    // strict count > T * f_j is impossible at f_j = 1
    throw ScheduleError("generate: z-frequency invariant requires z_freq in (0, 1)");
  }

  Schedule schedule(T, K);

  // x updates: random drops, random bounded stamp delays, forced updates
  // at the tau2 window boundary. Freshness holds because the stamp lower
  // bound tracks the last stamp used.
  for (int k = 0; k < K; ++k) {
    int last_active = 0;
    int last_stamp = 0;
    for (int t = 1; t <= T; ++t) {
      const bool forced = (t - last_active >= model.tau2);
      const double roll = uniform01(substream(model.seed, kDropTag,
                                              static_cast<std::uint64_t>(t),
                                              static_cast<std::uint64_t>(k)));
      const bool active = forced || roll >= model.drop_prob;
      if (!active) continue;

      const int lo = std::max(t - model.tau1 + 1, last_stamp + 1);
      const int hi = t + 1;
      int stamp = hi;
      if (lo < hi) {
        const double u = uniform01(substream(model.seed, kStampTag,
                                             static_cast<std::uint64_t>(t),
                                             static_cast<std::uint64_t>(k)));
        stamp = lo + static_cast<int>(u * (hi - lo + 1));
        stamp = std::min(stamp, hi);
      }
      schedule.set_x_update(t, k, stamp);
      last_active = t;
      last_stamp = stamp;
    }
  }

  // z updates: random drops, then forced activations (earliest inactive
  // slots first) until the strict frequency bound holds.
  const int required = static_cast<int>(std::floor(T * model.z_freq)) + 1;
  for (int j = 0; j < K; ++j) {
    int count = 0;
    for (int t = 1; t <= T; ++t) {
      const double roll = uniform01(substream(model.seed, kZTag,
                                              static_cast<std::uint64_t>(t),
                                              static_cast<std::uint64_t>(j)));
      const bool active = roll >= model.drop_prob;
      schedule.set_z_active(t, j, active);
      if (active) count++;
    }
    for (int t = 1; t <= T && count < required; ++t) {
      if (!schedule.z_is_active(t, j)) {
        schedule.set_z_active(t, j, true);
        count++;
      }
    }
    if (count < required) {
      throw ScheduleError("generate: z-frequency invariant unsatisfiable for coordinate " +
                          std::to_string(j));
    }
  }

  schedule.finalize();
  return schedule;
}

ScheduleReport validate(const Schedule& schedule, const DelayModel& model) {
  ScheduleReport report;
  const int T = schedule.horizon();
  const int K = schedule.nodes();

  for (int k = 0; k < K; ++k) {
    int last_active = 0;
    int last_stamp = 0;
    for (int t = 1; t <= T; ++t) {
      if (schedule.x_is_active(t, k)) {
        const int stamp = schedule.stamp(t, k);
        if (stamp < t - model.tau1 + 1 || stamp > t + 1) {
          report.issues.push_back({t, k, "gradient-age"});
        }
        if (last_stamp != 0 && stamp <= last_stamp) {
          report.issues.push_back({t, k, "freshness"});
        }
        last_stamp = stamp;
        last_active = t;
      } else if (t - last_active > model.tau2) {
        report.issues.push_back({t, k, "update-gap"});
        last_active = t;  // report each window once
      }
    }
  }

  for (int j = 0; j < K; ++j) {
    int count = 0;
    for (int t = 1; t <= T; ++t) {
      if (schedule.z_is_active(t, j)) count++;
    }
    if (!(count > T * model.z_freq)) {
      report.issues.push_back({T, j, "z-frequency"});
    }
  }

  std::sort(report.issues.begin(), report.issues.end(),
            [](const ScheduleIssue& a, const ScheduleIssue& b) {
              return a.slot != b.slot ? a.slot < b.slot : a.node < b.node;
            });
  return report;
}

int last_update_index(const Schedule& schedule, int t, int k) {
  const int hi = std::min(t + 1, schedule.horizon() + 1);
  for (int i = hi; i >= 2; --i) {
    if (schedule.x_is_active(i - 1, k)) return i;
  }
  return 1;  // sentinel: no update yet
}

void save_schedule(const Schedule& schedule, std::ostream& out) {
  out << "# slot node active_x stamp active_z\n";
  out << "T " << schedule.horizon() << " K " << schedule.nodes() << "\n";
  for (int t = 1; t <= schedule.horizon(); ++t) {
    for (int k = 0; k < schedule.nodes(); ++k) {
      const bool ax = schedule.x_is_active(t, k);
      out << t << ' ' << k << ' ' << (ax ? 1 : 0) << ' ' << (ax ? schedule.stamp(t, k) : 0)
          << ' ' << (schedule.z_is_active(t, k) ? 1 : 0) << '\n';
    }
  }
}

Schedule load_schedule(std::istream& in) {
  std::string line;
  int T = 0, K = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream header(line);
    std::string tagT, tagK;
    if (!(header >> tagT >> T >> tagK >> K) || tagT != "T" || tagK != "K") {
      throw ParameterError("load_schedule: malformed header");
    }
    break;
  }
  Schedule schedule(T, K);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    int t, k, ax, stamp, az;
    if (!(row >> t >> k >> ax >> stamp >> az)) {
      throw ParameterError("load_schedule: malformed row: " + line);
    }
    if (ax) schedule.set_x_update(t, k, stamp);
    schedule.set_z_active(t, k, az != 0);
  }
  schedule.finalize();
  return schedule;
}

}  // namespace disc
