#pragma once

#include <stdexcept>
#include <string>

namespace disc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct ParameterError : Error {
  using Error::Error;
};

struct RangeError : Error {
  using Error::Error;
};

// Requested h^c / constraint / engine combination is not supported.
struct CapabilityError : Error {
  using Error::Error;
};

// Schedule generation cannot satisfy an invariant, or an engine observed
// an internally inconsistent schedule.
struct ScheduleError : Error {
  using Error::Error;
};

// Inner solver ran out of iterations; carries the final gradient norm.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

// Iterates left the guard region; carries the slot where it happened.
struct DivergenceError : Error {
  DivergenceError(const std::string& what, int slot) : Error(what), slot(slot) {}
  int slot;
};

}  // namespace disc
