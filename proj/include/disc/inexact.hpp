#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "disc/core.hpp"

namespace disc {

/// Source of gradient perturbations. Generation is a pure function of
/// (seed, slot, node), so replaying a run reproduces identical errors.
struct ErrorModel {
  enum class Kind { Exact, AdditiveGaussian, UniformQuantize, BoundedAdversarial };

  Kind kind = Kind::Exact;
  double sigma = 0.0;   // AdditiveGaussian
  double step = 0.0;    // UniformQuantize
  double bound = 0.0;   // BoundedAdversarial
  std::uint64_t seed = 0;

  static ErrorModel exact() { return {}; }
  static ErrorModel additive_gaussian(double sigma, std::uint64_t seed);
  static ErrorModel uniform_quantize(double step);
  static ErrorModel bounded_adversarial(double bound, std::uint64_t seed);

  bool is_exact() const { return kind == Kind::Exact; }
};

struct PerturbedGradient {
  Vector grad;           // true gradient plus error
  double error_norm_sq;  // ||e||^2
};

PerturbedGradient perturb_gradient(const ErrorModel& model, const Vector& true_grad,
                                   int slot, int node);

/// Per-slot, per-node record of squared injected-error norms.
class ErrorLedger {
 public:
  struct Row {
    int slot;
    int node;
    double error_norm_sq;
  };

  void record(int slot, int node, double error_norm_sq);
  /// Marks a slot as recorded even when no node was active in it.
  void note_slot(int slot) { last_slot_ = slot > last_slot_ ? slot : last_slot_; }
  const std::vector<Row>& rows() const { return rows_; }
  int last_slot() const { return last_slot_; }
  double total() const { return total_; }
  bool all_zero() const { return total_ == 0.0; }

  void to_csv(std::ostream& out) const;

 private:
  std::vector<Row> rows_;
  int last_slot_ = 0;
  double total_ = 0.0;
};

/// E_T: (1/T) sum over slots t <= T of the mean squared error over the
/// nodes active at t (0 for slots with no active node). The ledger keeps
/// the raw per-node records so the summed convention stays recoverable.
double average_error(const ErrorLedger& ledger, int T);

}  // namespace disc
