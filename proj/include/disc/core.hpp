#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "disc/errors.hpp"

namespace disc {

using Vector = Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// A differentiable scalar field given by value and gradient callables.
struct SmoothFn {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;

  bool empty() const { return !value; }
  double operator()(const Vector& x) const { return value(x); }
};

/// 0/1 coordinate projection: P v zeroes every coordinate outside the
/// active set. Idempotent and self-adjoint by construction.
class CoordMask {
 public:
  CoordMask() = default;
  CoordMask(int dim, std::vector<int> active_indices);

  static CoordMask full(int dim);

  int dim() const { return dim_; }
  int count() const { return static_cast<int>(active_.size()); }
  bool is_active(int j) const { return member_[static_cast<size_t>(j)] != 0; }
  const std::vector<int>& active() const { return active_; }

  Vector apply(const Vector& v) const;
  void apply_in_place(Vector& v) const;
  double masked_norm_sq(const Vector& v) const;
  double masked_dot(const Vector& u, const Vector& v) const;

 private:
  int dim_ = 0;
  std::vector<int> active_;
  std::vector<uint8_t> member_;
};

/// Closed convex feasible set: all of R^n or a coordinate product of
/// intervals (entries of lower/upper may be +-inf).
class FeasibleSet {
 public:
  static FeasibleSet unconstrained(int dim);
  static FeasibleSet box(Vector lower, Vector upper);

  int dim() const { return dim_; }
  bool is_unconstrained() const { return !bounded_; }
  bool contains(const Vector& z) const;
  Vector project(const Vector& z) const;
  double clamp1(int j, double v) const;
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  int dim_ = 0;
  bool bounded_ = false;
  Vector lower_, upper_;
};

enum class NonsmoothKind { Zero, L1 };

/// Regularizer h = h^s + h^c. The indicator of the feasible set lives in
/// FeasibleSet, not here.
struct RegularizerSpec {
  SmoothFn smooth;            // h^s, empty means 0
  double lipschitz = 0.0;     // L_h for grad h^s
  NonsmoothKind nonsmooth = NonsmoothKind::Zero;
  double l1_weight = 0.0;     // lambda when nonsmooth == L1
  bool separable = false;     // h(z) = sum_j h_j(z_j)

  double smooth_value(const Vector& z) const { return smooth.empty() ? 0.0 : smooth.value(z); }
  Vector smooth_grad(const Vector& z) const {
    return smooth.empty() ? Vector(Vector::Zero(z.size())) : smooth.grad(z);
  }
  double nonsmooth_value(const Vector& z) const;
  double value(const Vector& z) const { return smooth_value(z) + nonsmooth_value(z); }
};

/// Per-node loss g_k; depends on its argument only through the mask.
struct NodeLoss {
  SmoothFn loss;
  CoordMask mask;
  double smoothness = 0.0;  // L_g

  double value(const Vector& x) const { return loss.value(x); }
  Vector grad(const Vector& x) const { return mask.apply(loss.grad(x)); }
};

class ConsensusProblem {
 public:
  ConsensusProblem(std::vector<NodeLoss> losses, RegularizerSpec regularizer,
                   FeasibleSet feasible);

  int dim() const { return n_; }
  int nodes() const { return static_cast<int>(losses_.size()); }
  const NodeLoss& loss(int k) const { return losses_[static_cast<size_t>(k)]; }
  const std::vector<NodeLoss>& losses() const { return losses_; }
  const RegularizerSpec& regularizer() const { return regularizer_; }
  const FeasibleSet& feasible() const { return feasible_; }

  /// lambda_p: minimum over coordinates of how many node masks cover it.
  int coverage_min() const { return coverage_min_; }
  double max_loss_smoothness() const;

 private:
  int n_ = 0;
  std::vector<NodeLoss> losses_;
  RegularizerSpec regularizer_;
  FeasibleSet feasible_;
  int coverage_min_ = 0;
};

/// h(z) + sum_k g_k(z); +inf outside the feasible set.
double objective(const ConsensusProblem& problem, const Vector& z);

/// h(z) + sum_k [ g_k(x_k) + <P_k y_k, x_k - z> + (rho/2) ||P_k(z - x_k)||^2 ].
double augmented_lagrangian(const ConsensusProblem& problem,
                            const std::vector<Vector>& xs, const Vector& z,
                            const std::vector<Vector>& ys, double rho);

/// max_k ||P_k(x_k - z)||^2.
double consensus_residual(const ConsensusProblem& problem,
                          const std::vector<Vector>& xs, const Vector& z);

// Sampling-based validators for user-supplied constants and structure.
struct CheckReport {
  bool pass = true;
  double worst = 0.0;   // largest observed violation
  std::string detail;
};

CheckReport check_gradient_lipschitz(const SmoothFn& fn, double lipschitz, int dim,
                                     int samples, double radius, std::uint64_t seed,
                                     const CoordMask* mask = nullptr);
CheckReport check_convex_midpoint(const std::function<double(const Vector&)>& fn, int dim,
                                  int samples, double radius, std::uint64_t seed);
CheckReport check_mask_insensitivity(const NodeLoss& node, int samples, double radius,
                                     std::uint64_t seed);

}  // namespace disc
