#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "disc/core.hpp"

namespace disc {

enum class SurrogateFamily { Linear, DC, Product, BlockConvex };

std::string to_string(SurrogateFamily family);

/// Anchor-parametric convex approximation g~(x; xbar) of a non-convex base
/// function. omega(xbar) = g(xbar) - g~(xbar; xbar) is always computed from
/// this definition; the per-family closed forms are used only as
/// cross-checks in the tests.
class SurrogateModel {
 public:
  using Value2 = std::function<double(const Vector&, const Vector&)>;
  using Grad2 = std::function<Vector(const Vector&, const Vector&)>;

  SurrogateModel() = default;
  SurrogateModel(SurrogateFamily family, SmoothFn base, Value2 value, Grad2 grad,
                 double curvature, CoordMask mask);

  SurrogateFamily family() const { return family_; }
  double curvature() const { return curvature_; }
  const CoordMask& mask() const { return mask_; }
  int dim() const { return mask_.dim(); }
  bool empty() const { return !value_; }

  double value(const Vector& x, const Vector& anchor) const { return value_(x, anchor); }
  Vector grad(const Vector& x, const Vector& anchor) const { return grad_(x, anchor); }
  double omega(const Vector& anchor) const {
    return base_.value(anchor) - value_(anchor, anchor);
  }
  double base_value(const Vector& x) const { return base_.value(x); }
  Vector base_grad(const Vector& x) const { return base_.grad(x); }

 private:
  SurrogateFamily family_ = SurrogateFamily::Linear;
  SmoothFn base_;
  Value2 value_;
  Grad2 grad_;
  double curvature_ = 0.0;
  CoordMask mask_;
};

/// g~(x; xbar) = g(xbar) + <grad g(xbar), x>.
SurrogateModel linear_surrogate(SmoothFn g, double smoothness, CoordMask mask);

/// g = g_plus - g_minus with both parts smooth convex:
/// g~(x; xbar) = g+(x) - g-(xbar) - <grad g-(xbar), x>.
SurrogateModel dc_surrogate(SmoothFn g_plus, SmoothFn g_minus, double smoothness,
                            CoordMask mask);

struct ProductBounds {
  double value_bound = 0.0;      // G:  |f_i| <= G
  double value_lipschitz = 0.0;  // L:  |f_i(x) - f_i(x')| <= L ||x - x'||
  double grad_bound = 0.0;       // G': ||grad f_i|| <= G'
  double grad_lipschitz = 0.0;   // L': ||grad f_i(x) - grad f_i(x')|| <= L' ||x - x'||
};

/// g = f1 * f2: g~(x; xbar) = f1(x) f2(xbar) + f1(xbar) f2(x),
/// curvature max{4 L' G, 2 L^2}.
SurrogateModel product_surrogate(SmoothFn f1, SmoothFn f2, const ProductBounds& bounds,
                                 CoordMask mask);

/// f block-convex over a coordinate partition:
/// f~({x_i}; {xbar_i}) = sum_i f(x_i, {xbar_j}_{j != i}).
SurrogateModel block_convex_surrogate(SmoothFn f, std::vector<std::vector<int>> blocks,
                                      double smoothness, CoordMask mask);

/// Worst observed violations of the surrogate axioms over random samples.
struct SurrogateReport {
  double worst_upper_bound = 0.0;   // P1': g - g~ - (L/2)||P dx||^2 - omega
  double worst_tangency = 0.0;      // P2': ||grad g~(a;a) - grad g(a)||
  double worst_grad_lipschitz = 0.0;// P3': ||grad dx|| - L ||P dx||
  double worst_convexity = 0.0;     // midpoint inequality slack
  double worst_omega_equality = 0.0;// |g(a) - g~(a;a) - omega(a)|
  int samples = 0;

  bool pass(double tol = 1e-8) const;
  std::string summary() const;
};

SurrogateReport verify_properties(const SurrogateModel& model, int samples, double radius,
                                  std::uint64_t seed, bool parallel = false);

}  // namespace disc
