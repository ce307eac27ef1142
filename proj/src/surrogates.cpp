#include "disc/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "disc/rng.hpp"

namespace disc {

std::string to_string(SurrogateFamily family) {
  switch (family) {
    case SurrogateFamily::Linear: return "linear";
    case SurrogateFamily::DC: return "dc";
    case SurrogateFamily::Product: return "product";
    case SurrogateFamily::BlockConvex: return "block_convex";
  }
  return "?";
}

SurrogateModel::SurrogateModel(SurrogateFamily family, SmoothFn base, Value2 value,
                               Grad2 grad, double curvature, CoordMask mask)
    : family_(family), base_(std::move(base)), value_(std::move(value)),
      grad_(std::move(grad)), curvature_(curvature), mask_(std::move(mask)) {}

SurrogateModel linear_surrogate(SmoothFn g, double smoothness, CoordMask mask) {
  auto value = [g](const Vector& x, const Vector& anchor) {
    Vector grad_at_anchor = g.grad(anchor);
    if (!grad_at_anchor.allFinite()) throw ParameterError("linear_surrogate: non-finite gradient");
    return g.value(anchor) + grad_at_anchor.dot(x);
  };
  auto grad = [g](const Vector& /*x*/, const Vector& anchor) {
    Vector grad_at_anchor = g.grad(anchor);
    if (!grad_at_anchor.allFinite()) throw ParameterError("linear_surrogate: non-finite gradient");
    return grad_at_anchor;
  };
  return SurrogateModel(SurrogateFamily::Linear, std::move(g), value, grad, smoothness,
                        std::move(mask));
}

SurrogateModel dc_surrogate(SmoothFn g_plus, SmoothFn g_minus, double smoothness,
                            CoordMask mask) {
  SmoothFn base{
      [g_plus, g_minus](const Vector& x) { return g_plus.value(x) - g_minus.value(x); },
      [g_plus, g_minus](const Vector& x) { return (g_plus.grad(x) - g_minus.grad(x)).eval(); }};
  auto value = [g_plus, g_minus](const Vector& x, const Vector& anchor) {
    return g_plus.value(x) - g_minus.value(anchor) - g_minus.grad(anchor).dot(x);
  };
  auto grad = [g_plus, g_minus](const Vector& x, const Vector& anchor) {
    return (g_plus.grad(x) - g_minus.grad(anchor)).eval();
  };
  return SurrogateModel(SurrogateFamily::DC, std::move(base), value, grad, smoothness,
                        std::move(mask));
}

SurrogateModel product_surrogate(SmoothFn f1, SmoothFn f2, const ProductBounds& bounds,
                                 CoordMask mask) {
  if (bounds.value_bound <= 0.0 || bounds.value_lipschitz <= 0.0 ||
      bounds.grad_bound <= 0.0 || bounds.grad_lipschitz < 0.0) {
    throw ParameterError("product_surrogate: bound constants G, L, G', L' are required");
  }
  const double curvature = std::max(4.0 * bounds.grad_lipschitz * bounds.value_bound,
                                    2.0 * bounds.value_lipschitz * bounds.value_lipschitz);
  SmoothFn base{[f1, f2](const Vector& x) { return f1.value(x) * f2.value(x); },
                [f1, f2](const Vector& x) {
                  return (f2.value(x) * f1.grad(x) + f1.value(x) * f2.grad(x)).eval();
                }};
  auto value = [f1, f2](const Vector& x, const Vector& anchor) {
    return f1.value(x) * f2.value(anchor) + f1.value(anchor) * f2.value(x);
  };
  auto grad = [f1, f2](const Vector& x, const Vector& anchor) {
    return (f2.value(anchor) * f1.grad(x) + f1.value(anchor) * f2.grad(x)).eval();
  };
  return SurrogateModel(SurrogateFamily::Product, std::move(base), value, grad, curvature,
                        std::move(mask));
}

SurrogateModel block_convex_surrogate(SmoothFn f, std::vector<std::vector<int>> blocks,
                                      double smoothness, CoordMask mask) {
  const int n = mask.dim();
  std::vector<int> owner(static_cast<size_t>(n), -1);
  for (size_t b = 0; b < blocks.size(); ++b) {
    for (int j : blocks[b]) {
      if (j < 0 || j >= n || owner[static_cast<size_t>(j)] != -1) {
        throw ParameterError("block_convex_surrogate: blocks must partition the coordinates");
      }
      owner[static_cast<size_t>(j)] = static_cast<int>(b);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (owner[static_cast<size_t>(j)] == -1) {
      throw ParameterError("block_convex_surrogate: blocks must partition the coordinates");
    }
  }

  // f~(x; a) = sum_i f(x on block i, a elsewhere)
  auto compose = [](const Vector& x, const Vector& anchor, const std::vector<int>& block) {
    Vector v = anchor;
    for (int j : block) v[j] = x[j];
    return v;
  };
  auto value = [f, blocks, compose](const Vector& x, const Vector& anchor) {
    double total = 0.0;
    for (const auto& block : blocks) total += f.value(compose(x, anchor, block));
    return total;
  };
  auto grad = [f, blocks, compose](const Vector& x, const Vector& anchor) {
    Vector out = Vector::Zero(x.size());
    for (const auto& block : blocks) {
      const Vector g = f.grad(compose(x, anchor, block));
      for (int j : block) out[j] = g[j];
    }
    return out;
  };
  return SurrogateModel(SurrogateFamily::BlockConvex, std::move(f), value, grad, smoothness,
                        std::move(mask));
}

bool SurrogateReport::pass(double tol) const {
  return worst_upper_bound <= tol && worst_tangency <= tol && worst_grad_lipschitz <= tol &&
         worst_convexity <= tol && worst_omega_equality <= tol;
}

std::string SurrogateReport::summary() const {
  std::ostringstream out;
  out << "P1' " << worst_upper_bound << "  P2' " << worst_tangency << "  P3' "
      << worst_grad_lipschitz << "  convexity " << worst_convexity << "  omega "
      << worst_omega_equality << "  (" << samples << " samples)";
  return out.str();
}

namespace {

SurrogateReport verify_chunk(const SurrogateModel& model, int begin, int end, double radius,
                             std::uint64_t seed) {
  SurrogateReport report;
  const int n = model.dim();
  const double L = model.curvature();
  for (int s = begin; s < end; ++s) {
    auto eng = make_engine(seed, 0x5a, static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> u(-radius, radius);
    Vector anchor(n), x(n), x2(n);
    for (int j = 0; j < n; ++j) anchor[j] = u(eng);
    for (int j = 0; j < n; ++j) x[j] = anchor[j] + u(eng);
    for (int j = 0; j < n; ++j) x2[j] = anchor[j] + u(eng);

    const double omega = model.omega(anchor);

    // P1': g(x) - g~(x; a) <= (L/2) ||P(x - a)||^2 + omega(a)
    const double p1 = model.base_value(x) - model.value(x, anchor) -
                      0.5 * L * model.mask().masked_norm_sq(x - anchor) - omega;
    report.worst_upper_bound = std::max(report.worst_upper_bound, p1);

    // P2': gradients match at the anchor
    const double p2 = (model.grad(anchor, anchor) - model.base_grad(anchor)).norm();
    report.worst_tangency = std::max(report.worst_tangency, p2);

    // P3': surrogate gradient is L-Lipschitz through the mask
    const double p3 = (model.grad(x, anchor) - model.grad(x2, anchor)).norm() -
                      L * std::sqrt(model.mask().masked_norm_sq(x - x2));
    report.worst_grad_lipschitz = std::max(report.worst_grad_lipschitz, p3);

    // convexity of x -> g~(x; a) via the midpoint inequality
    const double conv = model.value(0.5 * (x + x2), anchor) -
                        0.5 * (model.value(x, anchor) + model.value(x2, anchor));
    report.worst_convexity = std::max(report.worst_convexity, conv);

    // omega is exactly the anchor gap
    const double gap =
        std::abs(model.base_value(anchor) - model.value(anchor, anchor) - omega);
    report.worst_omega_equality = std::max(report.worst_omega_equality, gap);
  }
  report.samples = end - begin;
  return report;
}

void merge(SurrogateReport& into, const SurrogateReport& part) {
  into.worst_upper_bound = std::max(into.worst_upper_bound, part.worst_upper_bound);
  into.worst_tangency = std::max(into.worst_tangency, part.worst_tangency);
  into.worst_grad_lipschitz = std::max(into.worst_grad_lipschitz, part.worst_grad_lipschitz);
  into.worst_convexity = std::max(into.worst_convexity, part.worst_convexity);
  into.worst_omega_equality = std::max(into.worst_omega_equality, part.worst_omega_equality);
  into.samples += part.samples;
}

}  // namespace

SurrogateReport verify_properties(const SurrogateModel& model, int samples, double radius,
                                  std::uint64_t seed, bool parallel) {
  if (samples < 1) throw ParameterError("verify_properties: samples must be >= 1");
  if (!parallel) return verify_chunk(model, 0, samples, radius, seed);

  int chunks = 1;
#ifdef _OPENMP
  chunks = std::max(1, std::min(omp_get_max_threads(), samples));
#endif
  std::vector<SurrogateReport> parts(static_cast<size_t>(chunks));
  const int per = (samples + chunks - 1) / chunks;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int c = 0; c < chunks; ++c) {
    const int begin = c * per;
    const int end = std::min(samples, begin + per);
    if (begin < end) parts[static_cast<size_t>(c)] = verify_chunk(model, begin, end, radius, seed);
  }
  SurrogateReport report;
  for (const auto& part : parts) merge(report, part);  // fixed order
  return report;
}

}  // namespace disc
