#include "disc/core.hpp"

#include <algorithm>
#include <cmath>

#include "disc/rng.hpp"

namespace disc {

namespace {

void require_dim(const Vector& v, int n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(n) +
                         ", got " + std::to_string(v.size()));
  }
}

Vector random_in_ball(std::mt19937_64& eng, int dim, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = u(eng);
  return v;
}

}  // namespace

CoordMask::CoordMask(int dim, std::vector<int> active_indices)
    : dim_(dim), active_(std::move(active_indices)), member_(static_cast<size_t>(dim), 0) {
  if (dim <= 0) throw ParameterError("CoordMask: dimension must be positive");
  std::sort(active_.begin(), active_.end());
  active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
  for (int j : active_) {
    if (j < 0 || j >= dim) throw ParameterError("CoordMask: index out of range");
    member_[static_cast<size_t>(j)] = 1;
  }
}

CoordMask CoordMask::full(int dim) {
  std::vector<int> all(static_cast<size_t>(dim));
  for (int j = 0; j < dim; ++j) all[static_cast<size_t>(j)] = j;
  return CoordMask(dim, std::move(all));
}

Vector CoordMask::apply(const Vector& v) const {
  require_dim(v, dim_, "CoordMask::apply");
  Vector out = Vector::Zero(dim_);
  for (int j : active_) out[j] = v[j];
  return out;
}

void CoordMask::apply_in_place(Vector& v) const {
  require_dim(v, dim_, "CoordMask::apply_in_place");
  for (int j = 0; j < dim_; ++j) {
    if (!member_[static_cast<size_t>(j)]) v[j] = 0.0;
  }
}

double CoordMask::masked_norm_sq(const Vector& v) const {
  require_dim(v, dim_, "CoordMask::masked_norm_sq");
  double s = 0.0;
  for (int j : active_) s += v[j] * v[j];
  return s;
}

double CoordMask::masked_dot(const Vector& u, const Vector& v) const {
  require_dim(u, dim_, "CoordMask::masked_dot");
  require_dim(v, dim_, "CoordMask::masked_dot");
  double s = 0.0;
  for (int j : active_) s += u[j] * v[j];
  return s;
}

FeasibleSet FeasibleSet::unconstrained(int dim) {
  FeasibleSet set;
  set.dim_ = dim;
  set.bounded_ = false;
  set.lower_ = Vector::Constant(dim, -kInf);
  set.upper_ = Vector::Constant(dim, kInf);
  return set;
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw DimensionError("FeasibleSet::box: bound sizes differ");
  for (int j = 0; j < lower.size(); ++j) {
    if (!(lower[j] <= upper[j])) throw ParameterError("FeasibleSet::box: lower > upper");
  }
  FeasibleSet set;
  set.dim_ = static_cast<int>(lower.size());
  set.bounded_ = true;
  set.lower_ = std::move(lower);
  set.upper_ = std::move(upper);
  return set;
}

bool FeasibleSet::contains(const Vector& z) const {
  require_dim(z, dim_, "FeasibleSet::contains");
  if (!bounded_) return true;
  for (int j = 0; j < dim_; ++j) {
    if (z[j] < lower_[j] || z[j] > upper_[j]) return false;
  }
  return true;
}

Vector FeasibleSet::project(const Vector& z) const {
  require_dim(z, dim_, "FeasibleSet::project");
  if (!bounded_) return z;
  Vector out(dim_);
  for (int j = 0; j < dim_; ++j) out[j] = std::min(std::max(z[j], lower_[j]), upper_[j]);
  return out;
}

double FeasibleSet::clamp1(int j, double v) const {
  if (!bounded_) return v;
  return std::min(std::max(v, lower_[j]), upper_[j]);
}

double RegularizerSpec::nonsmooth_value(const Vector& z) const {
  switch (nonsmooth) {
    case NonsmoothKind::Zero:
      return 0.0;
    case NonsmoothKind::L1:
      return l1_weight * z.lpNorm<1>();
  }
  return 0.0;
}

ConsensusProblem::ConsensusProblem(std::vector<NodeLoss> losses, RegularizerSpec regularizer,
                                   FeasibleSet feasible)
    : losses_(std::move(losses)), regularizer_(std::move(regularizer)),
      feasible_(std::move(feasible)) {
  if (losses_.empty()) throw ParameterError("ConsensusProblem: at least one node required");
  n_ = losses_.front().mask.dim();
  for (const NodeLoss& node : losses_) {
    if (node.mask.dim() != n_) throw DimensionError("ConsensusProblem: mask dimensions differ");
  }
  if (feasible_.dim() != n_) throw DimensionError("ConsensusProblem: feasible set dimension");

  std::vector<int> coverage(static_cast<size_t>(n_), 0);
  for (const NodeLoss& node : losses_) {
    for (int j : node.mask.active()) coverage[static_cast<size_t>(j)]++;
  }
  coverage_min_ = *std::min_element(coverage.begin(), coverage.end());
  if (coverage_min_ < 1) {
    throw ParameterError("ConsensusProblem: some coordinate is covered by no mask");
  }
}

double ConsensusProblem::max_loss_smoothness() const {
  double L = 0.0;
  for (const NodeLoss& node : losses_) L = std::max(L, node.smoothness);
  return L;
}

double objective(const ConsensusProblem& problem, const Vector& z) {
  if (z.size() != problem.dim()) throw DimensionError("objective: z has wrong dimension");
  if (!z.allFinite()) throw ParameterError("objective: z is not finite");
  if (!problem.feasible().contains(z)) return kInf;
  double total = problem.regularizer().value(z);
  for (const NodeLoss& node : problem.losses()) total += node.value(z);
  return total;
}

double augmented_lagrangian(const ConsensusProblem& problem, const std::vector<Vector>& xs,
                            const Vector& z, const std::vector<Vector>& ys, double rho) {
  if (rho <= 0.0) throw ParameterError("augmented_lagrangian: rho must be positive");
  const int n = problem.dim();
  const int K = problem.nodes();
  if (static_cast<int>(xs.size()) != K || static_cast<int>(ys.size()) != K) {
    throw DimensionError("augmented_lagrangian: need one x and y per node");
  }
  require_dim(z, n, "augmented_lagrangian");
  if (!problem.feasible().contains(z)) return kInf;

  double total = problem.regularizer().value(z);
  for (int k = 0; k < K; ++k) {
    const NodeLoss& node = problem.loss(k);
    require_dim(xs[static_cast<size_t>(k)], n, "augmented_lagrangian");
    require_dim(ys[static_cast<size_t>(k)], n, "augmented_lagrangian");
    const Vector diff = xs[static_cast<size_t>(k)] - z;
    total += node.value(xs[static_cast<size_t>(k)]);
    total += node.mask.masked_dot(ys[static_cast<size_t>(k)], diff);
    total += 0.5 * rho * node.mask.masked_norm_sq(diff);
  }
  return total;
}

double consensus_residual(const ConsensusProblem& problem, const std::vector<Vector>& xs,
                          const Vector& z) {
  const int n = problem.dim();
  require_dim(z, n, "consensus_residual");
  if (static_cast<int>(xs.size()) != problem.nodes()) {
    throw DimensionError("consensus_residual: need one x per node");
  }
  double worst = 0.0;
  for (int k = 0; k < problem.nodes(); ++k) {
    require_dim(xs[static_cast<size_t>(k)], n, "consensus_residual");
    worst = std::max(worst,
                     problem.loss(k).mask.masked_norm_sq(xs[static_cast<size_t>(k)] - z));
  }
  return worst;
}

CheckReport check_gradient_lipschitz(const SmoothFn& fn, double lipschitz, int dim,
                                     int samples, double radius, std::uint64_t seed,
                                     const CoordMask* mask) {
  CheckReport report;
  if (fn.empty()) return report;
  auto eng = make_engine(seed, 0x11b);
  for (int s = 0; s < samples; ++s) {
    Vector a = random_in_ball(eng, dim, radius);
    Vector b = random_in_ball(eng, dim, radius);
    const Vector ga = fn.grad(a);
    const Vector gb = fn.grad(b);
    const double dist = mask ? std::sqrt(mask->masked_norm_sq(a - b)) : (a - b).norm();
    const double grad_dist = mask ? std::sqrt(mask->masked_norm_sq(ga - gb)) : (ga - gb).norm();
    const double excess = grad_dist - lipschitz * dist;
    if (excess > report.worst) {
      report.worst = excess;
      report.detail = "gradient variation exceeds L * distance";
    }
  }
  report.pass = report.worst <= 1e-8;
  return report;
}

CheckReport check_convex_midpoint(const std::function<double(const Vector&)>& fn, int dim,
                                  int samples, double radius, std::uint64_t seed) {
  CheckReport report;
  auto eng = make_engine(seed, 0x11c);
  for (int s = 0; s < samples; ++s) {
    Vector a = random_in_ball(eng, dim, radius);
    Vector b = random_in_ball(eng, dim, radius);
    const double mid = fn(0.5 * (a + b));
    const double excess = mid - 0.5 * (fn(a) + fn(b));
    if (excess > report.worst) {
      report.worst = excess;
      report.detail = "midpoint inequality violated";
    }
  }
  report.pass = report.worst <= 1e-8;
  return report;
}

CheckReport check_mask_insensitivity(const NodeLoss& node, int samples, double radius,
                                     std::uint64_t seed) {
  CheckReport report;
  auto eng = make_engine(seed, 0x11d);
  for (int s = 0; s < samples; ++s) {
    Vector x = random_in_ball(eng, node.mask.dim(), radius);
    const double diff = std::abs(node.value(x) - node.value(node.mask.apply(x)));
    if (diff > report.worst) {
      report.worst = diff;
      report.detail = "g_k(x) != g_k(P_k x)";
    }
  }
  report.pass = report.worst <= 1e-10;
  return report;
}

}  // namespace disc
