#include "disc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "disc/diagnostics.hpp"
#include "disc/rng.hpp"

namespace disc {

namespace {

using Matrix = Eigen::MatrixXd;

Matrix random_orthogonal(int n, std::mt19937_64& eng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix raw(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) raw(i, j) = normal(eng);
  }
  Eigen::HouseholderQR<Matrix> qr(raw);
  Matrix q = qr.householderQ();
  return q;
}

// A = Q diag(s) with singular values log-spaced in [1/condition, 1].
Matrix conditioned_matrix(int n, double condition, std::mt19937_64& eng) {
  Matrix q = random_orthogonal(n, eng);
  Vector s(n);
  for (int j = 0; j < n; ++j) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
    s[j] = std::pow(1.0 / condition, frac);
  }
  return q * s.asDiagonal();
}

SmoothFn least_squares(Matrix a, Vector b) {
  auto value = [a, b](const Vector& x) { return 0.5 * (a * x - b).squaredNorm(); };
  auto grad = [a, b](const Vector& x) { return (a.transpose() * (a * x - b)).eval(); };
  return SmoothFn{value, grad};
}

double spectral_smoothness(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace

Recipe convex_quadratic_consensus(int K, int n, std::uint64_t seed, double mu,
                                  double condition) {
  if (K < 1 || n < 1) throw ParameterError("convex_quadratic_consensus: K, n >= 1");
  auto eng = make_engine(seed, 0xc0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<NodeLoss> losses;
  Matrix normal_matrix = mu * Matrix::Identity(n, n);
  Vector rhs = Vector::Zero(n);
  std::vector<SurrogateModel> surrogates;
  for (int k = 0; k < K; ++k) {
    Matrix a = conditioned_matrix(n, condition, eng);
    Vector b(n);
    for (int j = 0; j < n; ++j) b[j] = normal(eng);
    normal_matrix += a.transpose() * a;
    rhs += a.transpose() * b;
    NodeLoss node{least_squares(a, b), CoordMask::full(n), spectral_smoothness(a)};
    surrogates.push_back(linear_surrogate(node.loss, node.smoothness, node.mask));
    losses.push_back(std::move(node));
  }

  RegularizerSpec reg;
  if (mu > 0.0) {
    reg.smooth = SmoothFn{[mu](const Vector& z) { return 0.5 * mu * z.squaredNorm(); },
                          [mu](const Vector& z) { return (mu * z).eval(); }};
    reg.lipschitz = mu;
  }
  reg.separable = true;

  ConsensusProblem problem(std::move(losses), reg, FeasibleSet::unconstrained(n));
  Vector optimum = normal_matrix.ldlt().solve(rhs);
  return Recipe{"convex_quadratic", std::move(problem), std::move(optimum),
                std::move(surrogates)};
}

Recipe nonconvex_regression(int K, int n, double theta, double lambda, std::uint64_t seed,
                            double l1_weight, double condition) {
  if (theta <= 0.0) throw ParameterError("nonconvex_regression: theta must be > 0");
  auto eng = make_engine(seed, 0xc1);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<NodeLoss> losses;
  std::vector<SurrogateModel> surrogates;
  for (int k = 0; k < K; ++k) {
    Matrix a = conditioned_matrix(n, condition, eng);
    Vector b(n);
    for (int j = 0; j < n; ++j) b[j] = normal(eng);
    NodeLoss node{least_squares(a, b), CoordMask::full(n), spectral_smoothness(a)};
    surrogates.push_back(linear_surrogate(node.loss, node.smoothness, node.mask));
    losses.push_back(std::move(node));
  }

  RegularizerSpec reg;
  if (lambda > 0.0) {
    // smooth l0 approximation; max |d^2/dz^2| of z^2/(z^2+theta) is 2/theta at 0
    reg.smooth = SmoothFn{
        [lambda, theta](const Vector& z) {
          double total = 0.0;
          for (int j = 0; j < z.size(); ++j) {
            total += z[j] * z[j] / (z[j] * z[j] + theta);
          }
          return lambda * total;
        },
        [lambda, theta](const Vector& z) {
          Vector g(z.size());
          for (int j = 0; j < z.size(); ++j) {
            const double d = z[j] * z[j] + theta;
            g[j] = lambda * 2.0 * theta * z[j] / (d * d);
          }
          return g;
        }};
    reg.lipschitz = 2.0 * lambda / theta;
  }
  if (l1_weight > 0.0) {
    reg.nonsmooth = NonsmoothKind::L1;
    reg.l1_weight = l1_weight;
  }
  reg.separable = true;

  ConsensusProblem problem(std::move(losses), reg, FeasibleSet::unconstrained(n));
  return Recipe{"nonconvex_regression", std::move(problem), std::nullopt,
                std::move(surrogates)};
}

Recipe dc_problem(int K, int n, std::uint64_t seed) {
  auto eng = make_engine(seed, 0xc2);
  std::uniform_real_distribution<double> ua(0.05, 0.15);
  std::uniform_real_distribution<double> uc(0.2, 0.5);
  std::uniform_real_distribution<double> ub(0.8, 1.5);

  // constants valid on |x_j| <= 10, comfortably beyond the run region
  constexpr double kRegion = 10.0;

  std::vector<NodeLoss> losses;
  std::vector<SurrogateModel> surrogates;
  for (int k = 0; k < K; ++k) {
    Vector a(n), c(n), beta(n);
    for (int j = 0; j < n; ++j) {
      a[j] = ua(eng);
      c[j] = uc(eng);
      beta[j] = ub(eng);
    }
    SmoothFn plus{[a, c](const Vector& x) {
                    double total = 0.0;
                    for (int j = 0; j < x.size(); ++j) {
                      total += a[j] * std::pow(x[j], 4) + c[j] * x[j] * x[j];
                    }
                    return total;
                  },
                  [a, c](const Vector& x) {
                    Vector g(x.size());
                    for (int j = 0; j < x.size(); ++j) {
                      g[j] = 4.0 * a[j] * std::pow(x[j], 3) + 2.0 * c[j] * x[j];
                    }
                    return g;
                  }};
    SmoothFn minus{[beta](const Vector& x) {
                     double total = 0.0;
                     for (int j = 0; j < x.size(); ++j) total += beta[j] * x[j] * x[j];
                     return total;
                   },
                   [beta](const Vector& x) {
                     Vector g(x.size());
                     for (int j = 0; j < x.size(); ++j) g[j] = 2.0 * beta[j] * x[j];
                     return g;
                   }};
    double L = 0.0;
    for (int j = 0; j < n; ++j) {
      L = std::max(L, 12.0 * a[j] * kRegion * kRegion + 2.0 * c[j] + 2.0 * beta[j]);
    }
    SmoothFn base{[plus, minus](const Vector& x) { return plus.value(x) - minus.value(x); },
                  [plus, minus](const Vector& x) {
                    return (plus.grad(x) - minus.grad(x)).eval();
                  }};
    CoordMask mask = CoordMask::full(n);
    surrogates.push_back(dc_surrogate(plus, minus, L, mask));
    losses.push_back(NodeLoss{base, mask, L});
  }

  RegularizerSpec reg;
  reg.separable = true;
  ConsensusProblem problem(std::move(losses), reg,
                           FeasibleSet::box(Vector::Constant(n, -3.0),
                                            Vector::Constant(n, 3.0)));
  return Recipe{"dc", std::move(problem), std::nullopt, std::move(surrogates)};
}

Recipe product_problem(int K, int n, std::uint64_t seed) {
  auto eng = make_engine(seed, 0xc3);
  std::uniform_real_distribution<double> ualpha(0.3, 0.8);
  std::uniform_real_distribution<double> ucenter(-0.5, 0.5);

  // bound constants valid on ||x||_inf <= 6 so that property sampling in
  // radius 2 around radius-2 anchors stays covered
  constexpr double kRegion = 6.0;

  std::vector<NodeLoss> losses;
  std::vector<SurrogateModel> surrogates;
  for (int k = 0; k < K; ++k) {
    Vector c1(n), c2(n);
    for (int j = 0; j < n; ++j) {
      c1[j] = ucenter(eng);
      c2[j] = ucenter(eng);
    }
    const double a1 = ualpha(eng);
    const double a2 = ualpha(eng);
    auto quad = [](double alpha, Vector c, double offset) {
      return SmoothFn{[alpha, c, offset](const Vector& x) {
                        return 0.5 * alpha * (x - c).squaredNorm() + offset;
                      },
                      [alpha, c](const Vector& x) { return (alpha * (x - c)).eval(); }};
    };
    SmoothFn f1 = quad(a1, c1, 0.5);
    SmoothFn f2 = quad(a2, c2, 0.5);

    const double reach = kRegion * std::sqrt(static_cast<double>(n)) + 0.5 * std::sqrt(2.0);
    const double alpha = std::max(a1, a2);
    ProductBounds bounds;
    bounds.grad_lipschitz = alpha;                                   // L'
    bounds.grad_bound = alpha * reach;                               // G'
    bounds.value_lipschitz = bounds.grad_bound;                      // L
    bounds.value_bound = 0.5 * alpha * reach * reach + 0.5;          // G

    CoordMask mask = CoordMask::full(n);
    SurrogateModel model = product_surrogate(f1, f2, bounds, mask);
    SmoothFn base{[f1, f2](const Vector& x) { return f1.value(x) * f2.value(x); },
                  [f1, f2](const Vector& x) {
                    return (f2.value(x) * f1.grad(x) + f1.value(x) * f2.grad(x)).eval();
                  }};
    losses.push_back(NodeLoss{base, mask, model.curvature()});
    surrogates.push_back(std::move(model));
  }

  RegularizerSpec reg;
  reg.separable = true;
  ConsensusProblem problem(std::move(losses), reg,
                           FeasibleSet::box(Vector::Constant(n, -1.0),
                                            Vector::Constant(n, 1.0)));
  return Recipe{"product", std::move(problem), std::nullopt, std::move(surrogates)};
}

Recipe bilinear_factorization(int m, int r, std::uint64_t seed) {
  if (m < 1 || m > 4 || r != 1) {
    throw ParameterError("bilinear_factorization: need 1 <= m <= 4 and r == 1");
  }
  auto eng = make_engine(seed, 0xc4);
  std::normal_distribution<double> normal(0.0, 0.5);
  Matrix target(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) target(i, j) = normal(eng);
  }

  const int n = 2 * m;
  // x = [u; v], f = ||M - u v^T||^2 / 2
  SmoothFn f{[target, m](const Vector& x) {
               const Vector u = x.head(m), v = x.tail(m);
               return 0.5 * (target - u * v.transpose()).squaredNorm();
             },
             [target, m](const Vector& x) {
               const Vector u = x.head(m), v = x.tail(m);
               const Matrix resid = u * v.transpose() - target;
               Vector g(2 * m);
               g.head(m) = resid * v;
               g.tail(m) = resid.transpose() * u;
               return g;
             }};

  // Hessian blocks are ||v||^2 I, ||u||^2 I, and cross terms built from
  // u v^T and the residual; on ||x||_inf <= 4 this bound is generous
  constexpr double kRegion = 4.0;
  const double point_bound = kRegion * kRegion * m;
  const double L = 3.0 * point_bound + target.norm();

  std::vector<std::vector<int>> blocks(2);
  for (int j = 0; j < m; ++j) blocks[0].push_back(j);
  for (int j = m; j < n; ++j) blocks[1].push_back(j);

  CoordMask mask = CoordMask::full(n);
  std::vector<SurrogateModel> surrogates{block_convex_surrogate(f, blocks, L, mask)};
  std::vector<NodeLoss> losses{NodeLoss{f, mask, L}};

  RegularizerSpec reg;
  reg.separable = true;
  ConsensusProblem problem(std::move(losses), reg,
                           FeasibleSet::box(Vector::Constant(n, -2.0),
                                            Vector::Constant(n, 2.0)));
  return Recipe{"bilinear", std::move(problem), std::nullopt, std::move(surrogates)};
}

Recipe decentralized_quadratic(const Graph& graph, double mu, std::uint64_t seed) {
  const int K = graph.nodes();
  auto eng = make_engine(seed, 0xc5);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix normal_matrix = mu * Matrix::Identity(K, K);
  Vector rhs = Vector::Zero(K);

  std::vector<NodeLoss> losses;
  std::vector<SurrogateModel> surrogates;
  const std::vector<CoordMask> masks = graph.masks();
  for (int k = 0; k < K; ++k) {
    const std::vector<int> nbrs = graph.closed_neighborhood(k);
    const int d = static_cast<int>(nbrs.size());
    Matrix a = conditioned_matrix(d, 2.0, eng);
    Vector b(d);
    for (int j = 0; j < d; ++j) b[j] = normal(eng);

    // scatter A over the neighborhood coordinates of the full space
    Matrix a_full = Matrix::Zero(d, K);
    for (int j = 0; j < d; ++j) a_full.col(nbrs[static_cast<size_t>(j)]) = a.col(j);
    normal_matrix += a_full.transpose() * a_full;
    rhs += a_full.transpose() * b;

    NodeLoss node{least_squares(a_full, b), masks[static_cast<size_t>(k)],
                  spectral_smoothness(a_full)};
    surrogates.push_back(linear_surrogate(node.loss, node.smoothness, node.mask));
    losses.push_back(std::move(node));
  }

  RegularizerSpec reg;
  if (mu > 0.0) {
    reg.smooth = SmoothFn{[mu](const Vector& z) { return 0.5 * mu * z.squaredNorm(); },
                          [mu](const Vector& z) { return (mu * z).eval(); }};
    reg.lipschitz = mu;
  }
  reg.separable = true;

  ConsensusProblem problem(std::move(losses), reg, FeasibleSet::unconstrained(K));
  Vector optimum = normal_matrix.ldlt().solve(rhs);
  return Recipe{"decentralized_quadratic", std::move(problem), std::move(optimum),
                std::move(surrogates)};
}

namespace {

struct GridPoint {
  long index;
  double theta;
};

}  // namespace

std::vector<StationaryPoint> brute_force_stationary(const ConsensusProblem& problem,
                                                    const Vector& lo, const Vector& hi,
                                                    double grid_step, double theta_tol,
                                                    bool parallel) {
  const int n = problem.dim();
  if (n > 2) throw ParameterError("brute_force_stationary: total dimension must be <= 2");
  if (lo.size() != n || hi.size() != n) {
    throw DimensionError("brute_force_stationary: bounds have wrong dimension");
  }
  for (int j = 0; j < n; ++j) {
    if (lo[j] > hi[j]) {
      std::cerr << "brute_force_stationary: empty search grid (lo > hi)\n";
      return {};
    }
  }
  if (grid_step <= 0.0) throw ParameterError("brute_force_stationary: grid_step must be > 0");

  if (theta_tol <= 0.0) {
    const double total_smoothness =
        problem.regularizer().lipschitz +
        problem.nodes() * problem.max_loss_smoothness();
    theta_tol = std::pow(4.0 * std::max(total_smoothness, 1.0) * grid_step, 2);
  }

  long nx = static_cast<long>(std::floor((hi[0] - lo[0]) / grid_step)) + 1;
  long ny = n == 2 ? static_cast<long>(std::floor((hi[1] - lo[1]) / grid_step)) + 1 : 1;
  const long total = nx * ny;

  std::vector<double> theta(static_cast<size_t>(total));
  auto point_at = [&](long idx) {
    Vector z(n);
    z[0] = lo[0] + static_cast<double>(idx % nx) * grid_step;
    if (n == 2) z[1] = lo[1] + static_cast<double>(idx / nx) * grid_step;
    return z;
  };

  // chunked evaluation; the merge below walks indices in order, so the
  // serial and parallel paths return identical results
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long idx = 0; idx < total; ++idx) {
      theta[static_cast<size_t>(idx)] = stationarity(problem, point_at(idx));
    }
  } else {
    for (long idx = 0; idx < total; ++idx) {
      theta[static_cast<size_t>(idx)] = stationarity(problem, point_at(idx));
    }
  }

  auto value = [&](long ix, long iy) { return theta[static_cast<size_t>(iy * nx + ix)]; };
  std::vector<char> qualifies(static_cast<size_t>(total), 0);
  for (long iy = 0; iy < ny; ++iy) {
    for (long ix = 0; ix < nx; ++ix) {
      const double v = value(ix, iy);
      if (v > theta_tol) continue;
      bool is_min = true;
      if (ix > 0) is_min = is_min && v <= value(ix - 1, iy);
      if (ix + 1 < nx) is_min = is_min && v <= value(ix + 1, iy);
      if (iy > 0) is_min = is_min && v <= value(ix, iy - 1);
      if (iy + 1 < ny) is_min = is_min && v <= value(ix, iy + 1);
      qualifies[static_cast<size_t>(iy * nx + ix)] = is_min ? 1 : 0;
    }
  }

  // merge adjacent qualifying points into one representative per cluster
  std::vector<StationaryPoint> out;
  std::vector<char> seen(static_cast<size_t>(total), 0);
  for (long idx = 0; idx < total; ++idx) {
    if (!qualifies[static_cast<size_t>(idx)] || seen[static_cast<size_t>(idx)]) continue;
    long best = idx;
    std::vector<long> stack{idx};
    seen[static_cast<size_t>(idx)] = 1;
    while (!stack.empty()) {
      const long cur = stack.back();
      stack.pop_back();
      if (theta[static_cast<size_t>(cur)] < theta[static_cast<size_t>(best)]) best = cur;
      const long cx = cur % nx, cy = cur / nx;
      const long neighbors[4][2] = {{cx - 1, cy}, {cx + 1, cy}, {cx, cy - 1}, {cx, cy + 1}};
      for (const auto& nb : neighbors) {
        if (nb[0] < 0 || nb[0] >= nx || nb[1] < 0 || nb[1] >= ny) continue;
        const long nidx = nb[1] * nx + nb[0];
        if (qualifies[static_cast<size_t>(nidx)] && !seen[static_cast<size_t>(nidx)]) {
          seen[static_cast<size_t>(nidx)] = 1;
          stack.push_back(nidx);
        }
      }
    }
    out.push_back({point_at(best), theta[static_cast<size_t>(best)]});
  }
  std::sort(out.begin(), out.end(), [](const StationaryPoint& a, const StationaryPoint& b) {
    return a.point[0] != b.point[0] ? a.point[0] < b.point[0]
                                    : (a.point.size() > 1 && a.point[1] < b.point[1]);
  });
  return out;
}

}  // namespace disc
