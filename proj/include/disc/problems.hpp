#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "disc/core.hpp"
#include "disc/engine_decentralized.hpp"
#include "disc/surrogates.hpp"

namespace disc {

/// Built-in benchmark instance. `surrogates` is filled for recipes whose
/// natural x-update goes through a non-linear surrogate family.
struct Recipe {
  std::string name;
  ConsensusProblem problem;
  std::optional<Vector> known_optimum;  // convex recipes only
  std::vector<SurrogateModel> surrogates;
};

/// g_k(x) = ||A_k x - b_k||^2 / 2 with well-conditioned A_k,
/// h = (mu/2) ||z||^2; the optimum solves the normal equations.
/// `condition` stretches the singular values of each A_k.
Recipe convex_quadratic_consensus(int K, int n, std::uint64_t seed, double mu = 0.1,
                                  double condition = 2.0);

/// Convex least squares per node plus the smooth l0 approximation
/// h^s(z) = lambda sum_j z_j^2 / (z_j^2 + theta); optional l1 part.
Recipe nonconvex_regression(int K, int n, double theta, double lambda, std::uint64_t seed,
                            double l1_weight = 0.0, double condition = 4.0);

/// DC family: g_k = convex quartic minus convex quadratic.
Recipe dc_problem(int K, int n, std::uint64_t seed);

/// Product family: g_k = f1 * f2 with bounded quadratics on a box.
Recipe product_problem(int K, int n, std::uint64_t seed);

/// Block-convex family: f(x1, x2) = ||M - x1 x2^T||^2 / 2 at tiny size,
/// flattened to a single node of dimension 2 m r.
Recipe bilinear_factorization(int m, int r, std::uint64_t seed);

/// Separable convex quadratic over a graph for the decentralized engine:
/// g_k couples the coordinates of N_k, h_j(z_j) = (mu/2) z_j^2.
Recipe decentralized_quadratic(const Graph& graph, double mu, std::uint64_t seed);

struct StationaryPoint {
  Vector point;
  double theta;
};

/// Grid scan over [lo, hi] (total dimension <= 2) returning grid-local
/// minima of the stationarity residual below the threshold. theta_tol <= 0
/// selects (4 L step)^2 with L the total smoothness. Chunked scan merges
/// deterministically, so the parallel and serial paths agree exactly.
std::vector<StationaryPoint> brute_force_stationary(const ConsensusProblem& problem,
                                                    const Vector& lo, const Vector& hi,
                                                    double grid_step, double theta_tol = -1.0,
                                                    bool parallel = true);

}  // namespace disc
