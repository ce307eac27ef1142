#include "disc/inexact.hpp"

#include <cmath>
#include <ostream>

#include "disc/rng.hpp"

namespace disc {

ErrorModel ErrorModel::additive_gaussian(double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ParameterError("additive_gaussian: sigma must be >= 0");
  ErrorModel m;
  m.kind = Kind::AdditiveGaussian;
  m.sigma = sigma;
  m.seed = seed;
  return m;
}

ErrorModel ErrorModel::uniform_quantize(double step) {
  if (step <= 0.0) throw ParameterError("uniform_quantize: step must be > 0");
  ErrorModel m;
  m.kind = Kind::UniformQuantize;
  m.step = step;
  return m;
}

ErrorModel ErrorModel::bounded_adversarial(double bound, std::uint64_t seed) {
  if (bound < 0.0) throw ParameterError("bounded_adversarial: bound must be >= 0");
  ErrorModel m;
  m.kind = Kind::BoundedAdversarial;
  m.bound = bound;
  m.seed = seed;
  return m;
}

PerturbedGradient perturb_gradient(const ErrorModel& model, const Vector& true_grad,
                                   int slot, int node) {
  if (!true_grad.allFinite()) throw ParameterError("perturb_gradient: gradient not finite");
  const int n = static_cast<int>(true_grad.size());

  switch (model.kind) {
    case ErrorModel::Kind::Exact:
      return {true_grad, 0.0};

    case ErrorModel::Kind::AdditiveGaussian: {
      auto eng = make_engine(model.seed, 0xe1, static_cast<std::uint64_t>(slot),
                             static_cast<std::uint64_t>(node));
      std::normal_distribution<double> normal(0.0, model.sigma);
      Vector out = true_grad;
      double e2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double e = normal(eng);
        out[j] += e;
        e2 += e * e;
      }
      return {std::move(out), e2};
    }

    case ErrorModel::Kind::UniformQuantize: {
      // round to the nearest grid point; coordinatewise error <= step/2
      Vector out(n);
      double e2 = 0.0;
      for (int j = 0; j < n; ++j) {
        out[j] = std::round(true_grad[j] / model.step) * model.step;
        const double e = out[j] - true_grad[j];
        e2 += e * e;
      }
      return {std::move(out), e2};
    }

    case ErrorModel::Kind::BoundedAdversarial: {
      // deterministic biased direction, perfectly correlated across slots
      Vector dir(n);
      for (int j = 0; j < n; ++j) dir[j] = ((j + node) % 2 == 0) ? 1.0 : -1.0;
      dir *= model.bound / dir.norm();
      return {(true_grad + dir).eval(), model.bound * model.bound};
    }
  }
  return {true_grad, 0.0};
}

void ErrorLedger::record(int slot, int node, double error_norm_sq) {
  rows_.push_back({slot, node, error_norm_sq});
  last_slot_ = std::max(last_slot_, slot);
  total_ += error_norm_sq;
}

void ErrorLedger::to_csv(std::ostream& out) const {
  out << "slot,node,error_norm_sq\n";
  char buf[64];
  for (const Row& row : rows_) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.error_norm_sq);
    out << row.slot << ',' << row.node << ',' << buf << '\n';
  }
}

double average_error(const ErrorLedger& ledger, int T) {
  if (T < 1) throw RangeError("average_error: T must be >= 1");
  if (T > ledger.last_slot()) {
    throw RangeError("average_error: only " + std::to_string(ledger.last_slot()) +
                     " slots recorded, requested T = " + std::to_string(T));
  }
  std::vector<double> sums(static_cast<size_t>(T), 0.0);
  std::vector<int> counts(static_cast<size_t>(T), 0);
  for (const auto& row : ledger.rows()) {
    if (row.slot >= 1 && row.slot <= T) {
      sums[static_cast<size_t>(row.slot - 1)] += row.error_norm_sq;
      counts[static_cast<size_t>(row.slot - 1)]++;
    }
  }
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    if (counts[static_cast<size_t>(t)] > 0) {
      total += sums[static_cast<size_t>(t)] / counts[static_cast<size_t>(t)];
    }
  }
  return total / T;
}

}  // namespace disc
