#include "ddnoise/engine.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "ddnoise/errors.hpp"
#include "ddnoise/matrix_exponential.hpp"

namespace ddnoise {
namespace {

using Complex = std::complex<double>;

DecoherenceSample make_sample(double t, Complex value) {
  return DecoherenceSample{t, value, std::abs(value)};
}

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("coherence: time must be finite and non-negative");
  }
}

}  // namespace

Eigen::MatrixXcd liouville_generator(const NoiseModel& model, int sign) {
  Eigen::MatrixXcd a = model.generator().cast<Complex>();
  a.diagonal() += Complex(0.0, static_cast<double>(sign)) * model.levels().cast<Complex>();
  return a;
}

DecoherenceSample coherence(const NoiseModel& model, const PulseSequence& seq, double t) {
  check_time(t);
  if (t == 0.0) return make_sample(0.0, Complex(1.0, 0.0));

  const std::vector<double> intervals = seq.intervals();
  const Eigen::MatrixXcd plus = liouville_generator(model, +1);
  const Eigen::MatrixXcd minus = liouville_generator(model, -1);

  // Periodic sequences repeat interval lengths; exponentials are keyed by (sign, length).
  std::map<std::pair<int, double>, Eigen::MatrixXcd> cache;
  Eigen::VectorXcd y = model.initial_distribution().cast<Complex>();
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const int sign = PulseSequence::interval_sign(static_cast<int>(k));
    const double length = intervals[k];
    auto it = cache.find({sign, length});
    if (it == cache.end()) {
      const Eigen::MatrixXcd& a = sign > 0 ? plus : minus;
      it = cache.emplace(std::pair{sign, length}, matrix_exponential(Eigen::MatrixXcd(a * (length * t))))
               .first;
    }
    y = it->second * y;
  }
  return make_sample(t, y.sum());
}

SpectralPropagator::SpectralPropagator(const NoiseModel& model, int sign) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(liouville_generator(model, sign));
  if (solver.info() != Eigen::Success) {
    condition_ = std::numeric_limits<double>::infinity();
    return;
  }
  eigenvalues_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
  const Eigen::VectorXd singular = Eigen::JacobiSVD<Eigen::MatrixXcd>(vectors_).singularValues();
  const double smallest = singular(singular.size() - 1);
  condition_ = smallest > 0.0 ? singular(0) / smallest : std::numeric_limits<double>::infinity();
  if (std::isfinite(condition_)) vectors_lu_.compute(vectors_);
}

Eigen::VectorXcd SpectralPropagator::apply(double tau, const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd coeffs = vectors_lu_.solve(v);
  for (Eigen::Index m = 0; m < coeffs.size(); ++m) coeffs(m) *= std::exp(eigenvalues_(m) * tau);
  return vectors_ * coeffs;
}

std::vector<DecoherenceSample> curve(const NoiseModel& model, const PulseSequence& seq,
                                     std::span<const double> grid, CurveOptions options) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_time(grid[i]);
    if (i > 0 && grid[i] < grid[i - 1]) throw DomainError("curve: time grid must be sorted");
  }

  std::vector<DecoherenceSample> out;
  out.reserve(grid.size());

  if (options.spectral_cache) {
    const SpectralPropagator plus(model, +1);
    const SpectralPropagator minus(model, -1);
    if (plus.condition() < options.condition_limit &&
        minus.condition() < options.condition_limit) {
      const std::vector<double> intervals = seq.intervals();
      for (double t : grid) {
        if (t == 0.0) {
          out.push_back(make_sample(0.0, Complex(1.0, 0.0)));
          continue;
        }
        Eigen::VectorXcd y = model.initial_distribution().cast<Complex>();
        for (std::size_t k = 0; k < intervals.size(); ++k) {
          const auto& prop = PulseSequence::interval_sign(static_cast<int>(k)) > 0 ? plus : minus;
          y = prop.apply(intervals[k] * t, y);
        }
        out.push_back(make_sample(t, y.sum()));
      }
      return out;
    }
  }

  for (double t : grid) out.push_back(coherence(model, seq, t));
  return out;
}

}  // namespace ddnoise
