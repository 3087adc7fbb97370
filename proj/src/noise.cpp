#include "ddnoise/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddnoise/errors.hpp"
#include "ddnoise/matrix_exponential.hpp"

namespace ddnoise {
namespace {

[[noreturn]] void reject(const std::string& invariant, const std::string& detail) {
  throw ValidationError(invariant + ": " + detail);
}

}  // namespace

void validate_generator(const Eigen::MatrixXd& generator) {
  const Eigen::Index k = generator.rows();
  if (k < 1 || generator.cols() != k) {
    std::ostringstream os;
    os << "generator must be a non-empty square matrix, got " << generator.rows() << "x"
       << generator.cols();
    reject("shape", os.str());
  }
  if (!generator.allFinite()) reject("finiteness", "generator has non-finite entries");

  for (Eigen::Index col = 0; col < k; ++col) {
    for (Eigen::Index row = 0; row < k; ++row) {
      const double rate = generator(row, col);
      if (row != col && rate < 0.0) {
        std::ostringstream os;
        os << "off-diagonal generator entry (" << row << "," << col << ") = " << rate
           << " is negative";
        reject("non-negative rates", os.str());
      }
      if (row == col && rate > 0.0) {
        std::ostringstream os;
        os << "diagonal generator entry (" << row << "," << row << ") = " << rate
           << " is positive";
        reject("non-positive diagonal", os.str());
      }
    }
    // Scale the tolerance by the column magnitude so rates far above 1 are not
    // rejected for ordinary rounding.
    const double scale = std::max(1.0, generator.col(col).cwiseAbs().maxCoeff());
    const double sum = generator.col(col).sum();
    if (std::abs(sum) > NoiseModel::kSumTolerance * scale) {
      std::ostringstream os;
      os << "column " << col << " of the generator sums to " << sum << " instead of 0";
      reject("probability conservation", os.str());
    }
  }
}

NoiseModel NoiseModel::create(Eigen::VectorXd levels, Eigen::MatrixXd generator,
                              std::optional<Eigen::VectorXd> initial) {
  validate_generator(generator);
  const Eigen::Index k = generator.rows();
  if (levels.size() != k) {
    std::ostringstream os;
    os << levels.size() << " levels for a " << k << "-state generator";
    reject("shape", os.str());
  }
  if (!levels.allFinite()) reject("finiteness", "levels have non-finite entries");

  Eigen::VectorXd y0 = initial ? std::move(*initial) : stationary_distribution(generator);
  if (y0.size() != k) {
    std::ostringstream os;
    os << "initial distribution has " << y0.size() << " entries, expected " << k;
    reject("shape", os.str());
  }
  if (!y0.allFinite()) reject("finiteness", "initial distribution has non-finite entries");
  for (Eigen::Index j = 0; j < k; ++j) {
    if (y0(j) < 0.0) {
      std::ostringstream os;
      os << "initial distribution entry " << j << " = " << y0(j) << " is negative";
      reject("probability vector", os.str());
    }
  }
  if (std::abs(y0.sum() - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os << "initial distribution sums to " << y0.sum() << " instead of 1";
    reject("probability vector", os.str());
  }
  const Eigen::VectorXd residual = generator * y0;
  const double worst = residual.cwiseAbs().maxCoeff();
  if (worst > kStationarityTolerance) {
    std::ostringstream os;
    os << "|generator * initial| reaches " << worst << " (tolerance "
       << kStationarityTolerance << ")";
    reject("stationarity", os.str());
  }
  return NoiseModel(std::move(levels), std::move(generator), std::move(y0));
}

NoiseModel NoiseModel::two_state_rtn(double amplitude, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    std::ostringstream os;
    os << "switching rate must be positive and finite, got " << rate;
    reject("positive rate", os.str());
  }
  Eigen::Vector2d levels(amplitude, -amplitude);
  Eigen::Matrix2d generator;
  generator << -rate, rate, rate, -rate;
  return create(levels, generator, Eigen::Vector2d(0.5, 0.5));
}

double NoiseModel::max_abs_level() const { return levels_.cwiseAbs().maxCoeff(); }

bool NoiseModel::has_absorbing_state() const {
  return (generator_.diagonal().array() == 0.0).any();
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& generator) {
  validate_generator(generator);
  const Eigen::Index k = generator.rows();
  if (k == 1) return Eigen::VectorXd::Ones(1);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(generator);
  lu.setThreshold(1e-10);
  if (k - lu.rank() != 1) {
    std::ostringstream os;
    os << "generator null space has dimension " << (k - lu.rank())
       << "; the stationary distribution is not unique (reducible chain)";
    reject("unique stationary distribution", os.str());
  }

  // Gamma v = 0 together with sum(v) = 1 is consistent and has full column rank.
  Eigen::MatrixXd augmented(k + 1, k);
  augmented.topRows(k) = generator;
  augmented.row(k).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  Eigen::VectorXd v = augmented.colPivHouseholderQr().solve(rhs);

  if ((v.array() < -1e-12).any()) {
    throw NumericalError("stationary_distribution: negative component after normalization");
  }
  v = v.cwiseMax(0.0);
  return v / v.sum();
}

double correlation(const NoiseModel& model, double lag) {
  if (!(lag >= 0.0)) {
    throw DomainError("correlation: lag must be non-negative");
  }
  const Eigen::VectorXd weighted = model.levels().cwiseProduct(model.initial_distribution());
  if (lag == 0.0) return model.levels().dot(weighted);
  const Eigen::MatrixXd propagator = matrix_exponential(Eigen::MatrixXd(model.generator() * lag));
  return model.levels().dot(propagator * weighted);
}

}  // namespace ddnoise
