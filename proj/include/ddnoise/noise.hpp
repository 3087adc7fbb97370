#pragma once

#include <optional>

#include <Eigen/Dense>

namespace ddnoise {

/// Multi-state telegraph-like noise: a continuous-time Markov jump process over
/// discrete frequency levels.
///
/// The generator uses the column convention dY/dt = generator * Y, so the rate of
/// jumping from state j to state k (k != j) is generator(k, j) and every column
/// sums to zero. The initial distribution is required to be stationary.
class NoiseModel {
 public:
  static constexpr double kSumTolerance = 1e-12;
  static constexpr double kStationarityTolerance = 1e-10;

  /// Validates and builds a model. When `initial` is empty the stationary
  /// distribution of `generator` is used. Throws ValidationError naming the
  /// violated invariant.
  static NoiseModel create(Eigen::VectorXd levels, Eigen::MatrixXd generator,
                           std::optional<Eigen::VectorXd> initial = std::nullopt);

  /// Symmetric two-state random telegraph noise: levels (+amplitude, -amplitude),
  /// switching rate `rate` in both directions.
  static NoiseModel two_state_rtn(double amplitude, double rate);

  int size() const { return static_cast<int>(levels_.size()); }
  const Eigen::VectorXd& levels() const { return levels_; }
  const Eigen::MatrixXd& generator() const { return generator_; }
  const Eigen::VectorXd& initial_distribution() const { return initial_; }

  /// Diagonal matrix W of the levels.
  Eigen::MatrixXd level_matrix() const { return levels_.asDiagonal(); }

  double max_abs_level() const;

  /// True when some state has zero exit rate.
  bool has_absorbing_state() const;

 private:
  NoiseModel(Eigen::VectorXd levels, Eigen::MatrixXd generator, Eigen::VectorXd initial)
      : levels_(std::move(levels)), generator_(std::move(generator)), initial_(std::move(initial)) {}

  Eigen::VectorXd levels_;
  Eigen::MatrixXd generator_;
  Eigen::VectorXd initial_;
};

/// Throws ValidationError if `generator` is not a square rate matrix with
/// non-negative off-diagonal entries and zero column sums.
void validate_generator(const Eigen::MatrixXd& generator);

/// Normalized non-negative null vector of a generator. Throws NumericalError when
/// the null space is not one-dimensional or the normalized vector has a
/// significantly negative component.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& generator);

/// Stationary autocorrelation <w(t + lag) w(t)> = sum_j [W exp(generator * lag) W y0]_j.
double correlation(const NoiseModel& model, double lag);

}  // namespace ddnoise
