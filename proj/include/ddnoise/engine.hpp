#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ddnoise/noise.hpp"
#include "ddnoise/pulses.hpp"

namespace ddnoise {

/// Ensemble-averaged transverse polarization <x(t)> at one time point.
struct DecoherenceSample {
  double t = 0.0;
  std::complex<double> value{1.0, 0.0};
  double magnitude = 1.0;
};

/// Exact decoherence function under ideal pi pulses. The reduced vector y(0) is
/// propagated interval by interval with exp[(Gamma + i s_k W) a_k t], s_k the
/// switching sign, and the components are summed. t = 0 returns exactly 1.
DecoherenceSample coherence(const NoiseModel& model, const PulseSequence& seq, double t);

struct CurveOptions {
  // Reuse eigendecompositions of Gamma +- iW across grid points when both are
  // well conditioned; otherwise every exponential is computed directly.
  bool spectral_cache = true;
  double condition_limit = 1e8;
};

/// coherence() over a sorted, non-negative grid.
std::vector<DecoherenceSample> curve(const NoiseModel& model, const PulseSequence& seq,
                                     std::span<const double> grid, CurveOptions options = {});

/// Diagonalization of Gamma + i s W for one switching sign, used to evaluate
/// exp[(Gamma + i s W) tau] v cheaply for many tau.
class SpectralPropagator {
 public:
  SpectralPropagator(const NoiseModel& model, int sign);

  /// Condition number of the eigenvector matrix (infinite if singular).
  double condition() const { return condition_; }

  Eigen::VectorXcd apply(double tau, const Eigen::VectorXcd& v) const;

 private:
  Eigen::VectorXcd eigenvalues_;
  Eigen::MatrixXcd vectors_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> vectors_lu_;
  double condition_ = 0.0;
};

/// Generator of the reduced-vector dynamics on a switching interval: Gamma + i sign W.
Eigen::MatrixXcd liouville_generator(const NoiseModel& model, int sign);

}  // namespace ddnoise
