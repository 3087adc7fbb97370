#pragma once

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "ddnoise/noise.hpp"
#include "ddnoise/pulses.hpp"

namespace ddnoise {

/// Third-order analysis of an echo-satisfying sequence.
///
/// g_total is the dimensionless coefficient G_N of the single surviving
/// W Gamma W term, so <x(t)> = 1 + g_total * scalar_s * t^3 + O(t^4).
/// g_total splits as constant_part + quadratic_part + cubic_part, the
/// homogeneous parts of degree 0, 2 and 3 in the deviation from CPMG timing.
struct ExpansionReport {
  int pulse_count = 0;
  double g_total = 0.0;
  double constant_part = 0.0;
  double quadratic_part = 0.0;
  double cubic_part = 0.0;
  // Degree-1 part; zero up to rounding whenever the echo condition holds.
  double linear_part = 0.0;
  std::optional<double> scalar_s;
  std::optional<double> predicted_cubic;
};

/// G = -Int_0^1 f(s3) Int_0^s3 Int_0^s2 f(s1) ds1 ds2 ds3 for the sequence's
/// switching function, accumulated exactly interval by interval.
double g3(const PulseSequence& seq);

/// Same integral for raw pulse times, read in the given order with signed
/// interval lengths. On ordered positions this is g3; elsewhere it is the unique
/// cubic polynomial extension.
double g3_positions(std::span<const double> positions);

/// Gradient of g3_positions with respect to each pulse time.
Eigen::VectorXd g3_gradient(std::span<const double> positions);

/// Hessian of g3_positions (constant in each ordering region; index order is used).
Eigen::MatrixXd g3_hessian(std::span<const double> positions);

/// Splits g3 into 1/(12N^2) + h + g by exact cubic interpolation of
/// lambda -> g3(CPMG + lambda * beta) at lambda in {0, +-1, 2}. Throws
/// DomainError on an empty sequence and NumericalError when the linear part
/// exceeds 1e-10 (echo violated).
ExpansionReport g3_parts(const PulseSequence& seq);

/// g3_parts plus the model-dependent scalar fields.
ExpansionReport expansion_report(const NoiseModel& model, const PulseSequence& seq);

/// sum_j [W Gamma W y(0)]_j.
double third_order_scalar(const NoiseModel& model);

/// Estimates the t^3 coefficient of <x(t)> - 1 from exact evaluations at
/// t0 * 2^-i, i = 0..6, refined by Richardson extrapolation. Throws DomainError
/// when the echo condition fails or scalar_s = 0, and NumericalError when the
/// signal falls below the rounding floor.
double fit_cubic(const NoiseModel& model, const PulseSequence& seq);

/// One word of the short-time expansion. The letters are 'G' (Gamma) and 'W',
/// written left to right as a matrix product applied to y(0).
struct WordTerm {
  std::complex<double> coefficient;  // includes the i^#W and switching-sign factors
  double contraction = 0.0;          // sum_j [word y(0)]_j
  std::complex<double> contribution() const { return coefficient * contraction; }
};

/// Expands every interval exponential to the given order and collects the
/// coefficient of each word, so that
///   <x(t)> = sum_w coefficient_w * t^|w| * contraction_w.
/// Words are keyed lexicographically; the empty word carries the constant term.
/// Throws ResourceError when order > 4 or the sequence has more than 6 pulses.
std::map<std::string, WordTerm> word_expansion(const NoiseModel& model, const PulseSequence& seq,
                                               int order);

/// sum_j [word y(0)]_j for a word over {'G', 'W'}.
double word_contraction(const NoiseModel& model, std::string_view word);

}  // namespace ddnoise
