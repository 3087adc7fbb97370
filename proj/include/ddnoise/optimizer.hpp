#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ddnoise/pulses.hpp"

namespace ddnoise {

/// Best third-order coefficient found over a multi-start search at fixed pulse count.
struct OptimizationResult {
  int pulse_count = 0;
  std::vector<double> best_beta;
  double best_g = 0.0;
  int starts = 0;
  int converged_starts = 0;
  double gradient_norm_at_best = 0.0;
};

/// Random deviation from CPMG timing that satisfies the echo condition
/// (alternating sum of beta is zero) and keeps the pulses ordered inside (0, 1)
/// with the minimum gap. Throws NumericalError after 10^4 rejected draws.
std::vector<double> sample_admissible(int count, std::mt19937_64& rng);
std::vector<double> sample_admissible(int count, std::uint64_t seed);

/// Alternating sum beta_1 - beta_2 + ... ; zero on the echo hyperplane.
double alternating_sum(std::span<const double> deviation);

/// f(lambda) = g3(CPMG + lambda * beta) - 1/(12 N^2). Beyond the physical region
/// this is the polynomial extension. Throws DomainError for lambda < 0.
double scaling_curve(std::span<const double> deviation, double lambda);

/// Outcome of pushing a deviation outward until the sequence hits the boundary.
struct BoundaryReduction {
  double lambda_b = 0.0;
  // Pulse times at lambda_b, before null operations are removed.
  std::vector<double> boundary_positions;
  PulseSequence reduced;
  int dropped_end_pulses = 0;
  int merged_pairs = 0;
};

/// Largest lambda keeping CPMG + lambda * beta in the closed physical region, and
/// the shorter sequence obtained there: pulses that reach 0 or 1 are dropped and
/// coincident pairs cancel (end drops are applied first). Throws DomainError for
/// beta = 0 or beta off the echo hyperplane.
BoundaryReduction boundary_scale(std::span<const double> deviation);

struct MinimizeOptions {
  double gradient_tolerance = 1e-10;
  int max_newton_iterations = 200;
};

/// Multi-start minimization of g3 over admissible echo-satisfying sequences with
/// `count` pulses. The last deviation is eliminated through the echo condition;
/// ordering is enforced with a log barrier whose weight falls from 1e-2 to 1e-8,
/// followed by an unconstrained Newton polish. Start i draws from
/// derive_seed(seed, i). Throws NumericalError when no start converges.
OptimizationResult minimize(int count, int starts, std::uint64_t seed,
                            MinimizeOptions options = {});

}  // namespace ddnoise
