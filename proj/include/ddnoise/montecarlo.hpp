#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "ddnoise/noise.hpp"
#include "ddnoise/pulses.hpp"

namespace ddnoise {

struct Jump {
  double time = 0.0;
  int state = 0;
};

/// Piecewise-constant realization of the noise on [0, horizon].
struct SamplePath {
  int initial_state = 0;
  std::vector<Jump> jumps;
};

/// Gillespie-style sampler for one noise model. States with zero exit rate are
/// absorbing.
class PathSampler {
 public:
  explicit PathSampler(const NoiseModel& model);

  SamplePath sample(double horizon, std::mt19937_64& rng) const;

 private:
  std::vector<double> exit_rates_;
  mutable std::discrete_distribution<int> initial_;
  mutable std::vector<std::discrete_distribution<int>> next_state_;
};

SamplePath sample_path(const NoiseModel& model, double horizon, std::mt19937_64& rng);

/// Phase Int_0^t f(tau / t) w(tau) dtau along a path, summed by parts over the
/// jumps. A recorded jump that keeps the state contributes exactly zero.
double accumulated_phase(const NoiseModel& model, const PulseSequence& seq, double t,
                         const SamplePath& path);

struct MonteCarloEstimate {
  std::complex<double> mean;
  // max of the real and imaginary standard errors
  double std_error = 0.0;
  std::int64_t trajectories = 0;
  std::uint64_t seed = 0;
};

/// Average of exp(i phase) over `trajectories` sampled paths. Trajectory i uses a
/// generator seeded with derive_seed(seed, i) and sums are pairwise over a fixed
/// tree, so the result does not depend on `threads` (0 = hardware concurrency).
/// Throws DomainError for fewer than 100 trajectories.
MonteCarloEstimate mc_coherence(const NoiseModel& model, const PulseSequence& seq, double t,
                                std::int64_t trajectories, std::uint64_t seed, int threads = 0);

}  // namespace ddnoise
