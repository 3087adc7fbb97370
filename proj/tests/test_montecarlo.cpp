#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ddnoise/engine.hpp"
#include "ddnoise/errors.hpp"
#include "ddnoise/montecarlo.hpp"

using namespace ddnoise;

namespace {

NoiseModel static_pair() {
  Eigen::VectorXd w(2);
  w << 1.0, -1.0;
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  return NoiseModel::create(w, Eigen::MatrixXd::Zero(2, 2), p);
}

}  // namespace

TEST(PathSampler, StaticNoiseNeverJumps) {
  const NoiseModel m = static_pair();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_path(m, 50.0, rng).jumps.empty());
}

TEST(PathSampler, HoldingTimesAndOccupancy) {
  const double rate = 2.0;
  const NoiseModel m = NoiseModel::two_state_rtn(1.0, rate);
  std::mt19937_64 rng(2);
  const SamplePath path = sample_path(m, 60000.0, rng);
  ASSERT_GT(path.jumps.size(), 100000u);

  std::vector<double> holds;
  double previous = 0.0;
  int state = path.initial_state;
  double time_in_zero = 0.0;
  for (const Jump& j : path.jumps) {
    EXPECT_GT(j.time, previous);
    EXPECT_NE(j.state, state);
    if (state == 0) time_in_zero += j.time - previous;
    holds.push_back(j.time - previous);
    previous = j.time;
    state = j.state;
  }
  // first holding time is also exponential by memorylessness
  double sum = 0.0, sq = 0.0;
  for (double h : holds) {
    sum += h;
    sq += h * h;
  }
  const double n = static_cast<double>(holds.size());
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 1.0 / rate, 3.0 * se);
  EXPECT_NEAR(time_in_zero / previous, 0.5, 0.01);
}

TEST(PathSampler, InitialStateFollowsDistribution) {
  Eigen::VectorXd w(3);
  w << 1.0, 0.0, -1.0;
  Eigen::MatrixXd g(3, 3);
  g << -1.0, 1.0, 0.0,
       1.0, -3.0, 2.0,
       0.0, 2.0, -2.0;
  const NoiseModel m = NoiseModel::create(w, g);
  std::mt19937_64 rng(3);
  std::vector<int> counts(3, 0);
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++counts[sample_path(m, 0.0, rng).initial_state];
  for (int k = 0; k < 3; ++k) {
    const double p = m.initial_distribution()(k);
    EXPECT_NEAR(counts[k] / double(draws), p, 4.0 * std::sqrt(p * (1 - p) / draws));
  }
}

TEST(AccumulatedPhase, EchoCancelsStaticNoise) {
  const NoiseModel m = static_pair();
  const MonteCarloEstimate est = mc_coherence(m, cpmg(1), 3.7, 1000, 5, 1);
  EXPECT_EQ(est.mean, std::complex<double>(1.0, 0.0));
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(AccumulatedPhase, FreeEvolutionIntegratesLevel) {
  const NoiseModel m = static_pair();
  SamplePath path;
  path.initial_state = 1;
  EXPECT_DOUBLE_EQ(accumulated_phase(m, free_evolution(), 2.5, path), -2.5);
  path.jumps.push_back({1.0, 0});
  // -1 on [0,1), +1 on [1,2.5)
  EXPECT_NEAR(accumulated_phase(m, free_evolution(), 2.5, path), 0.5, 1e-15);
}

TEST(AccumulatedPhase, SameStateJumpIsInvisible) {
  const NoiseModel m = NoiseModel::two_state_rtn(1.3, 0.7);
  std::mt19937_64 rng(4);
  const PulseSequence seq = udd(5);
  for (int i = 0; i < 200; ++i) {
    const SamplePath path = sample_path(m, 4.0, rng);
    SamplePath padded;
    padded.initial_state = path.initial_state;
    int state = path.initial_state;
    double previous = 0.0;
    for (const Jump& j : path.jumps) {
      padded.jumps.push_back({0.5 * (previous + j.time), state});
      padded.jumps.push_back(j);
      previous = j.time;
      state = j.state;
    }
    padded.jumps.push_back({0.5 * (previous + 4.0), state});
    EXPECT_EQ(accumulated_phase(m, seq, 4.0, path), accumulated_phase(m, seq, 4.0, padded));
  }
}

TEST(McCoherence, FreeRtnMatchesClosedForm) {
  const NoiseModel m = NoiseModel::two_state_rtn(1.0, 1.0);
  const MonteCarloEstimate est = mc_coherence(m, free_evolution(), 1.0, 20000, 11);
  EXPECT_EQ(est.trajectories, 20000);
  EXPECT_EQ(est.seed, 11u);
  EXPECT_NEAR(est.mean.real(), 2.0 / std::exp(1.0), 4.0 * est.std_error);
  EXPECT_NEAR(est.mean.imag(), 0.0, 4.0 * est.std_error);
}

TEST(McCoherence, AgreesWithExactEngine) {
  const NoiseModel m = NoiseModel::two_state_rtn(1.0, 1.0);
  const std::complex<double> exact = coherence(m, cpmg(2), 0.5).value;
  const MonteCarloEstimate est = mc_coherence(m, cpmg(2), 0.5, 20000, 12);
  EXPECT_NEAR(est.mean.real(), exact.real(), 4.0 * est.std_error + 1e-15);
  EXPECT_NEAR(est.mean.imag(), exact.imag(), 4.0 * est.std_error + 1e-15);
}

TEST(McCoherence, ThreadCountDoesNotChangeResult) {
  const NoiseModel m = NoiseModel::two_state_rtn(0.8, 1.5);
  const MonteCarloEstimate a = mc_coherence(m, udd(3), 2.0, 5003, 21, 1);
  const MonteCarloEstimate b = mc_coherence(m, udd(3), 2.0, 5003, 21, 4);
  const MonteCarloEstimate c = mc_coherence(m, udd(3), 2.0, 5003, 21, 7);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.mean, c.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(McCoherence, SeedsGiveUnbiasedSpread) {
  const NoiseModel m = NoiseModel::two_state_rtn(1.0, 1.0);
  const double exact = 2.0 / std::exp(1.0);
  int inside = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const MonteCarloEstimate est = mc_coherence(m, free_evolution(), 1.0, 2000, seed, 1);
    if (std::abs(est.mean.real() - exact) <= 4.0 * est.std_error) ++inside;
  }
  EXPECT_GE(inside, 19);
}

TEST(McCoherence, Errors) {
  const NoiseModel m = NoiseModel::two_state_rtn(1.0, 1.0);
  EXPECT_THROW(mc_coherence(m, cpmg(1), 1.0, 99, 1), DomainError);
  EXPECT_THROW(mc_coherence(m, cpmg(1), -1.0, 1000, 1), DomainError);
}
