#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ddnoise/engine.hpp"
#include "ddnoise/errors.hpp"
#include "ddnoise/matrix_exponential.hpp"
#include "ddnoise/optimizer.hpp"

using namespace ddnoise;
using Complex = std::complex<double>;

namespace {

// Reference values: 40-digit mpmath evaluation of the interval-exponential product.
constexpr double kFreeHalf = 0.90979598956895014;   // 1.5 e^{-0.5}
constexpr double kFreeOne = 0.73575888234288464;    // 2 e^{-1}
constexpr double kHahnTenth = 0.99984534692973533;  // cpmg(1), t = 0.1
constexpr double kHahnHalf = 0.98561232203302931;
constexpr double kHahnOne = 0.91969860292860580;
constexpr double kCpmg2Half = 0.99508936359103921;
constexpr double kCpmg2One = 0.96568353307503609;

NoiseModel rtn11() { return NoiseModel::two_state_rtn(1.0, 1.0); }

NoiseModel random_model(int k, std::mt19937_64& rng, double rate_scale = 1.0) {
  std::uniform_real_distribution<double> rate(0.1, 2.0);
  std::uniform_real_distribution<double> level(-2.0, 2.0);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
  for (int c = 0; c < k; ++c)
    for (int r = 0; r < k; ++r)
      if (r != c) g(r, c) = rate_scale * rate(rng);
  for (int c = 0; c < k; ++c) g(c, c) = -g.col(c).sum();
  Eigen::VectorXd w(k);
  for (int j = 0; j < k; ++j) w(j) = level(rng);
  return NoiseModel::create(w, g);
}

PulseSequence random_sequence(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  for (double& x : p) x = u(rng);
  std::sort(p.begin(), p.end());
  return PulseSequence::from_positions(p);
}

}  // namespace

TEST(Coherence, TimeZeroIsExactlyOne) {
  const DecoherenceSample s = coherence(rtn11(), udd(3), 0.0);
  EXPECT_EQ(s.value, Complex(1.0, 0.0));
  EXPECT_EQ(s.magnitude, 1.0);
}

TEST(Coherence, ZeroCouplingKeepsFullCoherence) {
  const NoiseModel m = NoiseModel::two_state_rtn(0.0, 1.0);
  for (const PulseSequence& seq : {free_evolution(), cpmg(3), udd(2)}) {
    EXPECT_LT(std::abs(coherence(m, seq, 2.0).value - 1.0), 1e-15);
  }
}

TEST(Coherence, FreeEvolutionDefectiveClosedForm) {
  for (double t : {0.5, 1.0}) {
    const DecoherenceSample s = coherence(rtn11(), free_evolution(), t);
    EXPECT_NEAR(s.value.real(), std::exp(-t) * (1.0 + t), 1e-12);
    EXPECT_NEAR(s.value.imag(), 0.0, 1e-15);
  }
  EXPECT_NEAR(coherence(rtn11(), free_evolution(), 0.5).value.real(), kFreeHalf, 1e-14);
  EXPECT_NEAR(coherence(rtn11(), free_evolution(), 1.0).value.real(), kFreeOne, 1e-14);
}

TEST(Coherence, PulsedReferenceValues) {
  EXPECT_NEAR(coherence(rtn11(), cpmg(1), 0.5).value.real(), kHahnHalf, 1e-13);
  EXPECT_NEAR(coherence(rtn11(), cpmg(1), 1.0).value.real(), kHahnOne, 1e-13);
  EXPECT_NEAR(coherence(rtn11(), cpmg(2), 0.5).value.real(), kCpmg2Half, 1e-13);
  EXPECT_NEAR(coherence(rtn11(), cpmg(2), 1.0).value.real(), kCpmg2One, 1e-13);
}

TEST(Coherence, StaticNoiseEchoIsExact) {
  const NoiseModel m = NoiseModel::create(Eigen::Vector2d(1.0, -1.0), Eigen::MatrixXd::Zero(2, 2),
                                          Eigen::VectorXd(Eigen::Vector2d(0.5, 0.5)));
  for (double t : {0.3, 1.0, 17.0, 1000.0}) {
    EXPECT_LT(std::abs(coherence(m, cpmg(2), t).value - 1.0), 1e-12) << t;
  }
}

TEST(Coherence, NegativeTimeRejected) {
  EXPECT_THROW(coherence(rtn11(), cpmg(1), -1.0), DomainError);
}

TEST(Curve, Basics) {
  const std::vector<double> zero{0.0};
  EXPECT_EQ(curve(rtn11(), cpmg(1), zero)[0].value, Complex(1.0, 0.0));

  const std::vector<double> grid{0.5, 1.0};
  const auto samples = curve(rtn11(), free_evolution(), grid);
  EXPECT_NEAR(samples[0].value.real(), 1.5 * std::exp(-0.5), 1e-12);
  EXPECT_NEAR(samples[1].value.real(), 2.0 * std::exp(-1.0), 1e-12);

  const std::vector<double> unsorted{1.0, 0.5};
  EXPECT_THROW(curve(rtn11(), cpmg(1), unsorted), DomainError);
}

TEST(Curve, HahnEchoShortTime) {
  const std::vector<double> grid{0.1};
  const double x = curve(rtn11(), cpmg(1), grid)[0].value.real();
  EXPECT_NEAR(x, kHahnTenth, 1e-12);
  // 1 - t^3/6 is only the cubic truncation; the t^4 remainder is about 1.2e-5 here.
  EXPECT_NEAR(x, 1.0 - 1e-3 / 6.0, 2e-5);
}

TEST(Curve, SpectralCacheAgreesWithDirectExponentials) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const NoiseModel m = random_model(3, rng);
    const PulseSequence seq = random_sequence(1 + trial % 5, rng);
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.25 * i);
    const auto fast = curve(m, seq, grid);
    const auto direct = curve(m, seq, grid, CurveOptions{.spectral_cache = false});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_LT(std::abs(fast[i].value - direct[i].value), 1e-10);
    }
  }
}

TEST(SpectralPropagator, DefectiveGeneratorIsIllConditioned) {
  // Gamma + iW for gamma = omega has a single eigenvalue -1 with one eigenvector.
  EXPECT_GT(SpectralPropagator(rtn11(), +1).condition(), 1e8);
}

TEST(CoherenceProperties, MagnitudeBounded) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const NoiseModel m = random_model(2 + trial % 4, rng, trial % 3 == 0 ? 20.0 : 1.0);
    const PulseSequence seq = random_sequence(trial % 7, rng);
    for (double t : {0.1, 1.0, 5.0}) {
      EXPECT_LE(coherence(m, seq, t).magnitude, 1.0 + 1e-10);
    }
  }
}

TEST(CoherenceProperties, SplittingAnIntervalChangesNothing) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const NoiseModel m = random_model(3, rng);
    const PulseSequence seq = random_sequence(1 + trial % 4, rng);
    const double t = 0.5 + trial * 0.1;
    const std::vector<double> iv = seq.intervals();
    // Propagate by hand with the first interval cut into two same-sign pieces.
    Eigen::VectorXcd y = m.initial_distribution().cast<Complex>();
    for (std::size_t k = 0; k < iv.size(); ++k) {
      const Eigen::MatrixXcd a =
          liouville_generator(m, PulseSequence::interval_sign(static_cast<int>(k)));
      if (k == 0) {
        y = matrix_exponential(Eigen::MatrixXcd(a * (0.3 * iv[k] * t))) * y;
        y = matrix_exponential(Eigen::MatrixXcd(a * (0.7 * iv[k] * t))) * y;
      } else {
        y = matrix_exponential(Eigen::MatrixXcd(a * (iv[k] * t))) * y;
      }
    }
    EXPECT_LT(std::abs(y.sum() - coherence(m, seq, t).value), 1e-12);
  }
}

TEST(CoherenceProperties, StaticNoiseEchoForEchoSequences) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> level(-3.0, 3.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::vector<PulseSequence> sequences{cpmg(1), cpmg(2), cpmg(7), udd(2), cdd(3), cdd(5)};
  for (int n : {2, 3, 4, 6}) {
    sequences.push_back(PulseSequence::from_positions(positions_from_beta(sample_admissible(n, rng))));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 3;
    Eigen::VectorXd w(k);
    Eigen::VectorXd y0(k);
    for (int j = 0; j < k; ++j) {
      w(j) = level(rng);
      y0(j) = weight(rng);
    }
    y0 /= y0.sum();
    const NoiseModel m = NoiseModel::create(w, Eigen::MatrixXd::Zero(k, k), y0);
    for (const PulseSequence& seq : sequences) {
      for (double t : {0.1, 10.0, 1000.0 / m.max_abs_level()}) {
        EXPECT_LE(std::abs(coherence(m, seq, t).value - 1.0), 1e-12);
      }
    }
  }
}

TEST(CoherenceProperties, NegatingLevelsConjugates) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const NoiseModel m = random_model(2 + trial % 3, rng);
    const NoiseModel flipped =
        NoiseModel::create(-m.levels(), m.generator(), m.initial_distribution());
    const PulseSequence seq = random_sequence(trial % 5, rng);
    const Complex a = coherence(m, seq, 1.3).value;
    const Complex b = coherence(flipped, seq, 1.3).value;
    EXPECT_LT(std::abs(a - std::conj(b)), 1e-12);
  }
}
