#include "ddnoise/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <thread>

#include "ddnoise/errors.hpp"
#include "ddnoise/random.hpp"

namespace ddnoise {
namespace {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments moments(std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  Moments m;
  m.mean = pairwise_sum(values) / n;
  for (double& v : values) v = (v - m.mean) * (v - m.mean);
  m.std_error = std::sqrt(pairwise_sum(values) / (n - 1.0) / n);
  return m;
}

}  // namespace

PathSampler::PathSampler(const NoiseModel& model) {
  const int k = model.size();
  const Eigen::VectorXd& y0 = model.initial_distribution();
  initial_ = std::discrete_distribution<int>(y0.data(), y0.data() + k);
  exit_rates_.resize(static_cast<std::size_t>(k));
  next_state_.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    exit_rates_[j] = -model.generator()(j, j);
    std::vector<double> weights(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i) {
      if (i != j) weights[i] = model.generator()(i, j);
    }
    if (exit_rates_[j] > 0.0) {
      next_state_[j] = std::discrete_distribution<int>(weights.begin(), weights.end());
    }
  }
}

SamplePath PathSampler::sample(double horizon, std::mt19937_64& rng) const {
  SamplePath path;
  path.initial_state = initial_(rng);
  int state = path.initial_state;
  double now = 0.0;
  std::exponential_distribution<double> holding;
  while (exit_rates_[state] > 0.0) {
    now += holding(rng) / exit_rates_[state];
    if (now >= horizon) break;
    state = next_state_[state](rng);
    path.jumps.push_back(Jump{now, state});
  }
  return path;
}

SamplePath sample_path(const NoiseModel& model, double horizon, std::mt19937_64& rng) {
  if (!(horizon >= 0.0)) throw DomainError("sample_path: horizon must be non-negative");
  return PathSampler(model).sample(horizon, rng);
}

double accumulated_phase(const NoiseModel& model, const PulseSequence& seq, double t,
                         const SamplePath& path) {
  if (t == 0.0) return 0.0;
  // Phi(tau) = t F(tau / t) is the toggling-frame clock.
  const auto clock = [&](double tau) { return t * seq.integrated_switching(tau / t); };
  const Eigen::VectorXd& w = model.levels();
  int state = path.initial_state;
  double phase = 0.0;
  for (const Jump& jump : path.jumps) {
    phase -= (w(jump.state) - w(state)) * clock(jump.time);
    state = jump.state;
  }
  return phase + w(state) * clock(t);
}

MonteCarloEstimate mc_coherence(const NoiseModel& model, const PulseSequence& seq, double t,
                                std::int64_t trajectories, std::uint64_t seed, int threads) {
  if (trajectories < 100) throw DomainError("mc_coherence: at least 100 trajectories required");
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("mc_coherence: time must be finite and non-negative");
  }

  const PathSampler sampler(model);
  const auto n = static_cast<std::size_t>(trajectories);
  std::vector<double> re(n);
  std::vector<double> im(n);

  const auto run_range = [&](std::size_t begin, std::size_t end) {
    // distributions in the sampler hold no state between draws, but copy to keep
    // threads independent
    const PathSampler local = sampler;
    for (std::size_t i = begin; i < end; ++i) {
      std::mt19937_64 rng(derive_seed(seed, i));
      const double phase = accumulated_phase(model, seq, t, local.sample(t, rng));
      re[i] = std::cos(phase);
      im[i] = std::sin(phase);
    }
  };

  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    run_range(0, n);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
  }

  const Moments re_m = moments(re);
  const Moments im_m = moments(im);
  MonteCarloEstimate est;
  est.mean = {re_m.mean, im_m.mean};
  est.std_error = std::max(re_m.std_error, im_m.std_error);
  est.trajectories = trajectories;
  est.seed = seed;
  return est;
}

}  // namespace ddnoise
