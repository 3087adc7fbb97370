#include "ddnoise/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "ddnoise/errors.hpp"
#include "ddnoise/expansion.hpp"
#include "ddnoise/random.hpp"

namespace ddnoise {
namespace {

constexpr int kMaxRejections = 10000;

double sigma(Eigen::Index n) { return PulseSequence::interval_sign(static_cast<int>(n)); }

double cpmg_constant(int count) { return 1.0 / (12.0 * count * count); }

bool admissible(std::span<const double> positions) {
  double previous = 0.0;
  for (double p : positions) {
    if (p - previous < PulseSequence::kMinGap) return false;
    previous = p;
  }
  return 1.0 - previous >= PulseSequence::kMinGap;
}

// Constraint values c = A alpha + b: alpha_1, the N - 1 gaps, and 1 - alpha_N.
Eigen::VectorXd constraint_values(const Eigen::VectorXd& alpha) {
  const Eigen::Index n = alpha.size();
  Eigen::VectorXd c(n + 1);
  c(0) = alpha(0);
  for (Eigen::Index i = 1; i < n; ++i) c(i) = alpha(i) - alpha(i - 1);
  c(n) = 1.0 - alpha(n - 1);
  return c;
}

Eigen::MatrixXd constraint_jacobian(Eigen::Index n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n);
  a(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    a(i, i) = 1.0;
    a(i, i - 1) = -1.0;
  }
  a(n, n - 1) = -1.0;
  return a;
}

// Minimization over the N - 1 free deviations; beta_N follows from the echo condition.
class ReducedProblem {
 public:
  explicit ReducedProblem(int count)
      : count_(count),
        basis_(Eigen::MatrixXd::Zero(count, count - 1)),
        cpmg_(count),
        jacobian_(constraint_jacobian(count)) {
    for (Eigen::Index n = 0; n < count - 1; ++n) {
      basis_(n, n) = 1.0;
      basis_(count - 1, n) = -sigma(count - 1) * sigma(n);
    }
    for (Eigen::Index n = 0; n < count; ++n) {
      cpmg_(n) = static_cast<double>(2 * n + 1) / (2.0 * count);
    }
  }

  Eigen::VectorXd beta(const Eigen::VectorXd& z) const { return basis_ * z; }
  Eigen::VectorXd alpha(const Eigen::VectorXd& z) const { return cpmg_ + basis_ * z; }

  bool feasible(const Eigen::VectorXd& z) const {
    return (constraint_values(alpha(z)).array() > 0.0).all();
  }

  // Objective g3 + mu * barrier with its reduced gradient and Hessian.
  double evaluate(const Eigen::VectorXd& z, double mu, Eigen::VectorXd* grad,
                  Eigen::MatrixXd* hess) const {
    const Eigen::VectorXd a = alpha(z);
    const std::span<const double> pos(a.data(), static_cast<std::size_t>(a.size()));
    double value = g3_positions(pos);
    Eigen::VectorXd grad_alpha = g3_gradient(pos);
    Eigen::MatrixXd hess_alpha = g3_hessian(pos);
    if (mu > 0.0) {
      const Eigen::VectorXd c = constraint_values(a);
      value -= mu * c.array().log().sum();
      const Eigen::VectorXd inv = c.cwiseInverse();
      grad_alpha -= mu * jacobian_.transpose() * inv;
      hess_alpha += mu * jacobian_.transpose() * inv.cwiseAbs2().asDiagonal() * jacobian_;
    }
    if (grad) *grad = basis_.transpose() * grad_alpha;
    if (hess) *hess = basis_.transpose() * hess_alpha * basis_;
    return value;
  }

 private:
  int count_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd cpmg_;
  Eigen::MatrixXd jacobian_;
};

// Damped Newton direction; the Hessian is shifted until it is positive definite.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad) {
  const Eigen::Index n = grad.size();
  double shift = 0.0;
  const double scale = std::max(1e-12, hess.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(hess + shift * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt.solve(-grad);
    shift = shift == 0.0 ? 1e-8 * scale : shift * 10.0;
  }
  return -grad;
}

Eigen::VectorXd barrier_descent(const ReducedProblem& problem, Eigen::VectorXd z, double mu,
                                int max_iterations) {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  for (int it = 0; it < max_iterations; ++it) {
    const double value = problem.evaluate(z, mu, &grad, &hess);
    const Eigen::VectorXd step = newton_direction(hess, grad);
    const double slope = grad.dot(step);
    if (-slope < 1e-20) break;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = z + t * step;
      if (!problem.feasible(trial)) continue;
      if (problem.evaluate(trial, mu, nullptr, nullptr) <= value + 1e-4 * t * slope) {
        z = trial;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return z;
}

// Plain Newton on g3 alone; stops when the gradient stops shrinking.
Eigen::VectorXd newton_polish(const ReducedProblem& problem, Eigen::VectorXd z,
                              const MinimizeOptions& options) {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  problem.evaluate(z, 0.0, &grad, &hess);
  for (int it = 0; it < options.max_newton_iterations; ++it) {
    if (grad.norm() < options.gradient_tolerance * 1e-3) break;
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd trial = z + llt.solve(-grad);
    if (!problem.feasible(trial)) break;
    Eigen::VectorXd trial_grad;
    Eigen::MatrixXd trial_hess;
    problem.evaluate(trial, 0.0, &trial_grad, &trial_hess);
    if (trial_grad.norm() >= grad.norm()) break;
    z = trial;
    grad = std::move(trial_grad);
    hess = std::move(trial_hess);
  }
  return z;
}

}  // namespace

double alternating_sum(std::span<const double> deviation) {
  double sum = 0.0;
  for (std::size_t n = 0; n < deviation.size(); ++n) {
    sum += sigma(static_cast<Eigen::Index>(n)) * deviation[n];
  }
  return sum;
}

std::vector<double> sample_admissible(int count, std::mt19937_64& rng) {
  if (count < 1) throw DomainError("sample_admissible: pulse count must be at least 1");
  if (count == 1) return {0.0};

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> deviation(static_cast<std::size_t>(count));
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    // Random cube size so that both near-CPMG and far-from-CPMG samples appear.
    const double half_width = unit(rng) / count;
    for (double& b : deviation) b = half_width * (2.0 * unit(rng) - 1.0);
    const double shift = alternating_sum(deviation) / count;
    for (std::size_t n = 0; n < deviation.size(); ++n) {
      deviation[n] -= shift * sigma(static_cast<Eigen::Index>(n));
    }
    if (admissible(positions_from_beta(deviation))) return deviation;
  }
  std::ostringstream os;
  os << "sample_admissible: no admissible deviation for N = " << count << " after "
     << kMaxRejections << " draws";
  throw NumericalError(os.str());
}

std::vector<double> sample_admissible(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_admissible(count, rng);
}

double scaling_curve(std::span<const double> deviation, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("scaling_curve: lambda must be non-negative");
  if (deviation.empty()) throw DomainError("scaling_curve: empty deviation");
  std::vector<double> scaled(deviation.begin(), deviation.end());
  for (double& b : scaled) b *= lambda;
  return g3_positions(positions_from_beta(scaled)) -
         cpmg_constant(static_cast<int>(deviation.size()));
}

BoundaryReduction boundary_scale(std::span<const double> deviation) {
  const auto count = static_cast<Eigen::Index>(deviation.size());
  if (count == 0 || std::all_of(deviation.begin(), deviation.end(),
                                [](double b) { return b == 0.0; })) {
    throw DomainError("boundary_scale: beta = 0 has no scaling direction");
  }
  if (std::abs(alternating_sum(deviation)) > 1e-12) {
    throw DomainError("boundary_scale: beta is off the echo hyperplane");
  }

  const Eigen::Map<const Eigen::VectorXd> b(deviation.data(), count);
  const std::vector<double> zero(static_cast<std::size_t>(count), 0.0);
  const std::vector<double> grid = positions_from_beta(zero);
  const Eigen::Map<const Eigen::VectorXd> cpmg(grid.data(), count);

  const Eigen::VectorXd base = constraint_values(cpmg);
  const Eigen::VectorXd rate = constraint_jacobian(count) * b;
  double lambda_b = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    if (rate(i) < 0.0) lambda_b = std::min(lambda_b, -base(i) / rate(i));
  }
  if (!std::isfinite(lambda_b)) {
    throw NumericalError("boundary_scale: no constraint becomes active");
  }

  BoundaryReduction out;
  out.lambda_b = lambda_b;
  out.boundary_positions.resize(static_cast<std::size_t>(count));
  for (Eigen::Index n = 0; n < count; ++n) {
    out.boundary_positions[static_cast<std::size_t>(n)] = cpmg(n) + lambda_b * b(n);
  }

  const double tol = PulseSequence::kMinGap;
  out.dropped_end_pulses = static_cast<int>(
      std::count_if(out.boundary_positions.begin(), out.boundary_positions.end(),
                    [tol](double p) { return p <= tol || p >= 1.0 - tol; }));
  std::vector<double> kept = remove_null_pulses(out.boundary_positions, tol);
  out.merged_pairs =
      (static_cast<int>(count) - out.dropped_end_pulses - static_cast<int>(kept.size())) / 2;
  out.reduced = PulseSequence::from_positions(std::move(kept));
  return out;
}

OptimizationResult minimize(int count, int starts, std::uint64_t seed, MinimizeOptions options) {
  if (count < 1) throw DomainError("minimize: pulse count must be at least 1");
  if (starts < 1) throw DomainError("minimize: at least one start is required");

  OptimizationResult result;
  result.pulse_count = count;
  result.starts = starts;
  if (count == 1) {
    result.best_beta = {0.0};
    result.best_g = g3(cpmg(1));
    result.converged_starts = starts;
    return result;
  }

  const ReducedProblem problem(count);
  constexpr double kBarrierWeights[] = {1e-2, 1e-4, 1e-6, 1e-8};

  bool have_best = false;
  double worst_gradient = 0.0;
  for (int start = 0; start < starts; ++start) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(start)));
    const std::vector<double> initial = sample_admissible(count, rng);
    Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(initial.data(), count - 1);

    for (double mu : kBarrierWeights) {
      z = barrier_descent(problem, z, mu, options.max_newton_iterations);
    }
    z = newton_polish(problem, z, options);

    Eigen::VectorXd grad;
    const double value = problem.evaluate(z, 0.0, &grad, nullptr);
    const double grad_norm = grad.norm();
    worst_gradient = std::max(worst_gradient, grad_norm);
    if (!(grad_norm < options.gradient_tolerance)) continue;

    ++result.converged_starts;
    if (!have_best || value < result.best_g) {
      have_best = true;
      const Eigen::VectorXd best = problem.beta(z);
      result.best_beta.assign(best.data(), best.data() + best.size());
      result.best_g = value;
      result.gradient_norm_at_best = grad_norm;
    }
  }

  if (!have_best) {
    std::ostringstream os;
    os << "minimize: none of " << starts << " starts reached gradient norm "
       << options.gradient_tolerance << " (largest final gradient " << worst_gradient << ")";
    throw NumericalError(os.str());
  }
  return result;
}

}  // namespace ddnoise
