#include "ddnoise/expansion.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ddnoise/engine.hpp"
#include "ddnoise/errors.hpp"

namespace ddnoise {
namespace {

// Running integrals of the switching function along the window: F = Int f and
// D(x) = Int_0^x f(s) (x - s) ds, sampled at every pulse, plus the totals needed
// by the gradient.
struct SwitchingMoments {
  std::vector<double> f_at_pulse;
  std::vector<double> d_at_pulse;
  double f_total = 0.0;       // F(1), the echo residual
  double first_moment = 0.0;  // Int_0^1 s f(s) ds
  double g = 0.0;
};

SwitchingMoments accumulate(std::span<const double> positions) {
  SwitchingMoments m;
  m.f_at_pulse.reserve(positions.size());
  m.d_at_pulse.reserve(positions.size());

  double f_acc = 0.0;
  double d_acc = 0.0;
  double start = 0.0;
  for (std::size_t k = 0; k <= positions.size(); ++k) {
    const double end = k < positions.size() ? positions[k] : 1.0;
    const double sign = PulseSequence::interval_sign(static_cast<int>(k));
    const double len = end - start;
    // Int over the interval of D(x) dx with D = d_acc + f_acc u + sign u^2 / 2.
    const double d_integral = d_acc * len + f_acc * len * len / 2.0 + sign * len * len * len / 6.0;
    m.g -= sign * d_integral;
    m.first_moment += sign * (end * end - start * start) / 2.0;
    d_acc += f_acc * len + sign * len * len / 2.0;
    f_acc += sign * len;
    if (k < positions.size()) {
      m.f_at_pulse.push_back(f_acc);
      m.d_at_pulse.push_back(d_acc);
    }
    start = end;
  }
  m.f_total = f_acc;
  return m;
}

double constant_part(int count) { return 1.0 / (12.0 * count * count); }

}  // namespace

double g3_positions(std::span<const double> positions) { return accumulate(positions).g; }

double g3(const PulseSequence& seq) { return g3_positions(seq.positions()); }

Eigen::VectorXd g3_gradient(std::span<const double> positions) {
  const SwitchingMoments m = accumulate(positions);
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::VectorXd grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sign = PulseSequence::interval_sign(static_cast<int>(i));
    grad(i) = -2.0 * sign *
              (2.0 * m.d_at_pulse[i] + m.first_moment - positions[i] * m.f_total);
  }
  return grad;
}

Eigen::MatrixXd g3_hessian(std::span<const double> positions) {
  const SwitchingMoments m = accumulate(positions);
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd hess(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double si = PulseSequence::interval_sign(static_cast<int>(i));
    hess(i, i) = -2.0 * si * (2.0 * m.f_at_pulse[i] - m.f_total);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double sj = PulseSequence::interval_sign(static_cast<int>(j));
      hess(i, j) = hess(j, i) = -4.0 * si * sj * (positions[i] - positions[j]);
    }
  }
  return hess;
}

ExpansionReport g3_parts(const PulseSequence& seq) {
  if (seq.empty()) throw DomainError("g3_parts: the sequence has no pulses");
  const int count = seq.size();
  const std::vector<double> deviation = beta(seq);

  const auto shifted = [&](double lambda) {
    std::vector<double> scaled(deviation);
    for (double& b : scaled) b *= lambda;
    return g3_positions(positions_from_beta(scaled)) - constant_part(count);
  };
  const double p0 = shifted(0.0);
  const double p1 = shifted(1.0);
  const double pm = shifted(-1.0);
  const double p2 = shifted(2.0);

  // p(lambda) = c0 + c1 lambda + c2 lambda^2 + c3 lambda^3
  const double c2 = (p1 + pm) / 2.0 - p0;
  const double odd = (p1 - pm) / 2.0;  // c1 + c3
  const double c3 = (p2 - p0 - 4.0 * c2 - 2.0 * odd) / 6.0;
  const double c1 = odd - c3;

  if (std::abs(c1) > 1e-10) {
    std::ostringstream os;
    os << "g3_parts: linear part " << c1
       << " does not vanish; the sequence violates the echo condition (residual "
       << echo_residual(seq) << ")";
    throw NumericalError(os.str());
  }

  ExpansionReport report;
  report.pulse_count = count;
  report.constant_part = constant_part(count);
  report.quadratic_part = c2;
  report.cubic_part = c3;
  report.linear_part = c1;
  report.g_total = g3(seq);
  return report;
}

double third_order_scalar(const NoiseModel& model) {
  const Eigen::VectorXd w_y = model.levels().cwiseProduct(model.initial_distribution());
  return model.levels().dot(model.generator() * w_y);
}

ExpansionReport expansion_report(const NoiseModel& model, const PulseSequence& seq) {
  ExpansionReport report = g3_parts(seq);
  report.scalar_s = third_order_scalar(model);
  report.predicted_cubic = report.g_total * *report.scalar_s;
  return report;
}

double fit_cubic(const NoiseModel& model, const PulseSequence& seq) {
  if (std::abs(echo_residual(seq)) > 1e-12) {
    throw DomainError("fit_cubic: the sequence violates the echo condition");
  }
  const double s = third_order_scalar(model);
  if (s == 0.0) {
    throw DomainError("fit_cubic: degenerate model, W Gamma W y(0) sums to zero");
  }
  const double predicted = g3(seq) * s;

  // Aim for |<x(t0)> - 1| around 1e-5.
  const double t0 = std::cbrt(1e-5 / std::abs(predicted));
  constexpr int kPoints = 7;
  std::array<double, kPoints> ratio{};
  for (int i = 0; i < kPoints; ++i) {
    const double t = std::ldexp(t0, -i);
    const double deviation = coherence(model, seq, t).value.real() - 1.0;
    if (std::abs(deviation) < 1e-13) {
      std::ostringstream os;
      os << "fit_cubic: decoherence " << deviation << " at t = " << t
         << " is below the numerical floor";
      throw NumericalError(os.str());
    }
    ratio[i] = deviation / (t * t * t);
  }

  // Richardson table for ratio(t) = c3 + c4 t + c5 t^2 + ... with halving steps.
  // Keep the entry whose change from the previous column is smallest.
  std::array<std::array<double, kPoints>, kPoints> table{};
  for (int i = 0; i < kPoints; ++i) table[i][0] = ratio[i];
  double best = table[0][0];
  double best_change = std::numeric_limits<double>::infinity();
  for (int j = 1; j < kPoints; ++j) {
    const double factor = std::ldexp(1.0, j);
    for (int i = 0; i + j < kPoints; ++i) {
      table[i][j] = (factor * table[i + 1][j - 1] - table[i][j - 1]) / (factor - 1.0);
      const double change = std::abs(table[i][j] - table[i][j - 1]);
      if (change < best_change) {
        best_change = change;
        best = table[i][j];
      }
    }
  }
  return best;
}

double word_contraction(const NoiseModel& model, std::string_view word) {
  Eigen::VectorXd v = model.initial_distribution();
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it == 'G') {
      v = model.generator() * v;
    } else if (*it == 'W') {
      v = model.levels().cwiseProduct(v);
    } else {
      throw DomainError("word_contraction: letters must be 'G' or 'W'");
    }
  }
  return v.sum();
}

std::map<std::string, WordTerm> word_expansion(const NoiseModel& model, const PulseSequence& seq,
                                               int order) {
  constexpr int kMaxOrder = 4;
  constexpr int kMaxPulses = 6;
  if (order < 0) throw DomainError("word_expansion: order must be non-negative");
  if (order > kMaxOrder || seq.size() > kMaxPulses) {
    std::ostringstream os;
    os << "word_expansion: order " << order << " with " << seq.size()
       << " pulses exceeds the cap (order <= " << kMaxOrder << ", pulses <= " << kMaxPulses
       << ")";
    throw ResourceError(os.str());
  }

  using Complex = std::complex<double>;
  const std::vector<double> intervals = seq.intervals();
  std::map<std::string, WordTerm> out;

  for (int length = 0; length <= order; ++length) {
    for (unsigned mask = 0; mask < (1u << length); ++mask) {
      std::string word(static_cast<std::size_t>(length), 'G');
      for (int b = 0; b < length; ++b) {
        if (mask & (1u << b)) word[static_cast<std::size_t>(b)] = 'W';
      }

      // dp[p]: coefficient of the last p letters produced by the intervals seen so far.
      // Interval 1 acts first, so it owns the rightmost letters.
      std::vector<Complex> dp(static_cast<std::size_t>(length) + 1, Complex(0.0, 0.0));
      dp[0] = 1.0;
      for (std::size_t k = 0; k < intervals.size(); ++k) {
        const Complex w_factor(0.0, PulseSequence::interval_sign(static_cast<int>(k)));
        std::vector<Complex> next(dp.size(), Complex(0.0, 0.0));
        for (int q = 0; q <= length; ++q) {
          if (dp[q] == Complex(0.0, 0.0)) continue;
          Complex segment = 1.0;
          for (int p = q; p <= length; ++p) {
            if (p > q) {
              const char letter = word[static_cast<std::size_t>(length - p)];
              segment *= intervals[k] / static_cast<double>(p - q);
              if (letter == 'W') segment *= w_factor;
            }
            next[p] += dp[q] * segment;
          }
        }
        dp = std::move(next);
      }
      out.emplace(word, WordTerm{dp[static_cast<std::size_t>(length)], word_contraction(model, word)});
    }
  }
  return out;
}

}  // namespace ddnoise
