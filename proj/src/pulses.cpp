#include "ddnoise/pulses.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ddnoise/errors.hpp"

namespace ddnoise {

PulseSequence::PulseSequence(std::vector<double> positions) : positions_(std::move(positions)) {
  switch_integral_.reserve(positions_.size());
  double integral = 0.0;
  double previous = 0.0;
  for (std::size_t n = 0; n < positions_.size(); ++n) {
    integral += interval_sign(static_cast<int>(n)) * (positions_[n] - previous);
    switch_integral_.push_back(integral);
    previous = positions_[n];
  }
}

PulseSequence PulseSequence::from_positions(std::vector<double> positions) {
  double previous = 0.0;
  for (std::size_t n = 0; n < positions.size(); ++n) {
    const double p = positions[n];
    if (!std::isfinite(p) || p - previous < kMinGap) {
      std::ostringstream os;
      os << "physical boundary: pulse " << n + 1 << " at " << p
         << " must exceed the previous pulse (or 0) by at least " << kMinGap;
      throw ValidationError(os.str());
    }
    previous = p;
  }
  if (!positions.empty() && 1.0 - positions.back() < kMinGap) {
    std::ostringstream os;
    os << "physical boundary: last pulse at " << positions.back()
       << " must lie below 1 by at least " << kMinGap;
    throw ValidationError(os.str());
  }
  return PulseSequence(std::move(positions));
}

std::vector<double> PulseSequence::intervals() const {
  std::vector<double> out;
  out.reserve(positions_.size() + 1);
  double previous = 0.0;
  for (double p : positions_) {
    out.push_back(p - previous);
    previous = p;
  }
  out.push_back(1.0 - previous);
  return out;
}

double PulseSequence::integrated_switching(double s) const {
  const auto it = std::upper_bound(positions_.begin(), positions_.end(), s);
  const auto passed = static_cast<std::size_t>(it - positions_.begin());
  if (passed == 0) return s;
  return switch_integral_[passed - 1] +
         interval_sign(static_cast<int>(passed)) * (s - positions_[passed - 1]);
}

PulseSequence free_evolution() { return PulseSequence{}; }

PulseSequence cpmg(int count) {
  if (count < 0) throw DomainError("cpmg: pulse count must be non-negative");
  std::vector<double> positions;
  positions.reserve(static_cast<std::size_t>(count));
  for (int n = 1; n <= count; ++n) {
    positions.push_back(static_cast<double>(2 * n - 1) / (2.0 * count));
  }
  return PulseSequence::from_positions(std::move(positions));
}

PulseSequence udd(int count) {
  if (count < 1) throw DomainError("udd: pulse count must be at least 1");
  std::vector<double> positions;
  positions.reserve(static_cast<std::size_t>(count));
  // Long double keeps sin^2 correctly rounded at the rational points (e.g. 1/4, 1/2).
  for (int n = 1; n <= count; ++n) {
    const long double angle =
        static_cast<long double>(n) * std::numbers::pi_v<long double> / (2.0L * count + 2.0L);
    const long double s = std::sin(angle);
    positions.push_back(static_cast<double>(s * s));
  }
  return PulseSequence::from_positions(std::move(positions));
}

PulseSequence cdd(int level, int max_level) {
  if (level < 1) throw DomainError("cdd: nesting level must be at least 1");
  if (level > max_level) {
    std::ostringstream os;
    os << "cdd: nesting level " << level << " exceeds the cap " << max_level;
    throw ResourceError(os.str());
  }
  std::vector<double> inner;
  for (int l = 1; l <= level; ++l) {
    std::vector<double> raw;
    raw.reserve(2 * inner.size() + 2);
    for (double p : inner) raw.push_back(0.5 * p);
    raw.push_back(0.5);
    for (double p : inner) raw.push_back(0.5 + 0.5 * p);
    raw.push_back(1.0);
    inner = remove_null_pulses(std::move(raw), PulseSequence::kMinGap);
  }
  return PulseSequence::from_positions(std::move(inner));
}

std::vector<double> remove_null_pulses(std::vector<double> times, double tolerance) {
  std::sort(times.begin(), times.end());
  std::vector<double> kept;
  kept.reserve(times.size());
  bool last_is_cancellable = false;
  for (double t : times) {
    if (t <= tolerance || t >= 1.0 - tolerance) continue;
    if (last_is_cancellable && t - kept.back() < tolerance) {
      kept.pop_back();
      last_is_cancellable = false;
      continue;
    }
    kept.push_back(t);
    last_is_cancellable = true;
  }
  return kept;
}

double echo_residual(const PulseSequence& seq) {
  if (seq.empty()) return 1.0;
  // The CPMG grid has zero residual, so the residual equals 2 * sum (-1)^(n-1) beta_n.
  // Measuring against the rounded grid makes cpmg(N) exactly zero.
  double sum = 0.0;
  double compensation = 0.0;
  const std::vector<double> deviation = beta(seq);
  for (std::size_t n = 0; n < deviation.size(); ++n) {
    const double term = 2.0 * PulseSequence::interval_sign(static_cast<int>(n)) * deviation[n];
    const double next = sum + term;
    compensation += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
    sum = next;
  }
  return sum + compensation;
}

std::vector<double> beta(const PulseSequence& seq) {
  if (seq.empty()) throw DomainError("beta: the sequence has no pulses");
  const int count = seq.size();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int n = 1; n <= count; ++n) {
    out.push_back(seq.positions()[n - 1] - static_cast<double>(2 * n - 1) / (2.0 * count));
  }
  return out;
}

std::vector<double> positions_from_beta(std::span<const double> deviation) {
  const auto count = static_cast<double>(deviation.size());
  std::vector<double> out;
  out.reserve(deviation.size());
  for (std::size_t n = 0; n < deviation.size(); ++n) {
    out.push_back(static_cast<double>(2 * n + 1) / (2.0 * count) + deviation[n]);
  }
  return out;
}

int switching_value(const PulseSequence& seq, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("switching_value: s must lie in [0, 1]");
  const auto positions = seq.positions();
  const auto passed = std::upper_bound(positions.begin(), positions.end(), s) - positions.begin();
  return PulseSequence::interval_sign(static_cast<int>(passed));
}

namespace {

int parse_count(std::string_view text, std::string_view spec) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError("sequence spec '" + std::string(spec) + "': '" + std::string(text) +
                          "' is not an integer");
  }
  return value;
}

}  // namespace

PulseSequence parse_sequence(std::string_view spec) {
  if (spec == "free") return free_evolution();
  if (spec == "hahn") return cpmg(1);

  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("unknown sequence spec '" + std::string(spec) + "'");
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view arg = spec.substr(colon + 1);

  try {
    if (kind == "cpmg" || kind == "udd" || kind == "cdd") {
      const int n = parse_count(arg, spec);
      if (n < 1) {
        throw ValidationError("sequence spec '" + std::string(spec) + "': count must be >= 1");
      }
      if (kind == "cpmg") return cpmg(n);
      if (kind == "udd") return udd(n);
      return cdd(n);
    }
  } catch (const DomainError& e) {
    throw ValidationError(std::string("sequence spec: ") + e.what());
  }
  if (kind == "pos") {
    std::vector<double> positions;
    std::string_view rest = arg;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty()) {
        throw ValidationError("sequence spec '" + std::string(spec) + "': '" +
                              std::string(item) + "' is not a number");
      }
      positions.push_back(value);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
      if (rest.empty()) {
        throw ValidationError("sequence spec '" + std::string(spec) + "': trailing comma");
      }
    }
    if (positions.empty()) {
      throw ValidationError("sequence spec '" + std::string(spec) + "': no positions given");
    }
    return PulseSequence::from_positions(std::move(positions));
  }
  throw ValidationError("unknown sequence spec '" + std::string(spec) + "'");
}

}  // namespace ddnoise
