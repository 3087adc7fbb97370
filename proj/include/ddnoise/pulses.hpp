#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddnoise {

/// Ideal pi-pulse sequence on the normalized window [0, 1].
///
/// Positions are strictly increasing fractions of the total evolution time,
/// separated from each other and from both endpoints by at least kMinGap. The
/// toggling-frame switching function is +1 before the first pulse and flips sign
/// at every pulse. An empty sequence is free evolution.
class PulseSequence {
 public:
  static constexpr double kMinGap = 1e-9;

  PulseSequence() = default;

  /// Throws ValidationError when positions are out of (0, 1), unordered, or
  /// closer than kMinGap.
  static PulseSequence from_positions(std::vector<double> positions);

  std::span<const double> positions() const { return positions_; }
  int size() const { return static_cast<int>(positions_.size()); }
  bool empty() const { return positions_.empty(); }

  /// Interval lengths a_1..a_{N+1}; they sum to 1.
  std::vector<double> intervals() const;

  /// Sign of the switching function on interval k (zero-based): (-1)^k.
  static int interval_sign(int k) { return (k % 2 == 0) ? 1 : -1; }

  /// Integral of the switching function from 0 to s, for s in [0, 1].
  double integrated_switching(double s) const;

  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;

 private:
  explicit PulseSequence(std::vector<double> positions);

  std::vector<double> positions_;
  // integrated switching function at each pulse
  std::vector<double> switch_integral_;
};

/// Free evolution: no pulses.
PulseSequence free_evolution();

/// Periodic CPMG timing (2n - 1) / (2N). count = 0 gives free evolution.
PulseSequence cpmg(int count);

/// Uhrig timing sin^2(n pi / (2N + 2)).
PulseSequence udd(int count);

/// Concatenated sequence of the given nesting level: the level-(L-1) sequence is
/// placed in each half of the window with a pi pulse between the halves and one
/// at the end. Coincident pulse pairs cancel and the trailing end pulse is
/// dropped, which leaves 2^L - 1 pulses.
PulseSequence cdd(int level, int max_level = 12);

/// Removes null operations from raw pulse times: pulses within `tolerance` of 0 or
/// 1 are dropped (a pulse at either end only flips the global frame) and pulses
/// closer than `tolerance` to each other cancel in pairs. The input need not be
/// sorted. The result is not validated.
std::vector<double> remove_null_pulses(std::vector<double> times, double tolerance);

/// a_1 - a_2 + ... + (-1)^N a_{N+1}; zero when static dephasing is refocused.
double echo_residual(const PulseSequence& seq);

/// Deviations from CPMG timing, alpha_n - (2n - 1) / (2N). Throws DomainError on
/// an empty sequence.
std::vector<double> beta(const PulseSequence& seq);

/// Positions alpha_n = (2n - 1) / (2N) + deviation_n. Not validated; the result
/// may lie outside the physical region.
std::vector<double> positions_from_beta(std::span<const double> deviation);

/// Switching function f(s) in {+1, -1}. Right-continuous at pulse times. Throws
/// DomainError for s outside [0, 1].
int switching_value(const PulseSequence& seq, double s);

/// Parses `cpmg:N`, `udd:N`, `cdd:L`, `hahn`, `free` or `pos:a,b,c`. Throws
/// ValidationError on anything else.
PulseSequence parse_sequence(std::string_view spec);

}  // namespace ddnoise
