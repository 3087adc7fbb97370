#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ddnoise/noise.hpp"

namespace ddnoise::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kNumericalFailure = 2 };

/// Parses a noise-model document with keys `levels`, `generator` and optional
/// `initial`. Throws ValidationError naming the offending field or invariant.
NoiseModel parse_model(std::string_view json_text);
NoiseModel load_model(const std::string& path);

/// Time grid for `curve`: linear 0..t_max, or logarithmic over three decades
/// ending at t_max.
std::vector<double> time_grid(double t_max, int points, bool logarithmic);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddnoise::cli
