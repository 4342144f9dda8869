#pragma once

#include <numbers>

namespace fdsr {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Converts decibels to a linear ratio. With `is_dbm` the input is read as
/// dBm and the result is in watts.
double db_to_linear(double x_db, bool is_dbm = false);

double linear_to_db(double x, bool is_dbm = false);

/// Wraps an angle into [0, 2π).
double wrap_phase(double radians);

}  // namespace fdsr
