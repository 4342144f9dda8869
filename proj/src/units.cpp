#include "fdsr/units.hpp"

#include <cmath>
#include <stdexcept>

namespace fdsr {

double db_to_linear(double x_db, bool is_dbm) {
  if (!std::isfinite(x_db)) {
    throw std::invalid_argument("db_to_linear: non-finite input");
  }
  const double lin = std::pow(10.0, x_db / 10.0);
  return is_dbm ? lin / 1000.0 : lin;
}

double linear_to_db(double x, bool is_dbm) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("linear_to_db: input must be positive and finite");
  }
  return 10.0 * std::log10(is_dbm ? x * 1000.0 : x);
}

double wrap_phase(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2π.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace fdsr
