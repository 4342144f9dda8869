#pragma once

#include <cmath>
#include <random>

#include "fdsr/channel.hpp"
#include "fdsr/rng.hpp"
#include "fdsr/snr_terms.hpp"
#include "fdsr/units.hpp"

namespace fdsr::test {

inline ChannelSet scenario(std::uint64_t seed, std::uint64_t i, const ChannelParams& c = {}) {
  Rng rng = trial_rng(seed, i);
  return sample_channel_set(c, rng);
}

/// Parameters drawn across their whole admissible range.
inline SystemParams random_params(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SystemParams p;
  p.p_a = 0.05 + 3.0 * u(rng);
  p.p_e = 3.0 * u(rng);
  p.gamma_refl = u(rng);
  p.phi_s = kTwoPi * u(rng);
  p.theta = u(rng);
  p.beta = u(rng);
  p.tau = u(rng);
  p.alpha = u(rng) < 0.5 ? 0 : 1;
  p.lambda = u(rng);
  p.kappa1 = 0.5 + u(rng);
  p.kappa2 = 0.5 + u(rng);
  p.kappa3 = 0.5 + u(rng);
  p.gamma_th_p = 20.0 * u(rng);
  return p;
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double circ_dist(double a, double b) {
  const double d = wrap_phase(a - b);
  return std::min(d, kTwoPi - d);
}

}  // namespace fdsr::test
