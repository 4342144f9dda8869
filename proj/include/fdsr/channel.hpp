#pragma once

#include <complex>

#include "fdsr/rng.hpp"

namespace fdsr {

/// One directed link. The complex coefficient is magnitude·exp(-j·phase);
/// all delay and propagation phase factors of the link are folded into
/// `phase`.
struct Link {
  double magnitude = 0.0;
  double phase = 0.0;  // [0, 2π)

  std::complex<double> value() const { return std::polar(magnitude, -phase); }
};

/// Links among the access point (A), primary receiver (P), backscatter
/// tag (S) and eavesdropper (E). Member `xy` is the link from X to Y.
struct ChannelSet {
  Link ap, as, sa, sp, ep, es, se, ea, ae;
};

struct ChannelParams {
  double eta = 3.0;    // Rician factor
  double c0 = 0.01;    // power gain at d0 (-20 dB)
  double d0 = 1.0;     // m
  double v = 3.0;      // path-loss exponent
  double dmin = 1.0;   // m
  double dmax = 8.0;   // m
  bool reciprocal = false;  // share the A-S fading draw between AS and SA

  void validate() const;
};

/// Mean power gain c0·(d/d0)^-v.
double path_gain(double d, const ChannelParams& params);

/// Rician-faded link at distance `d`: LoS phasor with uniform phase plus a
/// CN(0,1) scattered part, weighted by η and scaled by the path gain.
Link sample_link(double d, const ChannelParams& params, Rng& rng);

/// One block-fading realisation. One distance per device pair is drawn from
/// U(dmin, dmax) and shared by both directions of that pair; each directed
/// link then gets its own fading draw (AS/SA share one when reciprocal).
ChannelSet sample_channel_set(const ChannelParams& params, Rng& rng);

}  // namespace fdsr
