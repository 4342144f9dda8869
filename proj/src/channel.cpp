#include "fdsr/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fdsr/units.hpp"

namespace fdsr {

void ChannelParams::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("ChannelParams: " + what);
  };
  if (!(eta >= 0.0)) fail("eta must be >= 0");
  if (!(c0 > 0.0) || !std::isfinite(c0)) fail("c0 must be > 0");
  if (!(d0 > 0.0) || !std::isfinite(d0)) fail("d0 must be > 0");
  if (!(v >= 0.0) || !std::isfinite(v)) fail("v must be >= 0");
  if (!(dmin > 0.0) || !(dmin <= dmax) || !std::isfinite(dmax)) {
    fail("require 0 < dmin <= dmax");
  }
}

double path_gain(double d, const ChannelParams& params) {
  return params.c0 * std::pow(d / params.d0, -params.v);
}

Link sample_link(double d, const ChannelParams& params, Rng& rng) {
  if (!(d > 0.0)) {
    throw std::invalid_argument("sample_link: distance must be > 0");
  }
  std::uniform_real_distribution<double> uphase(0.0, kTwoPi);
  // CN(0,1): independent real and imaginary parts of variance 1/2.
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

  const double los_phase = uphase(rng);
  const double re = gauss(rng);
  const double im = gauss(rng);

  double los_w = 1.0;
  double nlos_w = 0.0;
  if (std::isfinite(params.eta)) {
    los_w = std::sqrt(params.eta / (params.eta + 1.0));
    nlos_w = std::sqrt(1.0 / (params.eta + 1.0));
  }
  const std::complex<double> h =
      (los_w * std::polar(1.0, los_phase) + nlos_w * std::complex<double>(re, im)) *
      std::sqrt(path_gain(d, params));

  Link link;
  link.magnitude = std::abs(h);
  link.phase = wrap_phase(-std::arg(h));
  return link;
}

ChannelSet sample_channel_set(const ChannelParams& params, Rng& rng) {
  params.validate();
  std::uniform_real_distribution<double> udist(params.dmin, params.dmax);
  auto distance = [&] { return params.dmin == params.dmax ? params.dmin : udist(rng); };

  const double d_ap = distance();
  const double d_as = distance();
  const double d_sp = distance();
  const double d_ep = distance();
  const double d_es = distance();
  const double d_ea = distance();

  ChannelSet ch;
  ch.ap = sample_link(d_ap, params, rng);
  ch.as = sample_link(d_as, params, rng);
  ch.sa = params.reciprocal ? ch.as : sample_link(d_as, params, rng);
  ch.sp = sample_link(d_sp, params, rng);
  ch.ep = sample_link(d_ep, params, rng);
  ch.es = sample_link(d_es, params, rng);
  ch.se = sample_link(d_es, params, rng);
  ch.ea = sample_link(d_ea, params, rng);
  ch.ae = sample_link(d_ea, params, rng);
  return ch;
}

}  // namespace fdsr
