#pragma once

#include <cstddef>

#include "fdsr/channel.hpp"
#include "fdsr/optimizer.hpp"
#include "fdsr/snr_terms.hpp"

// Brute-force references for the closed forms and the optimizer. Nothing in
// here calls into snr_terms or optimizer; received powers are rebuilt from
// complex path sums.
namespace fdsr::oracle {

struct PhasorSnr {
  double gamma_p = 0.0;
  double gamma_a = 0.0;
  double gamma_e = 0.0;
};

/// SNRs at P, A and E for the transmit signal m·x_A − n·e^{jφ_A}·x_N.
/// With `coherent_an` false the AN is treated as independent noise (the
/// conventional AN baseline). A zero interference power yields +inf.
PhasorSnr phasor_snr(const ChannelSet& ch, const SystemParams& p, double m, double n,
                     double phi_a, bool coherent_an = true);

struct GridSpec {
  std::size_t m_points = 10000;
  std::size_t phase_points = 720;  // continuous phase only
  bool clamp_to_feasible = true;   // false: ignore C1 (unconstrained bound)
  std::size_t refine_levels = 0;   // local zoom passes around the best m
  std::size_t refine_points = 201;

  void validate() const;
};

/// Exhaustive search over the m grid × phase grid of `s`. Parallel kernel:
/// candidates are visited in descending r_s order and the first C1-feasible
/// one wins, which is the same argmax as a full scan.
Solution grid_search(const ChannelSet& ch, const SystemParams& p, const Strategy& s,
                     const GridSpec& g = {});

/// Serial full scan; the reference for grid_search.
Solution grid_search_serial(const ChannelSet& ch, const SystemParams& p, const Strategy& s,
                            const GridSpec& g = {});

}  // namespace fdsr::oracle
