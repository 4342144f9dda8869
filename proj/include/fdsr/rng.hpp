#pragma once

#include <cstdint>
#include <random>

namespace fdsr {

using Rng = std::mt19937_64;

/// Generator for one Monte Carlo trial. The stream depends only on
/// (master_seed, trial), so trials can be evaluated in any order or thread.
inline Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

}  // namespace fdsr
