#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fdsr/channel.hpp"
#include "fdsr/optimizer.hpp"
#include "fdsr/snr_terms.hpp"

namespace fdsr {

enum class SweepParameter { PA, PE, GammaThP, Lambda, Gamma, Beta, Tau, Theta, DeltaPhi, PhiAFixed };

std::string to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

/// Which ratio the `mean_power_ratio` column carries: m*²/P_A or m*²/P_E.
enum class PowerRatio { DAR, DER };

struct StrategyEntry {
  Strategy strategy;
  int alpha = 1;  // eavesdropper antenna: 1 = OA, 0 = DA

  /// e.g. "PS+OA", "AN+DA".
  std::string label() const;
};

/// "PS+OA", "AN+DA", "PS-discrete(0.785)+OA", ...
StrategyEntry parse_strategy_entry(std::string_view text);

struct SweepSpec {
  std::string name = "sweep";
  SweepParameter parameter = SweepParameter::PA;
  std::vector<double> values;
  std::vector<StrategyEntry> strategies;
  std::size_t trials = 10000;
  std::uint64_t master_seed = 1;
  SystemParams base;
  ChannelParams channel;
  SolveOptions solve;
  PowerRatio ratio = PowerRatio::DAR;

  void validate() const;
};

struct SweepRow {
  double parameter_value = 0.0;
  std::string strategy_label;
  double mean_r_s = 0.0;
  double mean_signal_power = 0.0;  // over feasible trials
  double mean_power_ratio = 0.0;   // over feasible trials
  double infeasible_fraction = 0.0;
  std::size_t trials = 0;
  double se_r_s = 0.0;  // standard error of mean_r_s
};

struct SweepResult {
  std::vector<SweepRow> rows;  // (value × strategy), value-major
  std::size_t n_values = 0;
  std::size_t n_strategies = 0;
  std::size_t trials = 0;
  std::vector<double> r_s;     // per trial, same layout as rows then trial

  double trial_r_s(std::size_t value, std::size_t strategy, std::size_t trial) const {
    return r_s[(value * n_strategies + strategy) * trials + trial];
  }
  const SweepRow& row(std::size_t value, std::size_t strategy) const {
    return rows[value * n_strategies + strategy];
  }
};

/// Paired Monte Carlo sweep. Trial t draws its ChannelSet from
/// (master_seed, t) once and reuses it for every value and strategy.
/// Trials run in parallel; means are reduced in trial order afterwards.
SweepResult run_sweep_detailed(const SweepSpec& spec);

/// Single-threaded reference with the same output.
SweepResult run_sweep_serial(const SweepSpec& spec);

std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Parameter set and strategy seen by one (value, strategy) cell.
std::pair<SystemParams, Strategy> apply_parameter(const SweepSpec& spec, const StrategyEntry& e,
                                                  double value);

/// Figure presets: fig3, fig4, fig5, fig6, fig7, fig8a, fig8b, fig_gamma.
/// fig7 expands into three sweeps (beta, tau, theta).
std::vector<SweepSpec> figure_preset(std::string_view name);
std::vector<std::string> figure_names();

/// Header `param,strategy,mean_rs,mean_signal_power,mean_power_ratio,infeasible_frac,trials,seed`.
void write_csv(std::ostream& os, const std::vector<SweepRow>& rows, std::uint64_t seed);

nlohmann::json to_json(const SweepSpec& spec);
nlohmann::json to_json(const SystemParams& p);
nlohmann::json to_json(const ChannelParams& c);

/// max over φ of |T(φ) − T(φ+π)| for one strategy of a phi_a_fixed sweep.
/// Only values whose π-shifted partner is also in the sweep contribute.
double periodicity_deviation(const std::vector<SweepRow>& rows, std::string_view label);

}  // namespace fdsr
