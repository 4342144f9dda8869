#include "fdsr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fdsr/rng.hpp"
#include "fdsr/units.hpp"

namespace fdsr {

namespace {

constexpr double kPi = std::numbers::pi;

struct NamedParam {
  SweepParameter p;
  const char* name;
};

constexpr NamedParam kParamNames[] = {
    {SweepParameter::PA, "P_A"},           {SweepParameter::PE, "P_E"},
    {SweepParameter::GammaThP, "gamma_th_p"}, {SweepParameter::Lambda, "lambda"},
    {SweepParameter::Gamma, "Gamma"},      {SweepParameter::Beta, "beta"},
    {SweepParameter::Tau, "tau"},          {SweepParameter::Theta, "theta"},
    {SweepParameter::DeltaPhi, "delta_phi"}, {SweepParameter::PhiAFixed, "phi_a_fixed"},
};

std::vector<double> steps(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

std::vector<StrategyEntry> four_curves() {
  return {{Strategy::ps_continuous(), 1},
          {Strategy::ps_continuous(), 0},
          {Strategy::an(), 1},
          {Strategy::an(), 0}};
}

struct TrialOutcome {
  double r_s;
  double signal_power;
  bool feasible;
};

// One trial across all cells; writes to out[(v*S + s)*T + trial].
void run_trial(const SweepSpec& spec, const std::vector<std::pair<SystemParams, Strategy>>& cells,
               std::size_t trial, std::vector<TrialOutcome>& out) {
  Rng rng = trial_rng(spec.master_seed, trial);
  const ChannelSet ch = sample_channel_set(spec.channel, rng);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Solution sol = solve(ch, cells[c].first, cells[c].second, spec.solve);
    out[c * spec.trials + trial] = {sol.feasible ? sol.r_s : 0.0,
                                    sol.m_star * sol.m_star, sol.feasible};
  }
}

std::vector<std::pair<SystemParams, Strategy>> make_cells(const SweepSpec& spec) {
  std::vector<std::pair<SystemParams, Strategy>> cells;
  for (double v : spec.values) {
    for (const StrategyEntry& e : spec.strategies) cells.push_back(apply_parameter(spec, e, v));
  }
  return cells;
}

SweepResult reduce(const SweepSpec& spec, const std::vector<std::pair<SystemParams, Strategy>>& cells,
                   const std::vector<TrialOutcome>& out) {
  SweepResult res;
  res.n_values = spec.values.size();
  res.n_strategies = spec.strategies.size();
  res.trials = spec.trials;
  res.r_s.resize(out.size());
  const double nt = static_cast<double>(spec.trials);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const SystemParams& p = cells[c].first;
    double sum = 0.0, sum_sq = 0.0, sig = 0.0, ratio = 0.0;
    std::size_t feasible = 0;
    for (std::size_t t = 0; t < spec.trials; ++t) {
      const TrialOutcome& o = out[c * spec.trials + t];
      res.r_s[c * spec.trials + t] = o.r_s;
      sum += o.r_s;
      sum_sq += o.r_s * o.r_s;
      if (o.feasible) {
        ++feasible;
        sig += o.signal_power;
        const double ref = spec.ratio == PowerRatio::DAR ? p.p_a : p.p_e;
        ratio += ref > 0.0 ? o.signal_power / ref : 0.0;
      }
    }
    SweepRow row;
    row.parameter_value = spec.values[c / spec.strategies.size()];
    row.strategy_label = spec.strategies[c % spec.strategies.size()].label();
    row.mean_r_s = sum / nt;
    if (spec.trials > 1) {
      const double var = std::max(0.0, (sum_sq - sum * sum / nt) / (nt - 1.0));
      row.se_r_s = std::sqrt(var / nt);
    }
    if (feasible > 0) {
      row.mean_signal_power = sig / static_cast<double>(feasible);
      row.mean_power_ratio = ratio / static_cast<double>(feasible);
    }
    row.infeasible_fraction = static_cast<double>(spec.trials - feasible) / nt;
    row.trials = spec.trials;
    res.rows.push_back(std::move(row));
  }
  return res;
}

}  // namespace

std::string to_string(SweepParameter p) {
  for (const auto& np : kParamNames) {
    if (np.p == p) return np.name;
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  for (const auto& np : kParamNames) {
    if (name == np.name) return np.p;
  }
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "'");
}

std::string StrategyEntry::label() const {
  return to_string(strategy) + (alpha == 1 ? "+OA" : "+DA");
}

StrategyEntry parse_strategy_entry(std::string_view text) {
  const auto plus = text.rfind('+');
  if (plus == std::string_view::npos) {
    throw std::invalid_argument("strategy '" + std::string(text) + "' needs a +OA or +DA suffix");
  }
  const std::string_view mode = text.substr(plus + 1);
  StrategyEntry e;
  if (mode == "OA") {
    e.alpha = 1;
  } else if (mode == "DA") {
    e.alpha = 0;
  } else {
    throw std::invalid_argument("strategy '" + std::string(text) + "': antenna must be OA or DA");
  }
  e.strategy = parse_strategy(text.substr(0, plus));
  return e;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("SweepSpec: values must be nonempty");
  if (!std::is_sorted(values.begin(), values.end())) {
    throw std::invalid_argument("SweepSpec: values must be sorted");
  }
  if (strategies.empty()) throw std::invalid_argument("SweepSpec: no strategies");
  if (trials < 1) throw std::invalid_argument("SweepSpec: trials must be >= 1");
  base.validate();
  channel.validate();
  for (const auto& e : strategies) e.strategy.validate();
}

std::pair<SystemParams, Strategy> apply_parameter(const SweepSpec& spec, const StrategyEntry& e,
                                                  double value) {
  SystemParams p = spec.base;
  Strategy s = e.strategy;
  p.alpha = e.alpha;
  const bool ps = s.scheme == Scheme::PS;
  switch (spec.parameter) {
    case SweepParameter::PA: p.p_a = value; break;
    case SweepParameter::PE: p.p_e = value; break;
    case SweepParameter::GammaThP: p.gamma_th_p = value; break;
    case SweepParameter::Lambda: p.lambda = value; break;
    case SweepParameter::Gamma: p.gamma_refl = value; break;
    case SweepParameter::Beta: p.beta = value; break;
    case SweepParameter::Tau: p.tau = value; break;
    case SweepParameter::Theta: p.theta = value; break;
    case SweepParameter::DeltaPhi:
      // 0 stands for continuous phase control.
      if (ps) s = value == 0.0 ? Strategy::ps_continuous() : Strategy::ps_discrete(value);
      break;
    case SweepParameter::PhiAFixed:
      if (ps) s = Strategy::ps_fixed(value);
      break;
  }
  p.validate();
  s.validate();
  return {p, s};
}

SweepResult run_sweep_detailed(const SweepSpec& spec) {
  spec.validate();
  const auto cells = make_cells(spec);
  std::vector<TrialOutcome> out(cells.size() * spec.trials);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(spec.trials); ++t) {
    run_trial(spec, cells, static_cast<std::size_t>(t), out);
  }
  return reduce(spec, cells, out);
}

SweepResult run_sweep_serial(const SweepSpec& spec) {
  spec.validate();
  const auto cells = make_cells(spec);
  std::vector<TrialOutcome> out(cells.size() * spec.trials);
  for (std::size_t t = 0; t < spec.trials; ++t) run_trial(spec, cells, t, out);
  return reduce(spec, cells, out);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) { return run_sweep_detailed(spec).rows; }

std::vector<std::string> figure_names() {
  return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8a", "fig8b", "fig_gamma"};
}

std::vector<SweepSpec> figure_preset(std::string_view name) {
  SweepSpec s;
  s.name = std::string(name);
  s.strategies = four_curves();
  if (name == "fig3") {
    s.parameter = SweepParameter::PA;
    s.values = steps(0.1, 2.0, 20);
  } else if (name == "fig4") {
    // Log-spaced: the AN curves only die out well above the transmit budget.
    s.parameter = SweepParameter::PE;
    s.values = {0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
    s.ratio = PowerRatio::DER;
  } else if (name == "fig5") {
    s.parameter = SweepParameter::GammaThP;
    s.values = steps(0.0, 50.0, 11);
  } else if (name == "fig6") {
    s.parameter = SweepParameter::Lambda;
    s.values = steps(0.0, 1.0, 11);
  } else if (name == "fig_gamma") {
    s.parameter = SweepParameter::Gamma;
    s.values = steps(0.1, 1.0, 10);
  } else if (name == "fig7") {
    std::vector<SweepSpec> out;
    for (SweepParameter p : {SweepParameter::Beta, SweepParameter::Tau, SweepParameter::Theta}) {
      SweepSpec c = s;
      c.name = "fig7_" + to_string(p);
      c.parameter = p;
      c.values = steps(0.0, 1.0, 11);
      c.strategies = {{Strategy::ps_continuous(), 1}};
      out.push_back(std::move(c));
    }
    return out;
  } else if (name == "fig8a") {
    s.parameter = SweepParameter::DeltaPhi;
    s.values = {0.0, kPi / 2.0, 2.0 * kPi / 3.0, 5.0 * kPi / 6.0, kPi, 2.0 * kPi};
    s.strategies = {{Strategy::ps_continuous(), 1}};
  } else if (name == "fig8b") {
    s.parameter = SweepParameter::PhiAFixed;
    s.values.resize(72);
    for (std::size_t k = 0; k < s.values.size(); ++k) s.values[k] = 2.0 * kPi * k / 72.0;
    s.strategies = {{Strategy::ps_continuous(), 1}};
    s.base.p_a = 2.0;
  } else {
    throw std::invalid_argument("unknown figure preset '" + std::string(name) + "'");
  }
  return {s};
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows, std::uint64_t seed) {
  os << "param,strategy,mean_rs,mean_signal_power,mean_power_ratio,infeasible_frac,trials,seed\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%zu,%llu\n",
                  r.parameter_value, r.strategy_label.c_str(), r.mean_r_s, r.mean_signal_power,
                  r.mean_power_ratio, r.infeasible_fraction, r.trials,
                  static_cast<unsigned long long>(seed));
    os << buf;
  }
}

nlohmann::json to_json(const SystemParams& p) {
  return {{"p_a", p.p_a},           {"p_e", p.p_e},
          {"sigma2_a", p.sigma2_a}, {"sigma2_p", p.sigma2_p},
          {"sigma2_e", p.sigma2_e}, {"gamma_refl", p.gamma_refl},
          {"phi_s", p.phi_s},       {"theta", p.theta},
          {"beta", p.beta},         {"tau", p.tau},
          {"alpha", p.alpha},       {"lambda", p.lambda},
          {"kappa1", p.kappa1},     {"kappa2", p.kappa2},
          {"kappa3", p.kappa3},     {"gamma_th_p", p.gamma_th_p}};
}

nlohmann::json to_json(const ChannelParams& c) {
  return {{"eta", c.eta}, {"c0", c.c0},     {"d0", c.d0},   {"v", c.v},
          {"dmin", c.dmin}, {"dmax", c.dmax}, {"reciprocal", c.reciprocal}};
}

nlohmann::json to_json(const SweepSpec& spec) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& e : spec.strategies) strategies.push_back(e.label());
  return {{"name", spec.name},
          {"swept_parameter", to_string(spec.parameter)},
          {"values", spec.values},
          {"strategies", strategies},
          {"trials", spec.trials},
          {"master_seed", spec.master_seed},
          {"base_params", to_json(spec.base)},
          {"channel_params", to_json(spec.channel)},
          {"delta", spec.solve.delta},
          {"max_iter", spec.solve.max_iter},
          {"power_ratio", spec.ratio == PowerRatio::DAR ? "DAR" : "DER"},
          {"pairing", "one channel draw per trial, shared by every value and strategy"}};
}

double periodicity_deviation(const std::vector<SweepRow>& rows, std::string_view label) {
  std::vector<const SweepRow*> series;
  for (const auto& r : rows) {
    if (r.strategy_label == label) series.push_back(&r);
  }
  double worst = 0.0;
  for (const SweepRow* a : series) {
    const double partner = wrap_phase(a->parameter_value + kPi);
    for (const SweepRow* b : series) {
      if (std::abs(b->parameter_value - partner) < 1e-9) {
        worst = std::max(worst, std::abs(a->mean_r_s - b->mean_r_s));
      }
    }
  }
  return worst;
}

}  // namespace fdsr
