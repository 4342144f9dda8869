#include "fdsr/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fdsr/errors.hpp"
#include "fdsr/rng.hpp"
#include "fdsr/units.hpp"

namespace fdsr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += "  " + x + "\n";
  return s;
}

double as_number(const json& v) {
  if (!v.is_number()) throw std::invalid_argument("expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw std::invalid_argument("must be finite");
  return d;
}

std::uint64_t as_count(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw std::invalid_argument("expected a nonnegative integer");
}

std::string as_string(const json& v) {
  if (!v.is_string()) throw std::invalid_argument("expected a string");
  return v.get<std::string>();
}

using Setter = std::function<void(RunConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto watts = [&t](const std::string& key, double SystemParams::*field) {
      t[key] = [field](RunConfig& c, const json& v) { c.system.*field = as_number(v); };
      t[key + "_dbm"] = [field](RunConfig& c, const json& v) {
        c.system.*field = db_to_linear(as_number(v), true);
      };
    };
    watts("p_a", &SystemParams::p_a);
    watts("p_e", &SystemParams::p_e);
    watts("sigma2_a", &SystemParams::sigma2_a);
    watts("sigma2_p", &SystemParams::sigma2_p);
    watts("sigma2_e", &SystemParams::sigma2_e);
    auto plain = [&t](const std::string& key, double SystemParams::*field) {
      t[key] = [field](RunConfig& c, const json& v) { c.system.*field = as_number(v); };
    };
    plain("gamma_refl", &SystemParams::gamma_refl);
    plain("phi_s", &SystemParams::phi_s);
    plain("theta", &SystemParams::theta);
    plain("beta", &SystemParams::beta);
    plain("tau", &SystemParams::tau);
    plain("lambda", &SystemParams::lambda);
    plain("kappa1", &SystemParams::kappa1);
    plain("kappa2", &SystemParams::kappa2);
    plain("kappa3", &SystemParams::kappa3);
    plain("gamma_th_p", &SystemParams::gamma_th_p);
    t["gamma_th_p_db"] = [](RunConfig& c, const json& v) {
      c.system.gamma_th_p = db_to_linear(as_number(v));
    };
    t["alpha"] = [](RunConfig& c, const json& v) {
      const auto a = as_count(v);
      if (a > 1) throw std::invalid_argument("must be 0 or 1");
      c.system.alpha = static_cast<int>(a);
    };

    auto chan = [&t](const std::string& key, double ChannelParams::*field) {
      t[key] = [field](RunConfig& c, const json& v) { c.channel.*field = as_number(v); };
    };
    chan("eta", &ChannelParams::eta);
    chan("c0", &ChannelParams::c0);
    chan("d0", &ChannelParams::d0);
    chan("v", &ChannelParams::v);
    chan("dmin", &ChannelParams::dmin);
    chan("dmax", &ChannelParams::dmax);
    t["c0_db"] = [](RunConfig& c, const json& v) { c.channel.c0 = db_to_linear(as_number(v)); };
    t["reciprocal"] = [](RunConfig& c, const json& v) {
      if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
      c.channel.reciprocal = v.get<bool>();
    };

    t["strategy"] = [](RunConfig& c, const json& v) {
      c.strategy = parse_strategy_entry(as_string(v));
      c.system.alpha = c.strategy.alpha;
    };
    t["seed"] = [](RunConfig& c, const json& v) { c.seed = as_count(v); };
    t["out"] = [](RunConfig& c, const json& v) { c.out = as_string(v); };
    t["trials"] = [](RunConfig& c, const json& v) { c.trials = as_count(v); };
    t["threads"] = [](RunConfig& c, const json& v) { c.threads = static_cast<int>(as_count(v)); };
    t["scenarios"] = [](RunConfig& c, const json& v) { c.scenarios = as_count(v); };
    t["delta"] = [](RunConfig& c, const json& v) { c.solve.delta = as_number(v); };
    t["max_iter"] = [](RunConfig& c, const json& v) {
      c.solve.max_iter = static_cast<int>(as_count(v));
    };
    t["grid_m_points"] = [](RunConfig& c, const json& v) { c.grid.m_points = as_count(v); };
    t["grid_phase_points"] = [](RunConfig& c, const json& v) {
      c.grid.phase_points = as_count(v);
    };
    t["grid_refine_levels"] = [](RunConfig& c, const json& v) {
      c.grid.refine_levels = as_count(v);
    };
    t["grid_refine_points"] = [](RunConfig& c, const json& v) {
      c.grid.refine_points = as_count(v);
    };

    t["name"] = [](RunConfig& c, const json& v) { c.sweep_name = as_string(v); };
    t["sweep_parameter"] = [](RunConfig& c, const json& v) {
      c.sweep_parameter = parse_sweep_parameter(as_string(v));
    };
    t["sweep_values"] = [](RunConfig& c, const json& v) {
      if (!v.is_array()) throw std::invalid_argument("expected an array of numbers");
      c.sweep_values.clear();
      for (const auto& x : v) c.sweep_values.push_back(as_number(x));
    };
    t["strategies"] = [](RunConfig& c, const json& v) {
      if (!v.is_array()) throw std::invalid_argument("expected an array of strings");
      c.sweep_strategies.clear();
      for (const auto& x : v) c.sweep_strategies.push_back(parse_strategy_entry(as_string(x)));
    };
    t["power_ratio"] = [](RunConfig& c, const json& v) {
      const std::string s = as_string(v);
      if (s == "DAR") {
        c.ratio = PowerRatio::DAR;
      } else if (s == "DER") {
        c.ratio = PowerRatio::DER;
      } else {
        throw std::invalid_argument("must be DAR or DER");
      }
    };
    return t;
  }();
  return table;
}

void check_settings(const RunConfig& c, std::vector<std::string>& problems) {
  auto guard = [&problems](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      problems.push_back(std::string(what) + ": " + e.what());
    }
  };
  guard("system", [&] { c.system.validate(); });
  guard("channel", [&] { c.channel.validate(); });
  guard("grid", [&] { c.grid.validate(); });
  if (c.trials < 1) problems.push_back("trials: must be >= 1");
  if (c.scenarios < 1) problems.push_back("scenarios: must be >= 1");
  if (!(c.solve.delta > 0.0)) problems.push_back("delta: must be > 0");
  if (c.solve.max_iter < 1) problems.push_back("max_iter: must be >= 1");
}

json solution_json(const Solution& s) {
  return {{"feasible", s.feasible},
          {"m_star", s.m_star},
          {"n_star", s.n_star},
          {"phi_a_star", s.phi_a_star},
          {"phi1", s.phi1},
          {"cos_phi_a_plus_phi1", s.cos_term},
          {"gamma_p", s.gamma_p},
          {"gamma_a", s.gamma_a},
          {"gamma_e", s.gamma_e},
          {"r_s", s.r_s},
          {"iterations", s.iterations},
          {"case", to_string(s.case_label)},
          {"objective_trace", s.objective_trace}};
}

// Files are staged next to their targets and renamed only once every one of
// them has been written; anything staged or renamed is removed on failure.
class OutputSet {
public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : files_) {
      fs::remove(tmp, ec);
      if (renamed_) fs::remove(final_path, ec);
    }
  }

  void add(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path final_path = fs::path(dir_) / name;
    const fs::path tmp = fs::path(final_path.string() + ".partial");
    files_.emplace_back(tmp, final_path);
    std::ofstream f(tmp, std::ios::binary);
    f << content;
    f.close();
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
  }

  std::vector<std::string> commit() {
    renamed_ = true;
    std::vector<std::string> written;
    for (const auto& [tmp, final_path] : files_) {
      fs::rename(tmp, final_path);
      written.push_back(final_path.string());
    }
    committed_ = true;
    return written;
  }

private:
  std::string dir_;
  std::vector<std::pair<fs::path, fs::path>> files_;
  bool renamed_ = false;
  bool committed_ = false;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string out_dir(const RunConfig& c) { return c.out.empty() ? "." : c.out; }

void apply_threads(const RunConfig& c) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#else
  (void)c;
#endif
}

void write_sweep(OutputSet& files, const SweepSpec& spec, const SweepResult& res,
                 const json& config, json extra = json::object()) {
  std::ostringstream csv;
  write_csv(csv, res.rows, spec.master_seed);
  json meta = {{"spec", to_json(spec)}, {"config", config}};
  std::vector<double> se;
  for (const auto& r : res.rows) se.push_back(r.se_r_s);
  meta["se_r_s"] = se;
  for (auto& [k, v] : extra.items()) meta[k] = v;
  files.add(spec.name + ".csv", csv.str());
  files.add(spec.name + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config:\n" + join(problems)), problems_(std::move(problems)) {}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});
  RunConfig c;
  std::vector<std::string> problems;
  for (const char* base : {"p_a", "p_e", "sigma2_a", "sigma2_p", "sigma2_e"}) {
    if (j.contains(base) && j.contains(std::string(base) + "_dbm")) {
      problems.push_back(std::string(base) + ": given both in watts and in dBm");
    }
  }
  if (j.contains("c0") && j.contains("c0_db")) problems.push_back("c0: given both linear and in dB");
  if (j.contains("gamma_th_p") && j.contains("gamma_th_p_db")) {
    problems.push_back("gamma_th_p: given both linear and in dB");
  }
  // `strategy` carries an antenna mode and is applied before `alpha` so an
  // explicit alpha still wins.
  std::vector<std::pair<std::string, const json*>> items;
  for (const auto& [key, value] : j.items()) items.emplace_back(key, &value);
  std::stable_partition(items.begin(), items.end(),
                        [](const auto& kv) { return kv.first == "strategy"; });
  for (const auto& [key, value] : items) {
    const auto it = setters().find(key);
    if (it == setters().end()) {
      problems.push_back(key + ": unknown key");
      continue;
    }
    try {
      it->second(c, *value);
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  }
  if (j.contains("alpha")) c.strategy.alpha = c.system.alpha;
  check_settings(c, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError({"cannot open config file '" + path + "'"});
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("parse error: ") + e.what()});
  }
  return parse_config(j);
}

json resolved_json(const RunConfig& c) {
  json j = to_json(c.system);
  j.update(to_json(c.channel));
  j["strategy"] = c.strategy.label();
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["trials"] = c.trials;
  j["scenarios"] = c.scenarios;
  j["delta"] = c.solve.delta;
  j["max_iter"] = c.solve.max_iter;
  j["grid_m_points"] = c.grid.m_points;
  j["grid_phase_points"] = c.grid.phase_points;
  j["grid_refine_levels"] = c.grid.refine_levels;
  j["grid_refine_points"] = c.grid.refine_points;
  return j;
}

int cmd_solve(const RunConfig& c, std::ostream& out) {
  if (!c.seed) throw ConfigError({"seed: solve needs an explicit seed (--seed or config)"});
  Rng rng = trial_rng(*c.seed, 0);
  const ChannelSet ch = sample_channel_set(c.channel, rng);
  SystemParams p = c.system;
  p.alpha = c.strategy.alpha;
  const Solution s = solve(ch, p, c.strategy.strategy, c.solve);

  out << "strategy         " << c.strategy.label() << "\n"
      << "seed             " << *c.seed << "\n"
      << "feasible         " << (s.feasible ? "true" : "false") << "\n"
      << "case             " << to_string(s.case_label) << "\n"
      << "m*               " << fmt(s.m_star) << "\n"
      << "n*               " << fmt(s.n_star) << "\n"
      << "phi_a*           " << fmt(s.phi_a_star) << "\n"
      << "phi1             " << fmt(s.phi1) << "\n"
      << "cos(phi_a+phi1)  " << fmt(s.cos_term) << "\n"
      << "gamma_P          " << fmt(s.gamma_p) << "\n"
      << "gamma_A          " << fmt(s.gamma_a) << "\n"
      << "gamma_E          " << fmt(s.gamma_e) << "\n"
      << "r_s              " << fmt(s.r_s) << " bits/s/Hz\n"
      << "iterations       " << s.iterations << "\n";
  for (std::size_t i = 0; i < s.objective_trace.size(); ++i) {
    out << "  iter " << i + 1 << "  r_s " << fmt(s.objective_trace[i]) << "\n";
  }

  json record = solution_json(s);
  record["config"] = resolved_json(c);
  if (!c.out.empty()) {
    OutputSet files(c.out);
    files.add("solve.json", record.dump(2) + "\n");
    for (const auto& f : files.commit()) out << "wrote " << f << "\n";
  }
  out << record.dump() << "\n";
  return kOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  std::vector<std::string> problems;
  if (!c.sweep_parameter) problems.push_back("sweep_parameter: required for sweep");
  if (c.sweep_values.empty()) problems.push_back("sweep_values: required for sweep");
  if (!problems.empty()) throw ConfigError(std::move(problems));

  SweepSpec spec;
  spec.name = c.sweep_name;
  spec.parameter = *c.sweep_parameter;
  spec.values = c.sweep_values;
  spec.strategies = c.sweep_strategies.empty() ? std::vector<StrategyEntry>{c.strategy}
                                               : c.sweep_strategies;
  spec.trials = c.trials;
  spec.master_seed = c.seed.value_or(1);
  spec.base = c.system;
  spec.channel = c.channel;
  spec.solve = c.solve;
  spec.ratio = c.ratio;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError({e.what()});
  }

  apply_threads(c);
  const SweepResult res = run_sweep_detailed(spec);
  OutputSet files(out_dir(c));
  write_sweep(files, spec, res, resolved_json(c));
  for (const auto& f : files.commit()) out << "wrote " << f << "\n";
  return kOk;
}

int cmd_figures(const RunConfig& c, std::string_view name, std::ostream& out) {
  std::vector<SweepSpec> specs;
  try {
    specs = figure_preset(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError({e.what()});
  }
  apply_threads(c);
  OutputSet files(out_dir(c));
  for (SweepSpec& spec : specs) {
    spec.base = c.system;
    spec.channel = c.channel;
    spec.trials = c.trials;
    spec.master_seed = c.seed.value_or(1);
    spec.solve = c.solve;
    const SweepResult res = run_sweep_detailed(spec);
    json extra = json::object();
    if (spec.parameter == SweepParameter::PhiAFixed) {
      json dev = json::object();
      for (const auto& e : spec.strategies) {
        const double d = periodicity_deviation(res.rows, e.label());
        dev[e.label()] = d;
        out << spec.name << " " << e.label() << " max|T(phi)-T(phi+pi)| = " << fmt(d) << "\n";
      }
      extra["periodicity_deviation"] = dev;
    }
    write_sweep(files, spec, res, resolved_json(c), extra);
  }
  for (const auto& f : files.commit()) out << "wrote " << f << "\n";
  return kOk;
}

int cmd_oracle(const RunConfig& c, std::ostream& out) {
  apply_threads(c);
  const std::uint64_t seed = c.seed.value_or(1);
  SystemParams p = c.system;
  p.alpha = c.strategy.alpha;
  double max_diff = 0.0, sum_diff = 0.0;
  std::size_t feas_mismatch = 0, analytic_feasible = 0, oracle_feasible = 0;
  std::vector<std::uint64_t> offending;
  for (std::size_t i = 0; i < c.scenarios; ++i) {
    Rng rng = trial_rng(seed, i);
    const ChannelSet ch = sample_channel_set(c.channel, rng);
    const Solution a = solve(ch, p, c.strategy.strategy, c.solve);
    const Solution g = oracle::grid_search(ch, p, c.strategy.strategy, c.grid);
    analytic_feasible += a.feasible;
    oracle_feasible += g.feasible;
    if (a.feasible != g.feasible) ++feas_mismatch;
    const double d = std::abs(a.r_s - g.r_s);
    max_diff = std::max(max_diff, d);
    sum_diff += d;
    if (d > 1e-3 || a.feasible != g.feasible) offending.push_back(i);
  }
  const double mean_diff = sum_diff / static_cast<double>(c.scenarios);
  out << "scenarios              " << c.scenarios << " (seed " << seed << ")\n"
      << "strategy               " << c.strategy.label() << "\n"
      << "grid                   " << c.grid.m_points << " x " << c.grid.phase_points
      << ", refine " << c.grid.refine_levels << "\n"
      << "feasible analytic      " << analytic_feasible << "\n"
      << "feasible oracle        " << oracle_feasible << "\n"
      << "feasibility mismatches " << feas_mismatch << "\n"
      << "max |dr_s|             " << fmt(max_diff) << "\n"
      << "mean |dr_s|            " << fmt(mean_diff) << "\n"
      << "above 1e-3             " << offending.size() << "\n";
  if (!offending.empty()) {
    out << "offending scenarios    ";
    for (auto i : offending) out << " " << i;
    out << "\n";
  }
  if (!c.out.empty()) {
    json rep = {{"scenarios", c.scenarios},       {"seed", seed},
                {"feasible_analytic", analytic_feasible},
                {"feasible_oracle", oracle_feasible},
                {"max_abs_diff", max_diff},       {"mean_abs_diff", mean_diff},
                {"feasibility_mismatches", feas_mismatch},
                {"disagreements", offending.size()}, {"offending_scenarios", offending},
                {"config", resolved_json(c)}};
    OutputSet files(c.out);
    files.add("oracle.json", rep.dump(2) + "\n");
    for (const auto& f : files.commit()) out << "wrote " << f << "\n";
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secrecy-rate optimizer and Monte Carlo sweeps for full-duplex backscatter links"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  std::optional<std::size_t> trials, scenarios;
  std::optional<int> threads;
  std::string figure;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_path, "output directory");
    sub->add_option("--trials", trials, "Monte Carlo trials");
    sub->add_option("--threads", threads, "OpenMP threads");
  };
  CLI::App* solve_cmd = app.add_subcommand("solve", "optimize one seeded scenario");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "custom sweep from config");
  CLI::App* fig_cmd = app.add_subcommand("figures", "run a figure preset");
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "audit the optimizer against grid search");
  for (CLI::App* sub : {solve_cmd, sweep_cmd, fig_cmd, oracle_cmd}) common(sub);
  fig_cmd->add_option("name", figure, "preset name")->required();
  oracle_cmd->add_option("--scenarios", scenarios, "number of scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << e.what() << "\n";
    return kConfigError;
  }

  try {
    RunConfig c = config_path.empty() ? parse_config(json::object()) : load_config_file(config_path);
    if (seed) c.seed = *seed;
    if (out_path) c.out = *out_path;
    if (trials) c.trials = *trials;
    if (threads) c.threads = *threads;
    if (scenarios) c.scenarios = *scenarios;
    std::vector<std::string> problems;
    check_settings(c, problems);
    if (!problems.empty()) throw ConfigError(std::move(problems));

    if (solve_cmd->parsed()) return cmd_solve(c, out);
    if (sweep_cmd->parsed()) return cmd_sweep(c, out);
    if (fig_cmd->parsed()) return cmd_figures(c, figure, out);
    return cmd_oracle(c, out);
  } catch (const ConfigError& e) {
    err << e.what();
    return kConfigError;
  } catch (const ModelViolation& e) {
    err << "model violation: " << e.what() << "\n";
    return kModelViolation;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fdsr::cli
