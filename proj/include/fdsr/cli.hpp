#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fdsr/channel.hpp"
#include "fdsr/experiments.hpp"
#include "fdsr/optimizer.hpp"
#include "fdsr/oracle.hpp"
#include "fdsr/snr_terms.hpp"

namespace fdsr::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kModelViolation = 3 };

/// Collected key-level problems of a config file.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

private:
  std::vector<std::string> problems_;
};

struct RunConfig {
  SystemParams system;
  ChannelParams channel;
  StrategyEntry strategy{Strategy::ps_continuous(), 1};
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t trials = 10000;
  int threads = 0;  // 0: OpenMP default
  std::size_t scenarios = 1000;
  SolveOptions solve;
  oracle::GridSpec grid;

  // custom sweep
  std::string sweep_name = "sweep";
  std::optional<SweepParameter> sweep_parameter;
  std::vector<double> sweep_values;
  std::vector<StrategyEntry> sweep_strategies;
  PowerRatio ratio = PowerRatio::DAR;
};

/// Flat JSON object. Unknown keys, wrong types and out-of-range values are
/// all reported together. Powers take watts (`p_a`) or dBm (`p_a_dbm`).
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

/// Every effective setting, as echoed into output metadata.
nlohmann::json resolved_json(const RunConfig& c);

int cmd_solve(const RunConfig& c, std::ostream& out);
int cmd_sweep(const RunConfig& c, std::ostream& out);
int cmd_figures(const RunConfig& c, std::string_view name, std::ostream& out);
int cmd_oracle(const RunConfig& c, std::ostream& out);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdsr::cli
