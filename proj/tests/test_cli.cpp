#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fdsr/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(FDSR_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("fdsr_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& file, const json& j) const {
    const fs::path p = dir / file;
    std::ofstream(p) << j.dump();
    return p.string();
  }
  std::string path(const std::string& p) const { return (dir / p).string(); }
};

json last_json_line(const std::string& out) {
  const auto end = out.find_last_not_of('\n');
  const auto start = out.rfind('\n', end);
  return json::parse(out.substr(start == std::string::npos ? 0 : start + 1));
}

std::string field(const std::string& out, const std::string& key) {
  std::istringstream is(out);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(key + " ", 0) == 0) {
      const auto v = line.find_first_not_of(' ', key.size());
      return line.substr(v);
    }
  }
  return {};
}

}  // namespace

TEST_CASE("solve is deterministic and reports the phase alignment") {
  const Run a = run("solve --seed 4");
  const Run b = run("solve --seed 4");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(field(a.out, "feasible") == "true");
  CHECK(field(a.out, "cos(phi_a+phi1)") == "1");
  const json j = last_json_line(a.out);
  CHECK(j.at("feasible") == true);
  CHECK(j.at("r_s").get<double>() > 0.0);
  CHECK(j.at("config").at("seed") == 4);
}

TEST_CASE("solve without a seed is a config error") {
  CHECK(run("solve").code == 2);
}

TEST_CASE("unreachable threshold is reported infeasible") {
  Scratch s("thr");
  const std::string cfg = s.write("c.json", {{"gamma_th_p", 1e9}});
  const Run r = run("solve --seed 4 --config " + cfg);
  REQUIRE(r.code == 0);
  const json j = last_json_line(r.out);
  CHECK(j.at("feasible") == false);
  CHECK(j.at("r_s") == 0.0);
}

TEST_CASE("config errors exit with code 2") {
  Scratch s("bad");
  CHECK(run("solve --seed 1 --config " + s.write("a.json", {{"bogus", 1}})).code == 2);
  CHECK(run("solve --seed 1 --config " + s.write("b.json", {{"p_a", -1.0}})).code == 2);
  CHECK(run("solve --seed 1 --config " + s.write("c.json", {{"p_a", 1.0}, {"p_a_dbm", 30.0}}))
            .code == 2);
  CHECK(run("solve --seed 1 --config " + s.write("d.json", {{"strategy", "XY+OA"}})).code == 2);
  CHECK(run("solve --seed 1 --config " + s.path("missing.json")).code != 0);
  CHECK(run("figures fig99 --trials 2").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("decibel and watt keys agree") {
  Scratch s("db");
  const Run w = run("solve --seed 4 --config " + s.write("w.json", {{"p_a", 1.0}}));
  const Run d = run("solve --seed 4 --config " + s.write("d.json", {{"p_a_dbm", 30.0}}));
  REQUIRE(w.code == 0);
  REQUIRE(d.code == 0);
  CHECK(last_json_line(w.out).at("r_s").get<double>() ==
        doctest::Approx(last_json_line(d.out).at("r_s").get<double>()).epsilon(1e-12));
}

TEST_CASE("custom sweep writes one row per cell") {
  Scratch s("sweep");
  const json cfg = {{"name", "one"},           {"sweep_parameter", "P_A"},
                    {"sweep_values", {1.0}},   {"strategies", {"PS+OA"}},
                    {"trials", 50},            {"seed", 2}};
  const std::string path = s.write("c.json", cfg);
  REQUIRE(run("sweep --config " + path + " --out " + s.path("a")).code == 0);
  REQUIRE(run("sweep --config " + path + " --out " + s.path("b")).code == 0);
  const std::string csv = slurp(s.path("a/one.csv"));
  CHECK(csv == slurp(s.path("b/one.csv")));
  std::istringstream is(csv);
  std::string header, row, extra;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(row.rfind("1,PS+OA,", 0) == 0);
  CHECK(row.substr(row.size() - 5) == ",50,2");
  CHECK_FALSE(std::getline(is, extra));

  const json meta = json::parse(slurp(s.path("a/one.meta.json")));
  CHECK(meta.at("spec").at("trials") == 50);
  CHECK(meta.at("spec").at("master_seed") == 2);
  CHECK(meta.at("config").at("p_a") == 2.0);
}

TEST_CASE("figures are byte identical across runs and thread counts") {
  Scratch s("fig");
  REQUIRE(run("figures fig3 --trials 40 --seed 5 --out " + s.path("a")).code == 0);
  REQUIRE(run("figures fig3 --trials 40 --seed 5 --threads 2 --out " + s.path("b")).code == 0);
  const std::string a = slurp(s.path("a/fig3.csv"));
  CHECK(a == slurp(s.path("b/fig3.csv")));
  int lines = 0;
  for (char c : a) lines += c == '\n';
  CHECK(lines == 1 + 20 * 4);
  for (const char* label : {",PS+OA,", ",PS+DA,", ",AN+OA,", ",AN+DA,"}) {
    CHECK(a.find(label) != std::string::npos);
  }
}

TEST_CASE("fig7 writes one file per coefficient") {
  Scratch s("fig7");
  REQUIRE(run("figures fig7 --trials 5 --out " + s.path("o")).code == 0);
  for (const char* n : {"fig7_beta", "fig7_tau", "fig7_theta"}) {
    CHECK(fs::exists(s.path(std::string("o/") + n + ".csv")));
  }
}

TEST_CASE("fig8b records the half-turn deviation") {
  Scratch s("fig8b");
  const Run r = run("figures fig8b --trials 20 --out " + s.path("o"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("fig8b PS+OA max|T(phi)-T(phi+pi)| = ") != std::string::npos);
  const json meta = json::parse(slurp(s.path("o/fig8b.meta.json")));
  CHECK(meta.at("periodicity_deviation").at("PS+OA").get<double>() >= 0.0);
}

TEST_CASE("failed runs leave no partial output") {
  Scratch s("partial");
  std::ofstream(s.path("blocker")) << "x";
  const Run r = run("figures fig3 --trials 2 --out " + s.path("blocker/sub"));
  CHECK(r.code != 0);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::recursive_directory_iterator(s.dir)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("oracle audit") {
  Scratch s("oracle");
  const std::string cfg = s.write("c.json", {{"gamma_th_p", 0.0}, {"grid_m_points", 2000},
                                             {"grid_phase_points", 72}});
  const Run a = run("oracle --scenarios 1 --seed 3 --config " + cfg + " --out " + s.path("a"));
  const Run b = run("oracle --scenarios 1 --seed 3 --config " + cfg + " --out " + s.path("b"));
  REQUIRE(a.code == 0);
  CHECK(a.out.find("feasibility mismatches 0") != std::string::npos);
  CHECK(slurp(s.path("a/oracle.json")) == slurp(s.path("b/oracle.json")));
  const json j = json::parse(slurp(s.path("a/oracle.json")));
  CHECK(j.at("feasible_analytic") == 1);
}

TEST_CASE("config parsing in process") {
  const auto c = fdsr::cli::parse_config(json{{"p_e_dbm", 0.0}, {"strategy", "AN+DA"},
                                               {"alpha", 1}, {"c0_db", -20.0}});
  CHECK(c.system.p_e == doctest::Approx(1e-3));
  CHECK(c.channel.c0 == doctest::Approx(0.01));
  CHECK(c.strategy.alpha == 1);
  CHECK(c.strategy.strategy.scheme == fdsr::Scheme::AN);
  try {
    fdsr::cli::parse_config(json{{"x", 1}, {"trials", 0}});
    FAIL("expected ConfigError");
  } catch (const fdsr::cli::ConfigError& e) {
    CHECK(e.problems().size() == 2);
  }
}
