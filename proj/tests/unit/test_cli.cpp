#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fracfield/suites.hpp"

using namespace fracfield;
namespace fs = std::filesystem;

namespace {

SuiteConfig config_for(const std::string& name) {
  return SuiteConfig::load(fs::path(FRACFIELD_CONFIG_DIR) / (name + ".toml"));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FRACFIELD_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("fracfield_cli_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const SuiteConfig c = SuiteConfig::parse(
      "# comment\nsuite = \"constants\"\nx = 1.5e-3  # trailing\nname = \"a # b\"\nlist = [1, 2, 3.5]\nflag = true\n");
  CHECK(c.suite == "constants");
  CHECK(c.number("x") == 1.5e-3);
  CHECK(c.text("name") == "a # b");
  CHECK(c.numbers("list") == std::vector<double>{1.0, 2.0, 3.5});
  CHECK(c.has("flag"));
  CHECK_FALSE(c.has("missing"));
  CHECK_THROWS_AS(c.number("missing"), ConfigError);
  CHECK_THROWS_AS(c.number("name"), ConfigError);
  CHECK_THROWS_AS(SuiteConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(SuiteConfig::parse("[table]\n"), ConfigError);
  CHECK_THROWS_AS(SuiteConfig::parse("novalue\n"), ConfigError);
  CHECK_THROWS_AS(SuiteConfig::load("/nonexistent/fracfield.toml"), ConfigError);
}

TEST_CASE("coarse mode shortens ladders and widens tolerances") {
  SuiteConfig c = SuiteConfig::parse("ladder = [1, 2, 3, 4, 5, 6]\ntol = 0.01\n");
  CHECK(c.ladder("ladder").size() == 6);
  CHECK(c.tolerance("tol") == 0.01);
  c.coarse = true;
  CHECK(c.ladder("ladder") == std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(c.tolerance("tol") == doctest::Approx(0.03));
  SuiteConfig short_ladder = SuiteConfig::parse("ladder = [1, 2, 3]\n");
  short_ladder.coarse = true;
  CHECK(short_ladder.ladder("ladder").size() == 3);
}

TEST_CASE("suite catalogue") {
  const auto& suites = list_suites();
  CHECK(suites.size() >= 10);
  bool fermi = false, limsup = false;
  for (const auto& s : suites) {
    CHECK_FALSE(s.anchor.empty());
    CHECK_FALSE(s.criterion.empty());
    if (s.name == "fermi-expansion") fermi = s.anchor.find("Theorem") != std::string::npos;
    if (s.name == "gamma-limsup-d1") limsup = s.anchor.find("Theorem") != std::string::npos;
  }
  CHECK(fermi);
  CHECK(limsup);
  // Stable ordering between calls.
  CHECK(list_suites().front().name == suites.front().name);
}

TEST_CASE("unknown suites are configuration errors") {
  SuiteConfig c;
  c.suite = "no-such-suite";
  try {
    run_suite(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("constants") != std::string::npos);
  }
}

TEST_CASE("constants suite passes and writes its artifacts") {
  const VerdictReport rep = run_suite(config_for("constants"));
  CHECK(rep.failed() == 0);
  CHECK(rep.criteria.size() >= 3);
  CHECK(rep.fingerprint.count("compiler") == 1);
  const fs::path out = scratch("artifacts");
  const fs::path dir = write_artifacts(rep, out);
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "fit.json"));
  const auto verdict = nlohmann::json::parse(slurp(dir / "verdict.json"));
  CHECK(verdict["suite"] == "constants");
  CHECK(verdict["verdict"] == "PASS");
  CHECK(verdict["failed"] == 0);
  CHECK(verdict["criteria"].size() == rep.criteria.size());
  CHECK(slurp(dir / "results.csv") == results_csv(rep));
  // A second write in the same second lands in a fresh directory.
  CHECK(write_artifacts(rep, out) != dir);
  fs::remove_all(out);
}

TEST_CASE("results are reproducible and suites share no state") {
  const SuiteConfig a = config_for("halfspace-identity");
  const SuiteConfig b = config_for("perimeters");
  const std::string first = results_csv(run_suite(a));
  const std::string other = results_csv(run_suite(b));
  CHECK(results_csv(run_suite(a)) == first);
  CHECK(results_csv(run_suite(b)) == other);
  CHECK(first.rfind("quantity,s,param,eps,value\n", 0) == 0);
}

TEST_CASE("coarse verdicts are marked") {
  SuiteConfig c = config_for("constants");
  c.coarse = true;
  const VerdictReport rep = run_suite(c);
  const fs::path out = scratch("coarse");
  const auto verdict = nlohmann::json::parse(slurp(write_artifacts(rep, out) / "verdict.json"));
  CHECK(verdict["coarse"] == true);
  CHECK(verdict["verdict"] == "PASS (coarse)");
  fs::remove_all(out);
}

TEST_CASE("command line exit codes") {
  const fs::path out = scratch("binary");
  const std::string cfg = std::string(FRACFIELD_CONFIG_DIR) + "/";
  CHECK(run_cli("list") == 0);
  CHECK(run_cli("run constants --config \"" + cfg + "constants.toml\" --outdir \"" + out.string() + "\"") == 0);
  CHECK(fs::exists(out / "constants"));
  // config written for another suite
  CHECK(run_cli("run constants --config \"" + cfg + "perimeters.toml\" --outdir \"" + out.string() + "\"") == 64);
  CHECK(run_cli("run no-such-suite --outdir \"" + out.string() + "\"") == 64);
  CHECK(run_cli("run constants --config /nonexistent.toml") == 64);
  CHECK(run_cli("solve-profile --s 1.5") == 70);
  CHECK(run_cli("bogus") != 0);
  fs::remove_all(out);
}
