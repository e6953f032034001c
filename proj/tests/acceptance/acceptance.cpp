// Runs every suite configuration and prints one verdict line per acceptance
// criterion. Exit status is the number of failed criteria.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fracfield/suites.hpp"

using namespace fracfield;
namespace fs = std::filesystem;

namespace {

struct Run {
  std::string config;    // file stem under the config directory
  std::string criterion;  // acceptance id the run feeds
};

struct Outcome {
  bool pass = true;
  double seconds = 0.0;
  std::vector<std::string> details;
};

const std::vector<Run> kRuns = {
    {"constants", "AC-1"},          {"halfspace-identity", "AC-2"},    {"profile", "AC-3"},
    {"potential-limit", "AC-4"},    {"exact-identities", "AC-5"},      {"n-exponents", "AC-6"},
    {"fermi-expansion", "AC-7"},    {"willmore-vanishing", "AC-8"},    {"gamma-limsup-d1-s06", "AC-9"},
    {"gamma-limsup-d1-s05", "AC-9"}, {"gamma-limsup-d1-s03", "AC-10"}, {"perimeters", "AC-11"},
};

// Wall-clock budgets in seconds, per criterion.
const std::map<std::string, double> kBudget = {
    {"AC-1", 1.0},    {"AC-2", 10.0},   {"AC-3", 120.0}, {"AC-4", 60.0},  {"AC-5", 60.0},  {"AC-6", 600.0},
    {"AC-7", 1800.0}, {"AC-8", 300.0}, {"AC-9", 900.0}, {"AC-10", 900.0}, {"AC-11", 600.0},
};

std::string family(const std::string& id) { return id.substr(0, id.find('.')); }

}  // namespace

int main() {
  setenv("FRACFIELD_CACHE", FRACFIELD_TEST_CACHE, 0);
  const fs::path configs = FRACFIELD_CONFIG_DIR;
  const fs::path results = FRACFIELD_RESULTS_DIR;

  std::map<std::string, Outcome> outcomes;
  for (const auto& run : kRuns) {
    Outcome& o = outcomes[run.criterion];
    try {
      const SuiteConfig cfg = SuiteConfig::load(configs / (run.config + ".toml"));
      const VerdictReport rep = run_suite(cfg);
      write_artifacts(rep, results);
      o.seconds += rep.wall_clock;
      for (const auto& c : rep.criteria) {
        if (family(c.id) != run.criterion) {
          o.pass = false;
          o.details.push_back(c.id + " reported by the wrong suite");
          continue;
        }
        o.pass = o.pass && c.pass;
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %s (%.4g vs %.4g +- %.3g)", c.id.c_str(), c.pass ? "ok" : "FAIL", c.measured,
                      c.expected, c.tolerance);
        o.details.emplace_back(buf);
      }
      std::fprintf(stderr, "[%s] %s done in %.1f s\n", run.criterion.c_str(), run.config.c_str(), rep.wall_clock);
    } catch (const SuiteFailure& e) {
      o.pass = false;
      o.details.push_back(std::string("error: ") + e.what());
    } catch (const Error& e) {
      o.pass = false;
      o.details.push_back(run.config + ": " + e.what());
    }
  }

  int failed = 0;
  for (int k = 1; k <= 11; ++k) {
    const std::string id = "AC-" + std::to_string(k);
    Outcome& o = outcomes[id];
    if (o.details.empty()) {
      o.pass = false;
      o.details.push_back("no criteria reported");
    }
    const double budget = kBudget.at(id);
    if (o.seconds > budget) {
      o.pass = false;
      char buf[96];
      std::snprintf(buf, sizeof buf, "runtime %.1f s over the %.0f s budget", o.seconds, budget);
      o.details.emplace_back(buf);
    }
    if (!o.pass) ++failed;
    std::printf("%-6s %s  [%.1f s]", id.c_str(), o.pass ? "PASS" : "FAIL", o.seconds);
    for (const auto& d : o.details) std::printf("  %s;", d.c_str());
    std::printf("\n");
  }
  std::printf("%d of 11 criteria failed\n", failed);
  return failed;
}
