#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "fracfield/profile.hpp"
#include "fracfield/suites.hpp"

using namespace fracfield;

namespace {

int cmd_solve_profile(double s, double Z, double h, double tol, const std::string& output) {
  const Profile p = cached_profile(FracOrder(s), PotentialSpec::quartic(), ProfileGrid{Z, h}, tol);
  const ProfileDiagnostics d = verify_profile(p);
  std::printf("s = %s  Z = %g  h = %g  nodes = %zu\n", p.s.str().c_str(), p.Z, p.h, p.nodes());
  std::printf("residual_sup = %.3e  tail_coeff = %.10g\n", p.residual_sup, p.tail_coeff);
  std::printf("decay_constant = %.6g  tail_match = %.4g\n", d.decay_constant, d.tail_match);
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw ConfigError("cannot write " + output);
    out << serialize_profile(p);
    std::printf("written to %s\n", output.c_str());
  }
  return 0;
}

int cmd_run(const std::string& suite, const std::string& config_path, bool coarse, const std::string& outdir) {
  SuiteConfig cfg = config_path.empty() ? SuiteConfig{} : SuiteConfig::load(config_path);
  if (!cfg.suite.empty() && cfg.suite != suite)
    throw ConfigError("config " + config_path + " is for suite '" + cfg.suite + "', not '" + suite + "'");
  cfg.suite = suite;
  cfg.coarse = coarse;
  const VerdictReport rep = run_suite(cfg);
  std::string dir = outdir;
  if (dir.empty()) dir = cfg.has("output_dir") ? cfg.text("output_dir") : "results";
  const auto where = write_artifacts(rep, dir);
  for (const auto& c : rep.criteria) {
    std::printf("%-22s %s  measured %.6g (expected %.6g, tolerance %.3g)%s%s\n", c.id.c_str(), c.pass ? "PASS" : "FAIL",
                c.measured, c.expected, c.tolerance, c.note.empty() ? "" : "  ", c.note.c_str());
  }
  std::printf("%s: %s%s in %.1f s; artifacts in %s\n", rep.suite.c_str(), rep.failed() == 0 ? "PASS" : "FAIL",
              rep.coarse ? " (coarse)" : "", rep.wall_clock, where.string().c_str());
  return rep.failed();
}

int cmd_list() {
  for (const auto& s : list_suites()) std::printf("%-20s [%s] %s\n", s.name.c_str(), s.criterion.c_str(), s.anchor.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional phase-field verification toolkit"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve-profile", "Solve (or fetch from FRACFIELD_CACHE) the optimal 1D profile");
  solve->set_help_flag("--help", "Print this help message and exit");
  double s = 0.5, Z = ProfileGrid{}.Z, h = ProfileGrid{}.h, tol = 1e-5;
  std::string output;
  solve->add_option("--s", s, "Fractional order in (0,1)")->required();
  solve->add_option("--Z", Z, "Truncation radius");
  solve->add_option("--h", h, "Grid spacing");
  solve->add_option("--tol", tol, "Solver tolerance");
  solve->add_option("--output", output, "Write the serialized profile to this file");

  auto* run = app.add_subcommand("run", "Run a verification suite");
  std::string suite, config, outdir;
  bool coarse = false;
  run->add_option("suite", suite, "Suite name (see 'list')")->required();
  run->add_option("--config", config, "Flat key = value configuration file");
  run->add_flag("--coarse", coarse, "Widen quadrature tolerances 3x and shorten ladders");
  run->add_option("--outdir", outdir, "Override the output directory");

  auto* list = app.add_subcommand("list", "List the available suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve_profile(s, Z, h, tol, output);
    if (run->parsed()) return cmd_run(suite, config, coarse, outdir);
    if (list->parsed()) return cmd_list();
  } catch (const SuiteFailure& e) {
    std::fprintf(stderr, "error in criterion %s\n", e.what());
    return 70;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 64;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 70;
  }
  return 0;
}
