#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fracfield/asymptotics.hpp"
#include "fracfield/foundations.hpp"

namespace fracfield {

// Flat key = value configuration (a TOML subset: numbers, quoted strings,
// one-level arrays of numbers, booleans, '#' comments).
class SuiteConfig {
 public:
  std::string suite;
  bool coarse = false;

  static SuiteConfig parse(const std::string& text, const std::string& origin = "<string>");
  static SuiteConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  // A numeric ladder; coarse mode keeps the leading two thirds (at least 3).
  std::vector<double> ladder(const std::string& key) const;
  // A tolerance; coarse mode widens it three times.
  double tolerance(const std::string& key) const;
  void set(const std::string& key, const std::string& raw);

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::string> values_;
  std::string origin_;
};

struct Criterion {
  std::string id;
  std::string description;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct ResultRow {
  std::string quantity;
  double s = 0.0;
  double param = 0.0;
  double eps = 0.0;
  double value = 0.0;
};

struct FitRecord {
  std::string name;
  SweepResult fit;
};

struct VerdictReport {
  std::string suite;
  bool coarse = false;
  std::vector<Criterion> criteria;
  std::vector<ResultRow> rows;
  std::vector<FitRecord> fits;
  std::map<std::string, std::string> fingerprint;
  double wall_clock = 0.0;

  int failed() const;
};

// A module error raised while evaluating a criterion, tagged with its id.
class SuiteFailure : public Error {
 public:
  SuiteFailure(const std::string& criterion_id, const std::string& what)
      : Error(criterion_id + ": " + what), criterion(criterion_id) {}
  std::string criterion;
};

struct SuiteInfo {
  std::string name;
  std::string anchor;     // the mathematical statement the suite exercises
  std::string criterion;  // acceptance id(s)
};

const std::vector<SuiteInfo>& list_suites();

VerdictReport run_suite(const SuiteConfig& config);

// Writes results.csv, fit.json and verdict.json under
// <outdir>/<suite>/<timestamp>/ and returns that directory.
std::filesystem::path write_artifacts(const VerdictReport& report, const std::filesystem::path& outdir);

std::string results_csv(const VerdictReport& report);

}  // namespace fracfield
