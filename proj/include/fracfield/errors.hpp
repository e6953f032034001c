#pragma once

#include <stdexcept>
#include <string>

namespace fracfield {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double best, double err)
      : Error(what), best_estimate(best), error_bound(err) {}
  double best_estimate;
  double error_bound;
};

class MonotonicityLoss : public Error {
 public:
  using Error::Error;
};

class RegularityViolation : public Error {
 public:
  using Error::Error;
};

class OnBoundary : public Error {
 public:
  using Error::Error;
};

class MedialSet : public Error {
 public:
  using Error::Error;
};

class InvalidEta : public Error {
 public:
  using Error::Error;
};

class SignViolation : public Error {
 public:
  using Error::Error;
};

class DivergenceDetected : public Error {
 public:
  DivergenceDetected(const std::string& what, double last_partial, double growth_ratio)
      : Error(what), partial(last_partial), ratio(growth_ratio) {}
  double partial;
  double ratio;
};

class UnsupportedGeometry : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fracfield
