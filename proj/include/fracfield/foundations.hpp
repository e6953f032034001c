#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracfield/errors.hpp"

namespace fracfield {

// ---------------------------------------------------------------------------
// Fractional order
// ---------------------------------------------------------------------------

enum class Regime { Sub, Half, Mid, ThreeQuarter, Super };

const char* regime_name(Regime r);

// The order s is stored as an exact rational num/den so that the critical
// values 1/2 and 3/4 are recognised without comparing floating-point numbers.
class FracOrder {
 public:
  FracOrder(std::int64_t num, std::int64_t den);
  // Doubles are converted through their shortest round-trip decimal form,
  // so 0.5 becomes 1/2 and 0.6 becomes 3/5.
  FracOrder(double s);  // NOLINT(google-explicit-constructor)

  static FracOrder parse(const std::string& text);

  double value() const { return s_; }
  operator double() const { return s_; }  // NOLINT(google-explicit-constructor)
  Regime regime() const { return regime_; }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  std::string str() const;

 private:
  void init(std::int64_t num, std::int64_t den);
  std::int64_t num_ = 1;
  std::int64_t den_ = 2;
  double s_ = 0.5;
  Regime regime_ = Regime::Half;
};

// ---------------------------------------------------------------------------
// Constants and scalings
// ---------------------------------------------------------------------------

// Gamma function, Lanczos approximation (g = 7, nine coefficients) with
// reflection below 1/2.
double lanczos_gamma(double x);

double gamma_ds(int d, const FracOrder& s);

struct ScalePair {
  double alpha;
  double beta;
};

ScalePair scalings(const FracOrder& s, double eps);

// ---------------------------------------------------------------------------
// Double-well potential
// ---------------------------------------------------------------------------

struct PotentialSpec {
  enum class Kind { Quartic, CustomPolynomial };
  Kind kind = Kind::Quartic;
  std::vector<double> coeffs;  // W(u) = sum_k coeffs[k] u^k
  double lambda = 8.0;         // W''(1)

  static PotentialSpec quartic();
  // Validates evenness, nonnegativity, wells at +-1 and W''(1) > 0.
  static PotentialSpec custom(std::vector<double> coeffs);
  PotentialSpec scaled(double factor) const;
  std::string str() const;
};

double potential(const PotentialSpec& spec, double u, int order);

double sigma_w(const PotentialSpec& spec);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int max_subdivisions = 4000;
  double pv_cutoff = 1e-14;   // smallest subinterval width the engine will create
  double tail_cutoff = 1e3;   // switch to analytic tails in field integrals

  void validate() const;
  QuadratureSpec coarsened(double factor) const;
};

enum class PointKind {
  Algebraic,  // |t - at|^exponent behaviour, tanh-sinh substitution
  Log,        // log|t - at| behaviour, tanh-sinh substitution
  Kink        // integrand is continuous but not smooth; split only
};

struct SingularPoint {
  double at;
  PointKind kind = PointKind::Algebraic;
  double exponent = 0.0;
};

SingularPoint kink(double at);
SingularPoint algebraic(double at, double exponent);
SingularPoint logarithmic(double at);

struct QuadResult {
  double value = 0.0;
  double err_est = 0.0;
  long evaluations = 0;
};

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod (7/15) with a global error budget. Hinted
// singular points get a tanh-sinh change of variables, semi-infinite ends
// the substitution t = 1/u. Throws NonConvergence when the subdivision
// budget runs out before the tolerance is met.
QuadResult integrate(const Integrand& f, double a, double b,
                     const std::vector<SingularPoint>& points = {},
                     const QuadratureSpec& spec = {});

// Convenience wrapper that returns only the value.
double quad(const Integrand& f, double a, double b,
            const std::vector<SingularPoint>& points = {},
            const QuadratureSpec& spec = {});

// Deterministic map over indices. Results land in slot i regardless of the
// number of workers, so reductions done afterwards are order-stable.
std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& fn,
                                 unsigned workers = 0);

}  // namespace fracfield
