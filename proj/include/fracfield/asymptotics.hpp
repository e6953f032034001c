#pragma once

#include <optional>
#include <vector>

#include "fracfield/fraclap.hpp"

namespace fracfield {

// Half-width l = delta / Lambda of the window in which the Fermi expansion
// keeps the curvature term; evaluation points live in Sigma_{delta/(10 Lambda)}.
struct ExpansionWindow {
  double Lambda = 10.0;
  double delta = 0.2;
  double Lambda0 = 10.0;

  double ell() const { return delta / Lambda; }
  double collar() const { return delta / (10.0 * Lambda); }
  void validate(double delta0) const;
};

struct SweepResult {
  std::vector<double> eps;
  std::vector<double> values;
  double extrapolated = 0.0;
  double rate = 0.0;       // exponent p (power law) or 0 for the log model
  double coefficient = 0.0;
  double residual = 0.0;   // rms misfit relative to max |v|
};

class PoorFit : public Error {
 public:
  PoorFit(const std::string& what, SweepResult r) : Error(what), result(std::move(r)) {}
  SweepResult result;
};

enum class FitModel { PowerLaw, Log };

// Least squares fit of v = L + C eps^p (p free unless fixed_rate is given) or
// v = L + C / |log eps|. Throws PoorFit when the relative residual exceeds
// max_residual; the exception carries the full result.
SweepResult extrapolate(const std::vector<double>& eps, const std::vector<double>& values, FitModel model,
                        std::optional<double> fixed_rate = std::nullopt, double max_residual = 0.1);

// Fitted slope of log v against log eps (v assumed to vanish as eps -> 0).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Curvature contribution of the Fermi expansion at z0: the power kernel for
// s > 1/2, the logarithmic kernel at s = 1/2, zero below.
double curvature_kernel_term(const FracOrder& s, const Profile& p, double eps, double z0, const ExpansionWindow& w,
                             double H, const QuadratureSpec& spec = {});

struct RemainderParts {
  double full;        // (-Delta)^s u at x0
  double one_d;       // (-d_zz)^s w_eps(z0)
  double curvature;   // curvature_kernel_term
  double remainder;   // full - one_d - curvature
};

RemainderParts fermi_remainder(const FieldSpec& f, const Point& x0, const ExpansionWindow& w,
                               const QuadratureSpec& spec = {});

struct IdentitySides {
  double lhs;
  double rhs;
};

IdentitySides formula_eta_identity(const Profile& p, double z0, double ell, double eps, const QuadratureSpec& spec = {});

enum class LogVariant { Moment2, General };

// Moment2: int_{B_delta} |y_1|^2 (1+|y|^2)^{-(d+1)/2} dy over R^{d-1}.
// General: int_{B_delta} |y|^{2+alpha} (1+|y|^2)^{-(d+1+alpha)/2} dy.
double log_expansion_integral(int d, double delta, LogVariant variant, double alpha = 1.0,
                              const QuadratureSpec& spec = {});

// Q = int_{-l}^{l} ( int_{-delta}^{delta} w_eps'(z0+z) k(z) dz )^2 dz0 with
// k(z) = |z|^{1-2s}, or log|z| at s = 1/2.
double willmore_limit_quantity(const FracOrder& s, const Profile& p, double eps, double ell, double delta,
                               const QuadratureSpec& spec = {});

double potential_limit_ratio(const FracOrder& s, const Profile& p, double eps, double z);

// int_0^l int_0^l |w_eps(t) - w_eps(z)|^2 |t - z|^{-1-2s} dt dz
double claim5_double_integral(const FracOrder& s, const Profile& p, double eps, double ell,
                              const QuadratureSpec& spec = {});

}  // namespace fracfield
