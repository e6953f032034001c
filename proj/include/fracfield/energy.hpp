#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fracfield/asymptotics.hpp"
#include "fracfield/fraclap.hpp"

namespace fracfield {

// Bounded observation window Omega. Whole stands for R^d (perimeters only).
struct DomainWindow {
  enum class Kind { Whole, Interval, Box2D, Annulus };
  Kind kind = Kind::Interval;
  double a = -1.0, b = 1.0;    // Interval; Box2D x-range
  double c = -1.0, e = 1.0;    // Box2D y-range
  Point center{0.0, 0.0};      // Annulus
  double r_in = 0.5, r_out = 1.5;

  static DomainWindow whole();
  static DomainWindow interval(double a, double b);
  static DomainWindow box(double x0, double x1, double y0, double y1);
  static DomainWindow annulus(Point center, double r_in, double r_out);
  static DomainWindow parse(const std::string& text);
  std::string str() const;
  bool contains(const Point& x) const;
};

struct EnergyReport {
  double kinetic = 0.0;         // scaled nonlocal part
  double potential_term = 0.0;  // scaled potential part (F) or 0 (G)
  double total = 0.0;
  ScalePair scale{1.0, 1.0};
  double err_est = 0.0;
};

// F_eps(u, Omega) = alpha [ (gamma/4) iint_{(Omega^c x Omega^c)^c} |u(x)-u(y)|^2 |x-y|^{-1-2s}
//                          + eps^{-2s} int_Omega W(u) ].  One-dimensional fields.
EnergyReport f_energy(const FieldSpec& f, const DomainWindow& omega, const QuadratureSpec& spec = {});

// G_eps(u, Omega) = beta_s(eps) int_Omega ((-Delta)^s u + eps^{-2s} W'(u))^2 with beta_s = 1
// below s = 3/4, 1/|log eps| at 3/4 and eps^{4s-3} above.
// One-dimensional fields with a C^2 modification.
EnergyReport g_energy(const FieldSpec& f, const DomainWindow& omega, const QuadratureSpec& spec = {});

// Pointwise integrand of the limit functional:
// (-Delta)^s chi_E(x) - (gamma/s) sign(beta) |beta(x)|^{-2s}.
double n_integrand(const SetDescriptor& E, const FracOrder& s, const std::optional<Modification>& mod,
                   const Point& x, const QuadratureSpec& spec = {});

struct NReport {
  double total = 0.0;
  double collar = 0.0;  // contribution of Sigma_delta (plain distance: the window itself)
  double rest = 0.0;
};

// N_s(E, beta) = int_Omega n_integrand^2. Interval unions and concentric disk
// annuli. Throws DivergenceDetected when the shells towards Sigma stop
// contracting (s >= 3/4 with the plain distance).
NReport n_functional(const SetDescriptor& E, const FracOrder& s, const std::optional<Modification>& mod,
                     const DomainWindow& omega, const QuadratureSpec& spec = {});

// Per_sigma(E, Omega) = 2 iint_{(E x E^c) minus (Omega^c x Omega^c)} |x-y|^{-d-sigma}.
// Closed form for interval unions, deterministic polar quadrature for a disk
// in the whole plane.
double frac_perimeter(const SetDescriptor& E, double sigma, const DomainWindow& omega, const QuadratureSpec& spec = {});

struct MonteCarloEstimate {
  double value = 0.0;
  double half_width = 0.0;  // 95% confidence half-width
  std::int64_t samples = 0;
};

MonteCarloEstimate frac_perimeter_disk_mc(double R, double sigma, std::int64_t samples, std::uint64_t seed);

// Limit constant of (1 - sigma) Per_sigma / Per in dimension d.
double perimeter_limit_constant(int d);

struct ClassicalMeasures {
  double perimeter = 0.0;
  double willmore = 0.0;  // int_{Sigma cap Omega} H^2
};

ClassicalMeasures classical_perimeter_and_willmore(const SetDescriptor& E, const DomainWindow& omega);

struct CStarEstimate {
  double c_star = 0.0;
  SweepResult fit;
};

// c_* from F_eps of the recovery field (plain distance, Optimal eta) on
// E = (0, length) inside Omega = (-2, 3), divided by the two endpoints and
// extrapolated in eps (power law above 1/2, log model at 1/2).
CStarEstimate estimate_c_star(const FracOrder& s, const PotentialSpec& W, const std::vector<double>& eps_sweep,
                              const QuadratureSpec& spec = {}, double length = 1.0);
CStarEstimate estimate_c_star(std::shared_ptr<const Profile> p, const std::vector<double>& eps_sweep,
                              const QuadratureSpec& spec = {}, double length = 1.0);

// Recovery field used by the limsup experiments on an interval union:
// profile composed with beta^{eta,delta}, eta the energy-optimal target.
FieldSpec recovery_field(std::shared_ptr<const Profile> p, const SetDescriptor& E, double eps, double delta,
                         double delta_prime);

}  // namespace fracfield
