#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "fracfield/foundations.hpp"
#include "fracfield/geometry.hpp"
#include "fracfield/profile.hpp"

namespace fracfield {

// A scalar field on the line described well enough for the pairing form of
// the operator: its limits at -inf/+inf, the places where it changes
// character (used as quadrature breakpoints) and the window on which it is
// known to be C^2.
struct Field1D {
  std::function<double(double)> u;
  double lim_minus = 0.0;
  double lim_plus = 0.0;
  std::vector<double> features;
  double scale = 1.0;
  double c2_lo = -std::numeric_limits<double>::infinity();
  double c2_hi = std::numeric_limits<double>::infinity();
  // False for bounded fields without limits at infinity (e.g. cos x); the
  // integral is then truncated at tail_cutoff * scale.
  bool has_limits = true;
};

// int_0^t0 D(t) t^{-1-2s} dt for a difference D(t) = a t^2 + b t^3 + c t^4 + ...
// fitted through D(t0), D(2 t0), D(3 t0).
double near_origin_piece(const std::function<double(double)>& diff, double t0, double s);

// (gamma_{1,s}/2) int (2u(x) - u(x+t) - u(x-t)) |t|^{-1-2s} dt
double fraclap_1d(const Field1D& f, const FracOrder& s, double x, const QuadratureSpec& spec = {});

Field1D profile_field(const Profile& p, double eps);

// (-d_zz)^s of the rescaled profile w_eps at z.
double fraclap_profile(const Profile& p, double z, double eps, const QuadratureSpec& spec = {});

// (-Delta)^s of the +-1 indicator of E. Closed forms for half-spaces and
// interval unions, reduced polar quadrature for a disk.
double fraclap_indicator(const SetDescriptor& E, const FracOrder& s, const Point& x, const QuadratureSpec& spec = {});

// Brute-force nested (angle, radius) quadrature of the defining integral for
// the indicator of a half-plane at signed distance d.
double halfplane_indicator_bruteforce(const FracOrder& s, double d, const QuadratureSpec& spec = {});

struct Modification {
  double delta;
  EtaSpec eta;
};

// Phase field u(x) = w_eps(beta(x)) built from a profile, a set and an
// optional boundary modification (plain signed distance when absent).
struct FieldSpec {
  std::shared_ptr<const Profile> profile;
  SetDescriptor geometry;
  std::optional<Modification> mod;
  double eps = 0.1;

  double beta(const Point& x) const;
  double value(const Point& x) const;
  // Value of u far from E (outside).
  double far_value() const;
  void validate() const;
  // Restriction to the line for one-dimensional geometries.
  Field1D as_field1d() const;
};

double fraclap_field_1d(const FieldSpec& f, double x, const QuadratureSpec& spec = {});

// gamma_{2,s} int_0^pi int_0^inf (2u(x) - u(x + r e) - u(x - r e)) r^{-1-2s} dr dtheta
double fraclap_phasefield_2d(const FieldSpec& f, const Point& x, const QuadratureSpec& spec = {});

struct KernelCheck {
  double closed_form;
  double quadrature;
};

// int_{R^{d-1}} (|y'|^2 + a^2)^{-(d+2s)/2} dy'
KernelCheck reduction_kernel(int d, const FracOrder& s, double a, const QuadratureSpec& spec = {});

}  // namespace fracfield
