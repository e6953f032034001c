#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fracfield/foundations.hpp"

namespace fracfield {

using Point = std::vector<double>;

// Analytic sets E with boundary Sigma. Signed distance is positive inside E.
struct SetDescriptor {
  enum class Kind { HalfSpace, Ball, IntervalUnion };
  Kind kind = Kind::HalfSpace;

  Point normal{1.0};   // HalfSpace: E = {x : <x, normal> > offset}
  double offset = 0.0;
  Point center;        // Ball
  double R = 1.0;
  std::vector<std::pair<double, double>> intervals;  // IntervalUnion, sorted and disjoint

  static SetDescriptor halfspace(Point normal, double offset = 0.0);
  static SetDescriptor ball(Point center, double R);
  static SetDescriptor interval_union(std::vector<std::pair<double, double>> intervals);

  int dim() const;
  // Largest admissible collar half-width: one fifth of the tubular radius.
  double delta0() const;

  // One-line text form: "halfspace [n_1 .. n_d offset]", "ball c_1 .. c_d R",
  // "interval a_1 b_1 [a_2 b_2 ...]".
  static SetDescriptor parse(const std::string& text);
  std::string str() const;
};

double signed_distance(const SetDescriptor& E, const Point& x);

struct Projection {
  Point boundary;
  Point inward_normal;
  double H;  // sum of principal curvatures, positive for a ball
};

Projection project_and_curvature(const SetDescriptor& E, const Point& x);

// Target for the modified distance away from the collar.
struct EtaSpec {
  enum class Kind { Constant, Optimal };
  Kind kind = Kind::Constant;
  double c_plus = 1.0;   // value inside E (Constant)
  double c_minus = 1.0;  // |value| outside E (Constant)
  double delta_prime = 0.0;  // Optimal: collar extension
  FracOrder s{1, 2};         // Optimal: order used to build eta
  double blend_width = 0.0;

  static EtaSpec constant(double c_plus, double c_minus, double blend_width);
};

// Optimal eta = c_s ((-Delta)^s chi_E)^{-1/(2s)} with sign of chi_E.
EtaSpec eta_optimal(const SetDescriptor& E, const FracOrder& s, double delta, double delta_prime);

// Value of the eta target at x (not blended).
double eta_value(const SetDescriptor& E, const EtaSpec& eta, const Point& x);

struct EtaBounds {
  double c1;
  double c2;
};

// Range of |eta| on the collar Sigma_{delta+delta'} minus Sigma_delta.
EtaBounds eta_collar_bounds(const SetDescriptor& E, const EtaSpec& eta, double delta, int samples = 400);

// Checks sign and lower-bound requirements; throws InvalidEta.
void validate_eta(const SetDescriptor& E, const EtaSpec& eta, double delta);

double smoothstep5(double t);

double beta_modified(const SetDescriptor& E, const EtaSpec& eta, double delta, const Point& x);

}  // namespace fracfield
