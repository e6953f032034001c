#pragma once

#include <string>
#include <vector>

#include "fracfield/foundations.hpp"

namespace fracfield {

struct ProfileGrid {
  double Z = 50.0;
  double h = 0.025;
};

// Odd, increasing heteroclinic of (-d_zz)^s w + W'(w) = 0 stored on [0, Z] as
// a clamped cubic spline (node values and second derivatives). Beyond Z the
// analytic far-field tail sgn(z) - tail_coeff z |z|^{-1-2s} is used.
struct Profile {
  FracOrder s{1, 2};
  PotentialSpec potential = PotentialSpec::quartic();
  double Z = 50.0;
  double h = 0.025;
  std::vector<double> w;    // w(i h), i = 0..N
  std::vector<double> m;    // w''(i h)
  double tail_coeff = 0.0;  // gamma_{1,s} / (s lambda)
  double residual_sup = 0.0;

  std::size_t nodes() const { return w.size(); }
};

Profile solve_profile(const FracOrder& s, const PotentialSpec& spec = PotentialSpec::quartic(),
                      ProfileGrid grid = {}, double tol = 1e-5);

// w_eps(z) = w(z/eps) and its first two derivatives.
double eval_profile(const Profile& p, double z, int order, double eps = 1.0);

struct ProfileDiagnostics {
  double decay_constant;
  double tail_match;
  double residual_sup;
};

ProfileDiagnostics verify_profile(const Profile& p);

// Continuous residual (-d_zz)^s w + W'(w) at z, evaluated by adaptive
// quadrature on the stored representation (independent of the solver's
// product-integration weights).
double profile_residual_quadrature(const Profile& p, double z, const QuadratureSpec& spec = {});

std::string serialize_profile(const Profile& p);
Profile deserialize_profile(const std::string& text);

// Solve or fetch from the directory named by FRACFIELD_CACHE.
Profile cached_profile(const FracOrder& s, const PotentialSpec& spec = PotentialSpec::quartic(),
                       ProfileGrid grid = {}, double tol = 1e-5);

}  // namespace fracfield
