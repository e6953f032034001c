#include "fracfield/fraclap.hpp"

#include <algorithm>
#include <cmath>

namespace fracfield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<SingularPoint> geometric_kinks(double from, double to, double factor = 4.0) {
  std::vector<SingularPoint> out;
  for (double t = from * factor; t < to; t *= factor) out.push_back(kink(t));
  return out;
}

QuadratureSpec inner_spec(const QuadratureSpec& spec) {
  QuadratureSpec q = spec;
  q.rel_tol = spec.rel_tol * 0.1;
  q.abs_tol = spec.abs_tol * 0.1;
  q.max_subdivisions = std::max(spec.max_subdivisions, 4000);
  return q;
}

}  // namespace

// Below t0 the second difference is replaced by the model
// a t^2 + b t^3 + c t^4 through its values at t0, 2 t0 and 3 t0; rounding
// makes direct evaluation meaningless much closer to the origin. The cubic
// term covers fields whose third derivative jumps at x (spline knots).
double near_origin_piece(const std::function<double(double)>& diff, double t0, double s) {
  // q_k = D(k t0) / (k t0)^2 = a + b k t0 + c k^2 t0^2
  const double q1 = diff(t0) / (t0 * t0);
  const double q2 = diff(2.0 * t0) / (4.0 * t0 * t0);
  const double q3 = diff(3.0 * t0) / (9.0 * t0 * t0);
  const double C = (q3 - 2.0 * q2 + q1) / 2.0;  // c t0^2
  const double B = q2 - q1 - 3.0 * C;           // b t0
  const double A = q1 - B - C;                   // a
  const double base = std::pow(t0, 2.0 - 2.0 * s);
  return base * (A / (2.0 - 2.0 * s) + B / (3.0 - 2.0 * s) + C / (4.0 - 2.0 * s));
}

double fraclap_1d(const Field1D& f, const FracOrder& s, double x, const QuadratureSpec& spec) {
  spec.validate();
  if (x < f.c2_lo || x > f.c2_hi) throw RegularityViolation("fraclap_1d: point outside the C^2 window of the field");
  const double sv = s.value();
  const double ux = f.u(x);
  double reach = 0.0;
  for (double p : f.features) reach = std::max(reach, std::fabs(p - x));
  const double T = std::max(spec.tail_cutoff * f.scale, 2.0 * reach + 10.0 * f.scale);
  const double t0 = 1e-3 * f.scale;

  auto second_diff = [&](double t) { return 2.0 * ux - f.u(x + t) - f.u(x - t); };
  auto g = [&](double t) { return second_diff(t) * std::pow(t, -1.0 - 2.0 * sv); };

  std::vector<SingularPoint> pts = geometric_kinks(t0, T);
  for (double p : f.features) {
    const double t = std::fabs(p - x);
    if (t > t0 && t < T) pts.push_back(kink(t));
  }
  double total = near_origin_piece(second_diff, t0, sv);
  total += integrate(g, t0, T, pts, spec).value;
  if (!f.has_limits) {
    // Only the 2u(x) part of the far field is kept; the oscillating rest is
    // O(T^{-1-2s}).
    total += 2.0 * ux * std::pow(T, -2.0 * sv) / (2.0 * sv);
    return gamma_ds(1, s) * total;
  }
  total += (2.0 * ux - f.lim_plus - f.lim_minus) * std::pow(T, -2.0 * sv) / (2.0 * sv);
  auto tail = [&](double t) {
    return ((f.lim_plus - f.u(x + t)) + (f.lim_minus - f.u(x - t))) * std::pow(t, -1.0 - 2.0 * sv);
  };
  total += integrate(tail, T, kInf, {}, spec).value;
  return gamma_ds(1, s) * total;
}

Field1D profile_field(const Profile& p, double eps) {
  Field1D f;
  auto shared = std::make_shared<const Profile>(p);
  f.u = [shared, eps](double z) { return eval_profile(*shared, z, 0, eps); };
  f.lim_minus = -1.0;
  f.lim_plus = 1.0;
  f.features = {-p.Z * eps, p.Z * eps};
  f.scale = eps;
  return f;
}

double fraclap_profile(const Profile& p, double z, double eps, const QuadratureSpec& spec) {
  Field1D f;
  f.u = [&p, eps](double t) { return eval_profile(p, t, 0, eps); };
  f.lim_minus = -1.0;
  f.lim_plus = 1.0;
  f.features = {-p.Z * eps, p.Z * eps};
  f.scale = eps;
  return fraclap_1d(f, p.s, z, spec);
}

double fraclap_indicator(const SetDescriptor& E, const FracOrder& s, const Point& x, const QuadratureSpec& spec) {
  const double sv = s.value();
  const double g1 = gamma_ds(1, s);
  const double d = signed_distance(E, x);
  const double scale = E.kind == SetDescriptor::Kind::Ball ? E.R : std::max(1.0, std::fabs(x.empty() ? 0.0 : x[0]));
  if (std::fabs(d) <= 1e-13 * scale) throw OnBoundary("fraclap_indicator: point on the boundary");

  if (E.kind == SetDescriptor::Kind::HalfSpace) {
    return (d > 0.0 ? 1.0 : -1.0) * g1 / sv * std::pow(std::fabs(d), -2.0 * sv);
  }
  if (E.kind == SetDescriptor::Kind::IntervalUnion ||
      (E.kind == SetDescriptor::Kind::Ball && E.dim() == 1)) {
    std::vector<std::pair<double, double>> iv = E.intervals;
    if (E.kind == SetDescriptor::Kind::Ball) iv = {{E.center[0] - E.R, E.center[0] + E.R}};
    // Pieces of the opposite phase seen from x, each contributing
    // (near^{-2s} - far^{-2s}) / (2s).
    std::vector<std::pair<double, double>> other;
    if (d > 0.0) {
      other.emplace_back(-kInf, iv.front().first);
      for (std::size_t i = 0; i + 1 < iv.size(); ++i) other.emplace_back(iv[i].second, iv[i + 1].first);
      other.emplace_back(iv.back().second, kInf);
    } else {
      other = iv;
    }
    const double t = x[0];
    double acc = 0.0;
    for (const auto& [a, b] : other) {
      double near, far;
      if (t <= a) {
        near = a - t;
        far = b - t;
      } else {
        near = t - b;
        far = t - a;
      }
      if (std::isinf(far)) {
        acc += std::pow(near, -2.0 * sv);
      } else {
        // near^{-2s} - far^{-2s} without cancellation far from the piece.
        acc -= std::pow(near, -2.0 * sv) * std::expm1(-2.0 * sv * std::log1p((b - a) / near));
      }
    }
    return (d > 0.0 ? 1.0 : -1.0) * g1 / sv * acc;
  }
  if (E.dim() != 2) throw UnsupportedGeometry("fraclap_indicator: balls are supported in d = 1, 2 only");

  const double g2 = gamma_ds(2, s);
  const double rho = std::hypot(x[0] - E.center[0], x[1] - E.center[1]);
  const double R = E.R;
  if (d > 0.0) {
    // Exit distance along direction theta measured from the outward radial direction.
    auto f = [&](double th) {
      const double sn = std::sin(th);
      const double r = -rho * std::cos(th) + std::sqrt(std::max(0.0, R * R - rho * rho * sn * sn));
      return std::pow(r, -2.0 * sv);
    };
    std::vector<SingularPoint> pts;
    const double w = std::sqrt(d / R);
    for (double k : {1.0, 4.0, 16.0}) {
      if (k * w < M_PI) pts.push_back(kink(k * w));
    }
    const double I = integrate(f, 0.0, M_PI, pts, spec).value;
    return 4.0 * g2 * I / (2.0 * sv);
  }
  const double phimax = std::asin(R / rho);
  auto f = [&](double ph) {
    const double sn = std::sin(ph);
    const double root = std::sqrt(std::max(0.0, R * R - rho * rho * sn * sn));
    const double c = rho * std::cos(ph);
    const double r1 = c - root;
    const double r2 = c + root;
    return std::pow(r1, -2.0 * sv) - std::pow(r2, -2.0 * sv);
  };
  std::vector<SingularPoint> pts = {algebraic(phimax, 0.5)};
  const double w = std::sqrt(-d / rho);
  for (double k : {1.0, 4.0}) {
    if (k * w < phimax) pts.push_back(kink(k * w));
  }
  const double I = integrate(f, 0.0, phimax, pts, spec).value;
  return -4.0 * g2 * I / (2.0 * sv);
}

double halfplane_indicator_bruteforce(const FracOrder& s, double d, const QuadratureSpec& spec) {
  if (d == 0.0) throw OnBoundary("halfplane: point on the boundary");
  const double sv = s.value();
  const double ad = std::fabs(d);
  const QuadratureSpec qi = inner_spec(spec);
  // For each direction in the upper half circle, the opposite phase starts at
  // radius |d| / sin(theta); both antipodal rays are folded into the factor 2.
  auto outer = [&](double th) {
    const double sn = std::sin(th);
    if (!(sn > 0.0)) return 0.0;
    const double r0 = ad / sn;
    if (!std::isfinite(r0)) return 0.0;
    auto inner = [&](double r) { return std::pow(r, -1.0 - 2.0 * sv); };
    return integrate(inner, r0, kInf, {}, qi).value;
  };
  const double I = integrate(outer, 0.0, M_PI, {algebraic(0.0, 2.0 * sv), algebraic(M_PI, 2.0 * sv), kink(0.5 * M_PI)}, spec).value;
  return (d > 0.0 ? 1.0 : -1.0) * 2.0 * gamma_ds(2, s) * I;
}

double FieldSpec::beta(const Point& x) const {
  if (mod) return beta_modified(geometry, mod->eta, mod->delta, x);
  return signed_distance(geometry, x);
}

double FieldSpec::value(const Point& x) const { return eval_profile(*profile, beta(x), 0, eps); }

double FieldSpec::far_value() const {
  if (geometry.kind == SetDescriptor::Kind::HalfSpace) throw DomainError("far value is direction dependent for a half-space");
  if (mod && mod->eta.kind == EtaSpec::Kind::Constant) return eval_profile(*profile, -mod->eta.c_minus, 0, eps);
  return -1.0;
}

void FieldSpec::validate() const {
  if (!profile) throw DomainError("field: missing profile");
  if (!(eps > 0.0)) throw DomainError("field: eps must be positive");
  if (mod) validate_eta(geometry, mod->eta, mod->delta);
}

Field1D FieldSpec::as_field1d() const {
  if (geometry.dim() != 1) throw UnsupportedGeometry("field: one-dimensional restriction needs a 1D geometry");
  Field1D f;
  auto self = std::make_shared<const FieldSpec>(*this);
  f.u = [self](double t) { return self->value({t}); };
  f.scale = eps;
  std::vector<double> bnd;
  switch (geometry.kind) {
    case SetDescriptor::Kind::HalfSpace: {
      const double inside = (mod && mod->eta.kind == EtaSpec::Kind::Constant) ? eval_profile(*profile, mod->eta.c_plus, 0, eps) : 1.0;
      const double outside = (mod && mod->eta.kind == EtaSpec::Kind::Constant) ? eval_profile(*profile, -mod->eta.c_minus, 0, eps) : -1.0;
      const bool up = geometry.normal[0] > 0.0;
      f.lim_plus = up ? inside : outside;
      f.lim_minus = up ? outside : inside;
      bnd.push_back(geometry.offset * geometry.normal[0]);
      break;
    }
    case SetDescriptor::Kind::Ball:
      f.lim_plus = f.lim_minus = far_value();
      bnd = {geometry.center[0] - geometry.R, geometry.center[0] + geometry.R};
      f.features.push_back(geometry.center[0]);
      break;
    case SetDescriptor::Kind::IntervalUnion:
      f.lim_plus = f.lim_minus = far_value();
      for (std::size_t i = 0; i < geometry.intervals.size(); ++i) {
        const auto& [a, b] = geometry.intervals[i];
        bnd.push_back(a);
        bnd.push_back(b);
        f.features.push_back(0.5 * (a + b));
        if (i > 0) f.features.push_back(0.5 * (geometry.intervals[i - 1].second + a));
      }
      break;
  }
  std::vector<double> offsets = {0.0};
  for (double k : {1.0, 4.0, 16.0}) offsets.push_back(k * eps);
  if (mod) {
    offsets.push_back(mod->delta);
    offsets.push_back(mod->delta + mod->eta.blend_width);
    if (mod->eta.kind == EtaSpec::Kind::Optimal) offsets.push_back(mod->delta + mod->eta.delta_prime);
  }
  for (double b : bnd) {
    for (double o : offsets) {
      f.features.push_back(b + o);
      if (o > 0.0) f.features.push_back(b - o);
    }
  }
  return f;
}

double fraclap_field_1d(const FieldSpec& f, double x, const QuadratureSpec& spec) {
  f.validate();
  if (!f.mod && f.geometry.kind != SetDescriptor::Kind::HalfSpace) {
    try {
      project_and_curvature(f.geometry, {x});
    } catch (const MedialSet&) {
      throw RegularityViolation("field: unmodified distance is not C^2 at a medial point");
    }
  }
  return fraclap_1d(f.as_field1d(), f.profile->s, x, spec);
}

double fraclap_phasefield_2d(const FieldSpec& f, const Point& x, const QuadratureSpec& spec) {
  f.validate();
  const SetDescriptor& E = f.geometry;
  if (E.kind != SetDescriptor::Kind::Ball || E.dim() != 2) throw UnsupportedGeometry("phase field quadrature needs a 2D disk");
  if (!f.mod) throw RegularityViolation("phase field quadrature needs the modified distance (C^2 field)");
  const FracOrder& s = f.profile->s;
  const double sv = s.value();
  const double eps = f.eps;
  const double R = E.R;
  const double relx = x[0] - E.center[0], rely = x[1] - E.center[1];
  const double rho = std::hypot(relx, rely);
  if (!(rho > 1e-12 * R)) throw MedialSet("phase field: evaluation at the disk centre");
  const double er[2] = {relx / rho, rely / rho};
  const double et[2] = {-er[1], er[0]};
  const double delta = f.mod->delta;
  const EtaSpec& eta = f.mod->eta;
  const double outer_extent = delta + (eta.kind == EtaSpec::Kind::Optimal ? std::max(eta.delta_prime, eta.blend_width) : eta.blend_width);
  const double T = rho + R + outer_extent + 1.0;
  const double far = f.far_value();
  const bool far_exact = eta.kind == EtaSpec::Kind::Constant;
  const double ux = f.value(x);
  const double t0 = 1e-3 * eps;

  std::vector<double> radii = {R, R - delta, R + delta, R - outer_extent, R + outer_extent};
  for (double k : {1.0, 4.0, 16.0}) {
    if (k * eps < delta) {
      radii.push_back(R + k * eps);
      radii.push_back(R - k * eps);
    }
  }
  // Inner integrals are measured against the natural size eps^{-2s} of the
  // operator on an interface of width eps, not against their own value,
  // which nearly cancels for directions tangent to the interface.
  QuadratureSpec qi = inner_spec(spec);
  qi.abs_tol = std::max(qi.abs_tol, qi.rel_tol * std::pow(eps, -2.0 * sv));
  qi.max_subdivisions = std::max(qi.max_subdivisions, 20000);

  auto inner = [&](double th) {
    const double c = std::cos(th), sn = std::sin(th);
    const double e0 = c * er[0] + sn * et[0];
    const double e1 = c * er[1] + sn * et[1];
    auto u_at = [&](double r) { return f.value({x[0] + r * e0, x[1] + r * e1}); };
    auto diff = [&](double r) { return 2.0 * ux - u_at(r) - u_at(-r); };
    auto g = [&](double r) { return diff(r) * std::pow(r, -1.0 - 2.0 * sv); };
    std::vector<SingularPoint> pts = geometric_kinks(t0, T);
    const double b = rho * c;
    for (double rt : radii) {
      if (!(rt > 0.0)) continue;
      const double disc = b * b - rho * rho + rt * rt;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      for (double sg : {1.0, -1.0}) {
        for (double r : {-sg * b + sq, -sg * b - sq}) {
          if (r > t0 && r < T) pts.push_back(kink(r));
        }
      }
    }
    double v = near_origin_piece(diff, t0, sv);
    v += integrate(g, t0, T, pts, qi).value;
    v += (2.0 * ux - 2.0 * far) * std::pow(T, -2.0 * sv) / (2.0 * sv);
    if (!far_exact) {
      auto tail = [&](double r) { return (2.0 * far - u_at(r) - u_at(-r)) * std::pow(r, -1.0 - 2.0 * sv); };
      v += integrate(tail, T, kInf, {}, qi).value;
    }
    return v;
  };

  std::vector<SingularPoint> angles = {kink(0.5 * M_PI)};
  for (double rt : radii) {
    if (rt > 0.0 && rt < rho) {
      const double psi = std::asin(rt / rho);
      angles.push_back(algebraic(psi, 0.5));
      angles.push_back(algebraic(M_PI - psi, 0.5));
    }
  }
  // Near-tangent directions resolve the interface over a stretched length.
  const double w = std::sqrt(std::max(eps, std::fabs(R - rho)) / R);
  for (double k : {1.0, 4.0}) {
    if (k * w < 0.5 * M_PI) {
      angles.push_back(kink(0.5 * M_PI - k * w));
      angles.push_back(kink(0.5 * M_PI + k * w));
    }
  }
  // Same yardstick for the angular integral: at the interface itself the
  // total nearly cancels.
  QuadratureSpec qo = spec;
  qo.abs_tol = std::max(spec.abs_tol, spec.rel_tol * std::pow(eps, -2.0 * sv));
  const double I = integrate(inner, 0.0, M_PI, angles, qo).value;
  return gamma_ds(2, s) * I;
}

KernelCheck reduction_kernel(int d, const FracOrder& s, double a, const QuadratureSpec& spec) {
  if (d < 2 || d > 3) throw DomainError("reduction_kernel: d must be 2 or 3");
  if (!(a > 0.0)) throw DomainError("reduction_kernel: a must be positive");
  const double sv = s.value();
  KernelCheck out;
  out.closed_form = gamma_ds(1, s) / gamma_ds(d, s) * std::pow(a, -1.0 - 2.0 * sv);
  const double e = -0.5 * (d + 2.0 * sv);
  if (d == 2) {
    auto f = [&](double y) { return std::pow(y * y + a * a, e); };
    out.quadrature = 2.0 * integrate(f, 0.0, kInf, {kink(a)}, spec).value;
  } else {
    auto f = [&](double r) { return r * std::pow(r * r + a * a, e); };
    out.quadrature = 2.0 * M_PI * integrate(f, 0.0, kInf, {kink(a)}, spec).value;
  }
  return out;
}

}  // namespace fracfield
