#include "fracfield/energy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>
#include <sstream>

namespace fracfield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<SingularPoint> kinks_inside(const std::vector<double>& at, double a, double b) {
  std::vector<SingularPoint> out;
  for (double t : at) {
    if (t > a && t < b) out.push_back(kink(t));
  }
  return out;
}

std::vector<double> boundary_points(const SetDescriptor& E) {
  switch (E.kind) {
    case SetDescriptor::Kind::HalfSpace:
      return {E.offset * E.normal[0]};
    case SetDescriptor::Kind::Ball:
      return {E.center[0] - E.R, E.center[0] + E.R};
    case SetDescriptor::Kind::IntervalUnion: {
      std::vector<double> out;
      for (const auto& [a, b] : E.intervals) {
        out.push_back(a);
        out.push_back(b);
      }
      return out;
    }
  }
  return {};
}

std::vector<std::pair<double, double>> as_intervals(const SetDescriptor& E) {
  if (E.kind == SetDescriptor::Kind::IntervalUnion) return E.intervals;
  if (E.kind == SetDescriptor::Kind::Ball && E.dim() == 1) return {{E.center[0] - E.R, E.center[0] + E.R}};
  throw UnsupportedGeometry("expected a bounded one-dimensional set");
}

// Places where one-dimensional integrands change character: boundary points
// offset by multiples of eps and by the collar radii of the modification.
std::vector<double> spatial_breaks(const SetDescriptor& E, const std::optional<Modification>& mod, double eps) {
  std::vector<double> offs = {0.0};
  if (eps > 0.0) {
    for (double k : {1.0, 4.0, 16.0, 64.0, 256.0}) offs.push_back(k * eps);
  }
  if (mod) {
    offs.push_back(mod->delta);
    offs.push_back(mod->delta + mod->eta.blend_width);
    if (mod->eta.kind == EtaSpec::Kind::Optimal) offs.push_back(mod->delta + mod->eta.delta_prime);
  }
  std::vector<double> out;
  for (double b : boundary_points(E)) {
    for (double o : offs) {
      out.push_back(b + o);
      out.push_back(b - o);
    }
  }
  if (E.kind == SetDescriptor::Kind::IntervalUnion) {
    for (std::size_t i = 0; i + 1 < E.intervals.size(); ++i)
      out.push_back(0.5 * (E.intervals[i].second + E.intervals[i + 1].first));
  }
  sort_unique(out);
  return out;
}

double sgn(double v) { return v > 0.0 ? 1.0 : -1.0; }

// Integral of |x - y|^{-1-sigma} over I x J for disjoint intervals with
// I to the left of J. Infinite ends drop the corresponding pair of terms.
double pair_integral(std::pair<double, double> I, std::pair<double, double> J, double sigma) {
  if (I.first > J.first) std::swap(I, J);
  auto Phi = [sigma](double t) { return std::pow(std::fabs(t), 1.0 - sigma) / (sigma * (1.0 - sigma)); };
  const auto [a, b] = I;
  const auto [c, d] = J;
  if (std::isinf(a) && std::isinf(d)) return kInf;
  double v = 0.0;
  if (!std::isinf(a)) v += Phi(c - a) - (std::isinf(d) ? 0.0 : Phi(d - a));
  v += -Phi(c - b) + (std::isinf(d) ? 0.0 : Phi(d - b));
  return v;
}

std::vector<std::pair<double, double>> complement(const std::vector<std::pair<double, double>>& iv) {
  std::vector<std::pair<double, double>> out;
  double prev = -kInf;
  for (const auto& [a, b] : iv) {
    out.emplace_back(prev, a);
    prev = b;
  }
  out.emplace_back(prev, kInf);
  return out;
}

std::vector<std::pair<double, double>> intersect(const std::vector<std::pair<double, double>>& iv, double A, double B) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [a, b] : iv) {
    const double lo = std::max(a, A), hi = std::min(b, B);
    if (hi > lo) out.emplace_back(lo, hi);
  }
  return out;
}

std::vector<std::pair<double, double>> subtract(const std::vector<std::pair<double, double>>& iv, double A, double B) {
  std::vector<std::pair<double, double>> out;
  for (const auto& [a, b] : iv) {
    if (a < A) out.emplace_back(a, std::min(b, A));
    if (b > B) out.emplace_back(std::max(a, B), b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Limit-functional integrands
// ---------------------------------------------------------------------------

// (-Delta)^s chi_E(x) - (gamma/s) sign(d) |d|^{-2s} for interval unions, with
// the nearest-endpoint term cancelled analytically.
double interval_residual_distance(const std::vector<std::pair<double, double>>& iv, const FracOrder& s, double x) {
  const double sv = s.value();
  bool inside = false;
  for (const auto& [a, b] : iv) inside = inside || (x > a && x < b);
  std::vector<std::pair<double, double>> other = inside ? complement(iv) : iv;
  double nearest = kInf;
  for (const auto& [a, b] : iv) nearest = std::min({nearest, std::fabs(x - a), std::fabs(x - b)});
  double acc = 0.0;
  bool skipped = false;
  for (const auto& [a, b] : other) {
    double near, far;
    if (x <= a) {
      near = a - x;
      far = b - x;
    } else {
      near = x - b;
      far = x - a;
    }
    if (!skipped && near == nearest) {
      skipped = true;
    } else {
      acc += std::pow(near, -2.0 * sv);
    }
    if (!std::isinf(far)) acc -= std::pow(far, -2.0 * sv);
  }
  return (inside ? 1.0 : -1.0) * gamma_ds(1, s) / sv * acc;
}

// Same quantity for a disk at signed distance d (positive inside), written
// against the tangent half-plane so that both parts of the difference are
// evaluated without cancellation at small |d|.
double disk_residual_distance(double R, const FracOrder& s, double d, const QuadratureSpec& spec) {
  const double sv = s.value();
  const double pref = 4.0 * gamma_ds(2, s) / (2.0 * sv);
  const double ad = std::fabs(d);
  const double w = std::sqrt(ad / R);
  // r^{-2s} - h^{-2s} = h^{-2s} expm1(-2s log1p(q - 1)) with q = r / h and
  // q - 1 in closed form.
  auto rel_diff = [sv](double h_inv, double qm1) { return std::pow(h_inv, 2.0 * sv) * std::expm1(-2.0 * sv * std::log1p(qm1)); };
  if (d > 0.0) {
    const double rho = R - d;
    const double k = d * (2.0 * R - d);  // R^2 - rho^2
    auto near = [&](double th) {
      const double c = std::cos(th), sn = std::sin(th);
      const double root = std::sqrt(std::max(0.0, R * R - rho * rho * sn * sn));
      const double qm1 = -sn * sn * k / ((c * R + root) * (rho * c + root));
      if (qm1 < -0.5) return std::pow(k / (rho * c + root), -2.0 * sv) - std::pow(c / d, 2.0 * sv);
      return rel_diff(c / d, qm1);
    };
    std::vector<SingularPoint> pts;
    std::vector<SingularPoint> back;
    for (double m : {1.0, 4.0, 16.0}) {
      if (m * w < 0.25 * M_PI) {
        pts.push_back(kink(m * w));
        pts.push_back(kink(0.5 * M_PI - m * w));
        back.push_back(kink(0.5 * M_PI + m * w));
      }
    }
    auto farside = [&](double th) {
      const double c = std::cos(th), sn = std::sin(th);
      const double root = std::sqrt(std::max(0.0, R * R - rho * rho * sn * sn));
      return std::pow(root - rho * c, -2.0 * sv);
    };
    const double b = integrate(farside, 0.5 * M_PI, M_PI, back, spec).value;
    QuadratureSpec qa = spec;
    qa.abs_tol = std::max(spec.abs_tol, spec.rel_tol * std::fabs(b));
    const double a = integrate(near, 0.0, 0.5 * M_PI, pts, qa).value;
    return pref * (a + b);
  }
  const double rho = R + ad;
  const double k = ad * (2.0 * R + ad);  // rho^2 - R^2
  const double phimax = std::atan2(R, std::sqrt(k));
  auto half = [&](double ph) { return std::pow(std::cos(ph) / ad, 2.0 * sv); };
  auto inner = [&](double ph) {
    const double sn = std::sin(ph), cs = std::cos(ph);
    const double root = std::sqrt(std::max(0.0, (R - rho * sn) * (R + rho * sn)));
    const double qm1 = sn * sn * k / ((R * cs + root) * (rho * cs + root));
    const double far = std::pow(rho * cs + root, -2.0 * sv);
    if (qm1 > 1.0) return std::pow(k / (rho * cs + root), -2.0 * sv) - half(ph) - far;
    return rel_diff(cs / ad, qm1) - far;
  };
  std::vector<SingularPoint> pts = {algebraic(phimax, 0.5)};
  for (double m : {1.0, 4.0, 16.0}) {
    if (m * w < phimax) pts.push_back(kink(m * w));
  }
  const double a = integrate(inner, 0.0, phimax, pts, spec).value;
  const double b = integrate(half, phimax, 0.5 * M_PI, {}, spec).value;
  return -pref * (a - b);
}

double n_integrand_disk(const SetDescriptor& E, const FracOrder& s, const std::optional<Modification>& mod, double d,
                        const QuadratureSpec& spec) {
  if (!mod || std::fabs(d) <= mod->delta) return disk_residual_distance(E.R, s, d, spec);
  const Point x = {E.center[0] + E.R - d, E.center[1]};
  const double beta = beta_modified(E, mod->eta, mod->delta, x);
  return fraclap_indicator(E, s, x, spec) - sgn(beta) * gamma_ds(1, s) / s.value() * std::pow(std::fabs(beta), -2.0 * s.value());
}

// Radial integral of n^2 over the distances (0, tau0) on one side of the
// circle, by dyadic shells with a geometric tail; diverging shells raise
// DivergenceDetected.
double disk_side_integral(const SetDescriptor& E, const FracOrder& s, const std::optional<Modification>& mod,
                          double side, double tau0, const QuadratureSpec& spec, const QuadratureSpec& inner) {
  const double R = E.R;
  auto f = [&](double tau) {
    const double n = n_integrand_disk(E, s, mod, side * tau, inner);
    return 2.0 * M_PI * (R - side * tau) * n * n;
  };
  std::vector<double> breaks;
  if (mod) breaks = {mod->delta, mod->delta + mod->eta.blend_width, mod->delta + mod->eta.delta_prime};
  const QuadratureSpec& qs = spec;
  double total = 0.0, prev = 0.0, ratio = 0.0;
  int growing = 0;
  const double floor = 1e-9 * R;
  double hi = tau0;
  for (int k = 0; hi > floor; ++k) {
    const double lo = 0.5 * hi;
    const double inc = integrate(f, lo, hi, kinks_inside(breaks, lo, hi), qs).value;
    total += inc;
    if (k > 0 && prev > 0.0) {
      ratio = inc / prev;
      if (k >= 6 && ratio >= 0.95) {
        if (++growing >= 3) throw DivergenceDetected("n_functional: shell contributions do not contract", total, ratio);
      } else {
        growing = 0;
      }
    }
    prev = inc;
    hi = lo;
    if (k >= 10 && ratio < 0.95 && inc < 1e-3 * spec.rel_tol * std::fabs(total)) break;
  }
  if (ratio > 0.0 && ratio < 0.95) total += prev * ratio / (1.0 - ratio);
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// DomainWindow
// ---------------------------------------------------------------------------

DomainWindow DomainWindow::whole() {
  DomainWindow w;
  w.kind = Kind::Whole;
  return w;
}

DomainWindow DomainWindow::interval(double a, double b) {
  if (!(b > a)) throw ConfigError("window: interval needs a < b");
  DomainWindow w;
  w.kind = Kind::Interval;
  w.a = a;
  w.b = b;
  return w;
}

DomainWindow DomainWindow::box(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0 && y1 > y0)) throw ConfigError("window: degenerate box");
  DomainWindow w;
  w.kind = Kind::Box2D;
  w.a = x0;
  w.b = x1;
  w.c = y0;
  w.e = y1;
  return w;
}

DomainWindow DomainWindow::annulus(Point center, double r_in, double r_out) {
  if (center.size() != 2 || !(r_in >= 0.0 && r_out > r_in)) throw ConfigError("window: bad annulus");
  DomainWindow w;
  w.kind = Kind::Annulus;
  w.center = std::move(center);
  w.r_in = r_in;
  w.r_out = r_out;
  return w;
}

DomainWindow DomainWindow::parse(const std::string& text) {
  std::istringstream in(text);
  std::string head;
  in >> head;
  std::vector<double> v;
  double t;
  while (in >> t) v.push_back(t);
  if (!in.eof()) throw ConfigError("window: cannot parse '" + text + "'");
  if (head == "whole" && v.empty()) return whole();
  if (head == "interval" && v.size() == 2) return interval(v[0], v[1]);
  if (head == "box" && v.size() == 4) return box(v[0], v[1], v[2], v[3]);
  if (head == "annulus" && v.size() == 4) return annulus({v[0], v[1]}, v[2], v[3]);
  throw ConfigError("window: cannot parse '" + text + "'");
}

std::string DomainWindow::str() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case Kind::Whole: out << "whole"; break;
    case Kind::Interval: out << "interval " << a << ' ' << b; break;
    case Kind::Box2D: out << "box " << a << ' ' << b << ' ' << c << ' ' << e; break;
    case Kind::Annulus: out << "annulus " << center[0] << ' ' << center[1] << ' ' << r_in << ' ' << r_out; break;
  }
  return out.str();
}

bool DomainWindow::contains(const Point& x) const {
  switch (kind) {
    case Kind::Whole: return true;
    case Kind::Interval: return x[0] > a && x[0] < b;
    case Kind::Box2D: return x[0] > a && x[0] < b && x[1] > c && x[1] < e;
    case Kind::Annulus: {
      const double r = std::hypot(x[0] - center[0], x[1] - center[1]);
      return r > r_in && r < r_out;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// F and G
// ---------------------------------------------------------------------------

EnergyReport f_energy(const FieldSpec& f, const DomainWindow& omega, const QuadratureSpec& spec) {
  f.validate();
  if (f.geometry.dim() != 1 || omega.kind != DomainWindow::Kind::Interval)
    throw UnsupportedGeometry("f_energy: one-dimensional fields on an interval window only");
  if (!(f.eps > 0.0 && f.eps < 1.0)) throw DomainError("f_energy: eps must lie in (0,1)");
  const FracOrder& s = f.profile->s;
  const double sv = s.value();
  const double eps = f.eps;
  const Field1D F = f.as_field1d();
  const double A = omega.a, B = omega.b;
  const double t0 = 1e-3 * eps;

  std::vector<double> feats = F.features;
  for (double v : spatial_breaks(f.geometry, f.mod, eps)) feats.push_back(v);
  sort_unique(feats);

  QuadratureSpec qi = spec;
  qi.rel_tol = 0.1 * spec.rel_tol;
  qi.abs_tol = 0.1 * spec.abs_tol;
  qi.max_subdivisions = std::max(spec.max_subdivisions, 10000);

  double inner_err = 0.0;
  auto kinetic_density = [&](double x) {
    const double ux = F.u(x);
    auto sq = [&](double y) { return (ux - F.u(y)) * (ux - F.u(y)); };
    auto D = [&](double t) { return sq(x + t) + sq(x - t); };
    double reach = std::max(B - x, x - A);
    for (double p : feats) reach = std::max(reach, std::fabs(p - x));
    const double T = 2.0 * reach + 10.0 * eps;
    std::vector<SingularPoint> pts;
    for (double t = 4.0 * t0; t < T; t *= 4.0) pts.push_back(kink(t));
    for (double p : feats) {
      const double t = std::fabs(p - x);
      if (t > t0 && t < T) pts.push_back(kink(t));
    }
    auto g = [&](double t) { return D(t) * std::pow(t, -1.0 - 2.0 * sv); };
    double v = near_origin_piece(D, t0, sv);
    QuadResult r = integrate(g, t0, T, pts, qi);
    v += r.value;
    inner_err += r.err_est;
    r = integrate(g, T, kInf, {}, qi);
    v += r.value;
    inner_err += r.err_est;
    // Interaction with the complement of the window, counted a second time.
    for (double side : {1.0, -1.0}) {
      const double t_out = side > 0.0 ? B - x : x - A;
      auto h = [&](double t) { return sq(x + side * t) * std::pow(t, -1.0 - 2.0 * sv); };
      std::vector<SingularPoint> hp;
      for (double p : feats) {
        const double t = side * (p - x);
        if (t > t_out && t < T) hp.push_back(kink(t));
      }
      for (double t = 4.0 * t_out; t < T; t *= 4.0) hp.push_back(kink(t));
      r = integrate(h, t_out, std::max(T, 2.0 * t_out), hp, qi);
      v += r.value;
      inner_err += r.err_est;
      r = integrate(h, std::max(T, 2.0 * t_out), kInf, {}, qi);
      v += r.value;
      inner_err += r.err_est;
    }
    return v;
  };

  std::vector<SingularPoint> xs = kinks_inside(feats, A, B);
  const QuadResult K = integrate(kinetic_density, A, B, xs, spec);
  auto pot = [&](double x) { return potential(f.profile->potential, F.u(x), 0); };
  QuadratureSpec qp = spec;
  qp.abs_tol = std::max(spec.abs_tol, 1e-3 * spec.rel_tol * eps);
  const QuadResult P = integrate(pot, A, B, xs, qp);

  EnergyReport rep;
  rep.scale = scalings(s, eps);
  const double g = gamma_ds(1, s);
  rep.kinetic = rep.scale.alpha * 0.25 * g * K.value;
  rep.potential_term = rep.scale.alpha * std::pow(eps, -2.0 * sv) * P.value;
  rep.total = rep.kinetic + rep.potential_term;
  rep.err_est = rep.scale.alpha * (0.25 * g * (K.err_est + (B - A) * inner_err / std::max<long>(1, K.evaluations)) +
                                   std::pow(eps, -2.0 * sv) * P.err_est);
  return rep;
}

EnergyReport g_energy(const FieldSpec& f, const DomainWindow& omega, const QuadratureSpec& spec) {
  f.validate();
  if (f.geometry.dim() != 1 || omega.kind != DomainWindow::Kind::Interval)
    throw UnsupportedGeometry("g_energy: one-dimensional fields on an interval window only");
  if (!f.mod && f.geometry.kind != SetDescriptor::Kind::HalfSpace)
    throw RegularityViolation("g_energy: the field must be C^2 (modification required)");
  if (!(f.eps > 0.0 && f.eps < 1.0)) throw DomainError("g_energy: eps must lie in (0,1)");
  const Profile& p = *f.profile;
  const FracOrder& s = p.s;
  const double sv = s.value();
  const double eps = f.eps;
  const double scale_pot = std::pow(eps, -2.0 * sv);
  const double A = omega.a, B = omega.b;
  const double delta = f.mod ? f.mod->delta : kInf;
  const Field1D F = f.as_field1d();

  std::vector<double> feats = F.features;
  for (double v : spatial_breaks(f.geometry, f.mod, eps)) feats.push_back(v);
  sort_unique(feats);

  QuadratureSpec qi = spec;
  qi.rel_tol = 0.1 * spec.rel_tol;
  qi.abs_tol = std::max(spec.abs_tol, 1e-3 * spec.rel_tol);
  qi.max_subdivisions = std::max(spec.max_subdivisions, 10000);
  QuadratureSpec qr = qi;
  qr.rel_tol = std::max(1e-8, qr.rel_tol);

  auto residual = [&](double x) {
    const double d = signed_distance(f.geometry, {x});
    if (std::fabs(d) < delta) {
      // Inside the collar u coincides with the half-line profile v attached
      // to the nearest boundary point; subtract it and add back its defect.
      const Projection pr = project_and_curvature(f.geometry, {x});
      const double e = pr.boundary[0];
      const double sg = pr.inward_normal[0];
      Field1D g = F;
      g.u = [&F, &p, e, sg, eps](double y) { return F.u(y) - eval_profile(p, sg * (y - e), 0, eps); };
      g.lim_plus = F.lim_plus - sg;
      g.lim_minus = F.lim_minus + sg;
      const double lap = fraclap_1d(g, s, x, qi);
      const double defect = profile_residual_quadrature(p, sg * (x - e) / eps, qr);
      return lap + scale_pot * defect;
    }
    return fraclap_1d(F, s, x, qi) + scale_pot * potential(p.potential, F.u(x), 1);
  };
  auto sq = [&](double x) {
    const double r = residual(x);
    return r * r;
  };
  // Cells grow geometrically (ratio 1.2, innermost eps/4) away from every
  // boundary point. Each cell gets a 20-point Gauss rule; the 10-point rule
  // on the same cell supplies the error estimate.
  std::vector<double> edges = feats;
  edges.push_back(A);
  edges.push_back(B);
  for (double b : boundary_points(f.geometry)) {
    double r = 0.0, cell = 0.25 * eps;
    while (r < B - A) {
      edges.push_back(b + r);
      edges.push_back(b - r);
      r += cell;
      cell *= 1.2;
    }
  }
  std::vector<double> cells;
  for (double v : edges)
    if (v >= A && v <= B) cells.push_back(v);
  sort_unique(cells);
  using G20 = boost::math::quadrature::gauss<double, 20>;
  using G10 = boost::math::quadrature::gauss<double, 10>;
  std::vector<std::pair<double, double>> pieces;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i)
    if (cells[i + 1] - cells[i] > 1e-14 * (B - A)) pieces.emplace_back(cells[i], cells[i + 1]);
  std::vector<double> cell_err(pieces.size(), 0.0);
  const std::vector<double> cell_val = parallel_map(pieces.size(), [&](std::size_t i) {
    const auto [lo, hi] = pieces[i];
    const double fine = G20::integrate(sq, lo, hi);
    cell_err[i] = std::fabs(fine - G10::integrate(sq, lo, hi));
    return fine;
  });
  QuadResult I;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    I.value += cell_val[i];
    I.err_est += cell_err[i];
  }
  EnergyReport rep;
  rep.scale = scalings(s, eps);
  rep.kinetic = rep.scale.beta * I.value;
  rep.potential_term = 0.0;
  rep.total = rep.kinetic;
  rep.err_est = rep.scale.beta * I.err_est;
  return rep;
}

// ---------------------------------------------------------------------------
// Limit functional
// ---------------------------------------------------------------------------

double n_integrand(const SetDescriptor& E, const FracOrder& s, const std::optional<Modification>& mod, const Point& x,
                   const QuadratureSpec& spec) {
  if (mod) validate_eta(E, mod->eta, mod->delta);
  const double d = signed_distance(E, x);
  const bool plain = !mod || std::fabs(d) <= mod->delta;
  if (E.kind == SetDescriptor::Kind::HalfSpace) {
    if (plain) return 0.0;
  } else if (E.dim() == 1) {
    if (plain) return interval_residual_distance(as_intervals(E), s, x[0]);
  } else if (E.kind == SetDescriptor::Kind::Ball && E.dim() == 2) {
    const double rho = std::hypot(x[0] - E.center[0], x[1] - E.center[1]);
    return n_integrand_disk(E, s, mod, E.R - rho, spec);
  } else {
    throw UnsupportedGeometry("n_integrand: unsupported set");
  }
  const double beta = beta_modified(E, mod->eta, mod->delta, x);
  return fraclap_indicator(E, s, x, spec) - sgn(beta) * gamma_ds(1, s) / s.value() * std::pow(std::fabs(beta), -2.0 * s.value());
}

NReport n_functional(const SetDescriptor& E, const FracOrder& s, const std::optional<Modification>& mod,
                     const DomainWindow& omega, const QuadratureSpec& spec) {
  if (mod) validate_eta(E, mod->eta, mod->delta);
  NReport rep;
  if (E.kind == SetDescriptor::Kind::HalfSpace && !mod) return rep;

  if (E.dim() == 1) {
    if (omega.kind != DomainWindow::Kind::Interval) throw UnsupportedGeometry("n_functional: 1D sets need an interval window");
    if (E.kind == SetDescriptor::Kind::HalfSpace && mod && mod->eta.kind == EtaSpec::Kind::Optimal) return rep;
    const double A = omega.a, B = omega.b;
    std::vector<double> breaks = spatial_breaks(E, mod, 0.0);
    auto f = [&](double x) {
      const double n = n_integrand(E, s, mod, {x}, spec);
      return n * n;
    };
    const double collar = mod ? mod->delta : kInf;
    // Split the window into pieces inside and outside the collar.
    std::vector<double> cuts = {A, B};
    for (double b : breaks) {
      if (b > A && b < B) cuts.push_back(b);
    }
    sort_unique(cuts);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i], hi = cuts[i + 1];
      const double v = integrate(f, lo, hi, {}, spec).value;
      const double mid = 0.5 * (lo + hi);
      if (std::fabs(signed_distance(E, {mid})) < collar) {
        rep.collar += v;
      } else {
        rep.rest += v;
      }
    }
    rep.total = rep.collar + rep.rest;
    return rep;
  }

  if (E.kind != SetDescriptor::Kind::Ball || E.dim() != 2) throw UnsupportedGeometry("n_functional: unsupported set");
  if (omega.kind != DomainWindow::Kind::Annulus ||
      std::hypot(omega.center[0] - E.center[0], omega.center[1] - E.center[1]) > 1e-12 * E.R ||
      !(omega.r_in < E.R && omega.r_out > E.R))
    throw UnsupportedGeometry("n_functional: disks need a concentric annulus window around the circle");
  const double R = E.R;
  const double in_reach = R - omega.r_in, out_reach = omega.r_out - R;
  const double delta = mod ? mod->delta : kInf;
  QuadratureSpec qo = spec;
  qo.rel_tol = std::max(spec.rel_tol, 1e-7);
  QuadratureSpec qi = spec;
  qi.rel_tol = std::max(0.01 * qo.rel_tol, 1e-9);
  qi.max_subdivisions = std::max(spec.max_subdivisions, 10000);
  // Shells reach down to the circle from both sides; the part of the
  // window beyond the collar is integrated directly.
  auto side = [&](double sg, double reach, double& collar, double& rest) {
    const double c = std::min(reach, delta);
    collar = disk_side_integral(E, s, mod, sg, c, qo, qi);
    rest = 0.0;
    if (reach > c) {
      auto f = [&](double tau) {
        const double n = n_integrand_disk(E, s, mod, sg * tau, qi);
        return 2.0 * M_PI * (R - sg * tau) * n * n;
      };
      std::vector<double> br = {mod->delta + mod->eta.blend_width, mod->delta + mod->eta.delta_prime};
      rest = integrate(f, c, reach, kinks_inside(br, c, reach), qo).value;
    }
  };
  double ci, ri, co, ro;
  side(1.0, in_reach, ci, ri);
  side(-1.0, out_reach, co, ro);
  rep.collar = ci + co;
  rep.rest = ri + ro;
  rep.total = rep.collar + rep.rest;
  return rep;
}

// ---------------------------------------------------------------------------
// Perimeters
// ---------------------------------------------------------------------------

double frac_perimeter(const SetDescriptor& E, double sigma, const DomainWindow& omega, const QuadratureSpec& spec) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("frac_perimeter: sigma must lie in (0,1)");
  if (E.dim() == 1 && E.kind != SetDescriptor::Kind::HalfSpace) {
    const auto iv = as_intervals(E);
    const auto comp = complement(iv);
    double A = -kInf, B = kInf;
    if (omega.kind == DomainWindow::Kind::Interval) {
      A = omega.a;
      B = omega.b;
    } else if (omega.kind != DomainWindow::Kind::Whole) {
      throw UnsupportedGeometry("frac_perimeter: 1D sets need an interval window");
    }
    double acc = 0.0;
    for (const auto& I : intersect(iv, A, B)) {
      for (const auto& J : comp) acc += pair_integral(I, J, sigma);
    }
    for (const auto& I : subtract(iv, A, B)) {
      for (const auto& J : intersect(comp, A, B)) acc += pair_integral(I, J, sigma);
    }
    return 2.0 * acc;
  }
  if (E.kind == SetDescriptor::Kind::Ball && E.dim() == 2) {
    if (omega.kind != DomainWindow::Kind::Whole) throw UnsupportedGeometry("frac_perimeter: disks only in the whole plane");
    const double R = E.R;
    // Per = 2 int_B (1/sigma) int_0^{2pi} r*(x, theta)^{-sigma} dtheta dx, in
    // the distance tau = R - |x| to the circle.
    auto inner = [&](double tau) {
      const double rho = R - tau;
      const double k = tau * (2.0 * R - tau);
      auto f = [&](double th) {
        const double c = std::cos(th), sn = std::sin(th);
        const double root = std::sqrt(std::max(0.0, R * R - rho * rho * sn * sn));
        const double r = c > 0.0 ? k / (rho * c + root) : root - rho * c;
        return std::pow(r, -sigma);
      };
      std::vector<SingularPoint> pts;
      const double w = std::sqrt(tau / R);
      for (double m : {1.0, 4.0, 16.0}) {
        if (m * w < M_PI) pts.push_back(kink(m * w));
      }
      return 2.0 * M_PI * rho * 2.0 * integrate(f, 0.0, M_PI, pts, spec).value / sigma;
    };
    QuadratureSpec qo = spec;
    qo.rel_tol = std::max(spec.rel_tol, 1e-9);
    return 2.0 * integrate(inner, 0.0, R, {algebraic(0.0, -sigma)}, qo).value;
  }
  throw UnsupportedGeometry("frac_perimeter: unsupported set");
}

MonteCarloEstimate frac_perimeter_disk_mc(double R, double sigma, std::int64_t samples, std::uint64_t seed) {
  if (!(sigma > 0.0 && sigma < 1.0) || samples < 2 || !(R > 0.0)) throw DomainError("frac_perimeter_disk_mc: bad arguments");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  // Distance to the circle drawn with density (1-sigma) tau^{-sigma} / R^{1-sigma},
  // direction uniform; the weight stays bounded.
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double u = 1.0 - U(rng);
    const double tau = R * std::exp(std::log(u) / (1.0 - sigma));
    const double th = 2.0 * M_PI * U(rng);
    const double rho = R - tau;
    const double c = std::cos(th), sn = std::sin(th);
    const double root = std::sqrt(std::max(0.0, R * R - rho * rho * sn * sn));
    // Exit distance in units of tau, finite even when tau underflows.
    const double q = c > 0.0 ? (2.0 * R - tau) / (rho * c + root) : (root - rho * c) / tau;
    const double value = 2.0 * 2.0 * M_PI * rho * std::pow(q, -sigma) / sigma * std::pow(R, 1.0 - sigma) * 2.0 * M_PI /
                         (1.0 - sigma);
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  MonteCarloEstimate est;
  est.samples = samples;
  est.value = mean;
  const double var = m2 / static_cast<double>(samples - 1);
  est.half_width = 1.959963984540054 * std::sqrt(var / static_cast<double>(samples));
  return est;
}

double perimeter_limit_constant(int d) {
  if (d == 1) return 2.0;  // (1-sigma) Per_sigma -> 2 per boundary point, from the closed form
  if (d < 1) throw DomainError("perimeter_limit_constant: d must be positive");
  const double k = d - 1.0;
  const double omega = 2.0 * std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k);  // |S^{d-2}|
  return 2.0 * omega / k;
}

ClassicalMeasures classical_perimeter_and_willmore(const SetDescriptor& E, const DomainWindow& omega) {
  ClassicalMeasures m;
  if (E.dim() == 1) {
    for (double b : boundary_points(E)) {
      if (omega.kind == DomainWindow::Kind::Whole || (omega.kind == DomainWindow::Kind::Interval && b > omega.a && b < omega.b)) {
        m.perimeter += 1.0;
      } else if (omega.kind != DomainWindow::Kind::Interval) {
        throw UnsupportedGeometry("classical perimeter: 1D sets need an interval window");
      }
    }
    return m;
  }
  if (E.kind == SetDescriptor::Kind::HalfSpace) {
    if (omega.kind == DomainWindow::Kind::Whole) {
      m.perimeter = kInf;
      return m;
    }
    if (E.dim() == 2 && omega.kind == DomainWindow::Kind::Box2D) {
      // Length of the line segment {<x,n> = offset} inside the box.
      const double n0 = E.normal[0], n1 = E.normal[1], o = E.offset;
      std::vector<Point> hits;
      auto add = [&](double x, double y) {
        if (x >= omega.a - 1e-14 && x <= omega.b + 1e-14 && y >= omega.c - 1e-14 && y <= omega.e + 1e-14) hits.push_back({x, y});
      };
      if (std::fabs(n1) > 1e-15) {
        add(omega.a, (o - n0 * omega.a) / n1);
        add(omega.b, (o - n0 * omega.b) / n1);
      }
      if (std::fabs(n0) > 1e-15) {
        add((o - n1 * omega.c) / n0, omega.c);
        add((o - n1 * omega.e) / n0, omega.e);
      }
      double len = 0.0;
      for (std::size_t i = 0; i < hits.size(); ++i)
        for (std::size_t j = i + 1; j < hits.size(); ++j)
          len = std::max(len, std::hypot(hits[i][0] - hits[j][0], hits[i][1] - hits[j][1]));
      m.perimeter = len;
      return m;
    }
    throw UnsupportedGeometry("classical perimeter: half-space window not supported");
  }
  if (E.kind == SetDescriptor::Kind::Ball && E.dim() == 2) {
    const double R = E.R;
    bool inside = false;
    switch (omega.kind) {
      case DomainWindow::Kind::Whole: inside = true; break;
      case DomainWindow::Kind::Box2D:
        inside = E.center[0] - R > omega.a && E.center[0] + R < omega.b && E.center[1] - R > omega.c && E.center[1] + R < omega.e;
        break;
      case DomainWindow::Kind::Annulus:
        inside = std::hypot(omega.center[0] - E.center[0], omega.center[1] - E.center[1]) <= 1e-12 * R && omega.r_in < R &&
                 omega.r_out > R;
        break;
      case DomainWindow::Kind::Interval: break;
    }
    if (!inside) throw UnsupportedGeometry("classical perimeter: the circle must lie inside the window");
    m.perimeter = 2.0 * M_PI * R;
    m.willmore = 2.0 * M_PI / R;
    return m;
  }
  throw UnsupportedGeometry("classical perimeter: unsupported set");
}

// ---------------------------------------------------------------------------
// c_*
// ---------------------------------------------------------------------------

FieldSpec recovery_field(std::shared_ptr<const Profile> p, const SetDescriptor& E, double eps, double delta,
                         double delta_prime) {
  FieldSpec f;
  f.geometry = E;
  f.eps = eps;
  f.mod = Modification{delta, eta_optimal(E, p->s, delta, delta_prime)};
  f.profile = std::move(p);
  return f;
}

CStarEstimate estimate_c_star(const FracOrder& s, const PotentialSpec& W, const std::vector<double>& eps_sweep,
                              const QuadratureSpec& spec, double length) {
  return estimate_c_star(std::make_shared<const Profile>(cached_profile(s, W)), eps_sweep, spec, length);
}

CStarEstimate estimate_c_star(std::shared_ptr<const Profile> p, const std::vector<double>& eps_sweep,
                              const QuadratureSpec& spec, double length) {
  const FracOrder& s = p->s;
  if (s.value() < 0.5 || s.value() >= 0.75) throw DomainError("estimate_c_star: s must lie in [1/2, 3/4)");
  if (eps_sweep.size() < 5) throw DomainError("estimate_c_star: need at least five eps values");
  const SetDescriptor E = SetDescriptor::interval_union({{0.0, length}});
  const DomainWindow omega = DomainWindow::interval(-2.0, 3.0);
  const std::vector<double> vals = parallel_map(eps_sweep.size(), [&](std::size_t i) {
    const FieldSpec f = recovery_field(p, E, eps_sweep[i], 0.1, 0.01);
    return 0.5 * f_energy(f, omega, spec).total;
  });
  CStarEstimate out;
  if (s.regime() == Regime::Half) {
    out.fit = extrapolate(eps_sweep, vals, FitModel::Log);
  } else {
    out.fit = extrapolate(eps_sweep, vals, FitModel::PowerLaw, 2.0 * s.value() - 1.0);
  }
  out.c_star = out.fit.extrapolated;
  return out;
}

}  // namespace fracfield
