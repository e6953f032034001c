#include "fracfield/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/tools/minima.hpp>

namespace fracfield {

namespace {

struct LinearFit {
  double L = 0.0, C = 0.0, ssr = 0.0;
};

// Least squares v ~ L + C b.
LinearFit fit_affine(const std::vector<double>& b, const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double sbb = 0.0, sbv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sbb += (b[i] - mb) * (b[i] - mb);
    sbv += (b[i] - mb) * (v[i] - mv);
  }
  LinearFit f;
  f.C = sbb > 0.0 ? sbv / sbb : 0.0;
  f.L = mv - f.C * mb;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] - f.L - f.C * b[i];
    f.ssr += r * r;
  }
  return f;
}

LinearFit fit_power(const std::vector<double>& eps, const std::vector<double>& v, double p) {
  std::vector<double> b(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) b[i] = std::pow(eps[i], p);
  return fit_affine(b, v);
}

std::vector<SingularPoint> profile_breaks(const Profile& p, double eps, double shift, double lo, double hi) {
  std::vector<SingularPoint> out;
  for (double k : {0.0, 1.0, 4.0, 16.0, p.Z}) {
    for (double sg : {1.0, -1.0}) {
      const double t = sg * k * eps - shift;
      if (t > lo && t < hi) out.push_back(kink(t));
      if (k == 0.0) break;
    }
  }
  return out;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

void ExpansionWindow::validate(double delta0) const {
  require_positive(delta, "window delta");
  if (Lambda < Lambda0) throw DomainError("expansion window: Lambda below Lambda0");
  if (delta > delta0) throw DomainError("expansion window: delta exceeds the tubular limit");
  if (!(ell() < delta0)) throw DomainError("expansion window: l must stay below delta0");
}

SweepResult extrapolate(const std::vector<double>& eps, const std::vector<double>& values, FitModel model,
                        std::optional<double> fixed_rate, double max_residual) {
  if (eps.size() != values.size()) throw DomainError("extrapolate: size mismatch");
  const std::size_t need = (model == FitModel::PowerLaw && !fixed_rate) ? 3 : 2;
  if (eps.size() < need) throw DomainError("extrapolate: too few points");
  std::vector<std::size_t> order(eps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps[a] > eps[b]; });
  SweepResult r;
  for (std::size_t i : order) {
    if (!(eps[i] > 0.0)) throw DomainError("extrapolate: eps must be positive");
    r.eps.push_back(eps[i]);
    r.values.push_back(values[i]);
  }
  for (std::size_t i = 1; i < r.eps.size(); ++i) {
    if (!(r.eps[i] < r.eps[i - 1])) throw DomainError("extrapolate: eps values must be distinct");
  }

  LinearFit best;
  if (model == FitModel::Log) {
    if (r.eps.front() >= 1.0) throw DomainError("extrapolate: log model needs eps < 1");
    std::vector<double> b(r.eps.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 1.0 / std::fabs(std::log(r.eps[i]));
    best = fit_affine(b, r.values);
    r.rate = 0.0;
  } else if (fixed_rate) {
    best = fit_power(r.eps, r.values, *fixed_rate);
    r.rate = *fixed_rate;
  } else {
    double bp = 0.02, bs = std::numeric_limits<double>::infinity();
    for (double p = 0.02; p <= 4.0 + 1e-12; p += 0.02) {
      const double ssr = fit_power(r.eps, r.values, p).ssr;
      if (ssr < bs) {
        bs = ssr;
        bp = p;
      }
    }
    auto obj = [&](double p) { return fit_power(r.eps, r.values, p).ssr; };
    const auto m = boost::math::tools::brent_find_minima(obj, std::max(1e-3, bp - 0.02), bp + 0.02, 52);
    r.rate = m.second <= bs ? m.first : bp;
    best = fit_power(r.eps, r.values, r.rate);
  }
  r.extrapolated = best.L;
  r.coefficient = best.C;
  double vmax = 0.0;
  for (double v : r.values) vmax = std::max(vmax, std::fabs(v));
  r.residual = vmax > 0.0 ? std::sqrt(best.ssr / static_cast<double>(r.values.size())) / vmax : 0.0;
  if (r.residual > max_residual) throw PoorFit("extrapolate: relative residual above threshold", r);
  return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need two or more points");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_affine(lx, ly).C;
}

double curvature_kernel_term(const FracOrder& s, const Profile& p, double eps, double z0, const ExpansionWindow& w,
                             double H, const QuadratureSpec& spec) {
  const double ell = w.ell();
  if (std::fabs(z0) > 0.1 * ell * (1.0 + 1e-12)) throw DomainError("curvature term: |z0| must not exceed l/10");
  const double sv = s.value();
  if (s.regime() == Regime::Sub || H == 0.0) return 0.0;
  const double g = gamma_ds(1, s);
  std::vector<SingularPoint> pts = profile_breaks(p, eps, z0, -ell, ell);
  pts.erase(std::remove_if(pts.begin(), pts.end(), [](const SingularPoint& q) { return q.at == 0.0; }), pts.end());
  if (s.regime() == Regime::Half) {
    pts.push_back(logarithmic(0.0));
    auto f = [&](double z) { return eval_profile(p, z0 + z, 1, eps) * std::log(std::fabs(z)); };
    return -0.5 * g * H * integrate(f, -ell, ell, pts, spec).value;
  }
  pts.push_back(algebraic(0.0, 1.0 - 2.0 * sv));
  auto f = [&](double z) { return eval_profile(p, z0 + z, 1, eps) * std::pow(std::fabs(z), 1.0 - 2.0 * sv); };
  return 0.5 * g * H / (2.0 * sv - 1.0) * integrate(f, -ell, ell, pts, spec).value;
}

RemainderParts fermi_remainder(const FieldSpec& f, const Point& x0, const ExpansionWindow& w, const QuadratureSpec& spec) {
  f.validate();
  if (f.geometry.kind != SetDescriptor::Kind::Ball || f.geometry.dim() != 2)
    throw UnsupportedGeometry("fermi_remainder: 2D disk only");
  w.validate(f.geometry.delta0());
  const double z0 = signed_distance(f.geometry, x0);
  if (std::fabs(z0) > w.collar() * (1.0 + 1e-12)) throw DomainError("fermi_remainder: point outside the collar");
  const Projection pr = project_and_curvature(f.geometry, x0);
  RemainderParts out;
  out.full = fraclap_phasefield_2d(f, x0, spec);
  out.one_d = fraclap_profile(*f.profile, z0, f.eps);
  out.curvature = curvature_kernel_term(f.profile->s, *f.profile, f.eps, z0, w, pr.H);
  out.remainder = out.full - out.one_d - out.curvature;
  return out;
}

IdentitySides formula_eta_identity(const Profile& p, double z0, double ell, double eps, const QuadratureSpec& spec) {
  require_positive(ell, "l");
  require_positive(eps, "eps");
  const double wz = eval_profile(p, z0, 0, eps);
  std::vector<SingularPoint> pts = profile_breaks(p, eps, z0, -ell, ell);
  pts.erase(std::remove_if(pts.begin(), pts.end(), [](const SingularPoint& q) { return q.at == 0.0; }), pts.end());
  std::vector<SingularPoint> lp = pts;
  lp.push_back(kink(0.0));
  auto lf = [&](double z) { return (eval_profile(p, z0 + z, 0, eps) - wz) / z; };
  IdentitySides out;
  out.lhs = integrate(lf, -ell, ell, lp, spec).value;
  std::vector<SingularPoint> rp = pts;
  rp.push_back(logarithmic(0.0));
  auto rf = [&](double z) { return eval_profile(p, z0 + z, 1, eps) * std::log(std::fabs(z)); };
  out.rhs = (eval_profile(p, ell + z0, 0, eps) - eval_profile(p, z0 - ell, 0, eps)) * std::log(ell) -
            integrate(rf, -ell, ell, rp, spec).value;
  return out;
}

double log_expansion_integral(int d, double delta, LogVariant variant, double alpha, const QuadratureSpec& spec) {
  if (d != 2 && d != 3) throw DomainError("log_expansion_integral: d must be 2 or 3");
  if (delta < 1.0) throw DomainError("log_expansion_integral: delta must be at least 1");
  std::vector<SingularPoint> pts = {kink(1.0)};
  for (double t = 10.0; t < delta; t *= 10.0) pts.push_back(kink(t));
  if (d == 2) {
    auto f = [&](double y) {
      const double q = 1.0 + y * y;
      return variant == LogVariant::Moment2 ? y * y * std::pow(q, -1.5) : std::pow(y, 2.0 + alpha) * std::pow(q, -0.5 * (3.0 + alpha));
    };
    return 2.0 * integrate(f, 0.0, delta, pts, spec).value;
  }
  // Polar coordinates in the plane; the mean of cos^2 over the circle is 1/2.
  auto f = [&](double r) {
    const double q = 1.0 + r * r;
    return variant == LogVariant::Moment2 ? r * r * r * std::pow(q, -2.0)
                                          : std::pow(r, 3.0 + alpha) * std::pow(q, -0.5 * (4.0 + alpha));
  };
  const double ang = variant == LogVariant::Moment2 ? M_PI : 2.0 * M_PI;
  return ang * integrate(f, 0.0, delta, pts, spec).value;
}

double willmore_limit_quantity(const FracOrder& s, const Profile& p, double eps, double ell, double delta,
                               const QuadratureSpec& spec) {
  if (s.value() < 0.5) throw DomainError("willmore_limit_quantity: s must be at least 1/2");
  require_positive(eps, "eps");
  require_positive(ell, "l");
  if (!(ell < delta)) throw DomainError("willmore_limit_quantity: l must be below delta");
  const double sv = s.value();
  const bool log_kernel = s.regime() == Regime::Half;
  QuadratureSpec qi = spec;
  qi.rel_tol = 0.1 * spec.rel_tol;
  qi.max_subdivisions = std::max(spec.max_subdivisions, 10000);
  auto inner = [&](double z0) {
    std::vector<SingularPoint> pts = profile_breaks(p, eps, z0, -delta, delta);
    pts.erase(std::remove_if(pts.begin(), pts.end(), [](const SingularPoint& q) { return q.at == 0.0; }), pts.end());
    pts.push_back(log_kernel ? logarithmic(0.0) : algebraic(0.0, 1.0 - 2.0 * sv));
    auto f = [&](double z) {
      const double k = log_kernel ? std::log(std::fabs(z)) : std::pow(std::fabs(z), 1.0 - 2.0 * sv);
      return eval_profile(p, z0 + z, 1, eps) * k;
    };
    const double v = integrate(f, -delta, delta, pts, qi).value;
    return v * v;
  };
  // The inner integral is even in z0 because w' is even.
  std::vector<SingularPoint> outer;
  for (double k : {1.0, 4.0, 16.0, 64.0, 256.0, p.Z}) {
    if (k * eps < ell) outer.push_back(kink(k * eps));
  }
  return 2.0 * integrate(inner, 0.0, ell, outer, spec).value;
}

double potential_limit_ratio(const FracOrder& s, const Profile& p, double eps, double z) {
  require_positive(eps, "eps");
  if (std::fabs(z) < 0.1) throw DomainError("potential_limit_ratio: |z| must be at least 0.1");
  const double sv = s.value();
  const double num = std::pow(eps, -2.0 * sv) * potential(p.potential, eval_profile(p, z, 0, eps), 1);
  const double den = -gamma_ds(1, s) / sv * z * std::pow(std::fabs(z), -1.0 - 2.0 * sv);
  return num / den;
}

double claim5_double_integral(const FracOrder& s, const Profile& p, double eps, double ell, const QuadratureSpec& spec) {
  if (s.value() >= 0.5) throw DomainError("claim5_double_integral: s must be below 1/2");
  require_positive(eps, "eps");
  require_positive(ell, "l");
  const double sv = s.value();
  const double t0 = 1e-3 * eps;
  QuadratureSpec qo = spec;
  qo.rel_tol = std::max(spec.rel_tol, 1e-7);
  QuadratureSpec qi = spec;
  qi.rel_tol = 0.01 * qo.rel_tol;
  qi.abs_tol = std::max(spec.abs_tol, 1e-14);
  qi.max_subdivisions = std::max(spec.max_subdivisions, 10000);
  // Both variables in [0, l]: symmetric in (t, z), so integrate over t = z + u
  // with u > 0 and double.
  auto inner = [&](double z) {
    const double U = ell - z;
    if (!(U > 0.0)) return 0.0;
    const double wz = eval_profile(p, z, 0, eps);
    auto D = [&](double u) {
      const double dv = eval_profile(p, z + u, 0, eps) - wz;
      return dv * dv;
    };
    auto g = [&](double u) {
      const double v = D(u);
      return v == 0.0 ? 0.0 : v * std::pow(u, -1.0 - 2.0 * sv);
    };
    if (U <= 3.0 * t0) return integrate(g, 0.0, U, {algebraic(0.0, 1.0 - 2.0 * sv)}, qi).value;
    std::vector<SingularPoint> pts;
    for (double t = 4.0 * t0; t < U; t *= 4.0) pts.push_back(kink(t));
    for (double k : {1.0, 4.0, 16.0, p.Z}) {
      const double u = k * eps - z;
      if (u > t0 && u < U) pts.push_back(kink(u));
    }
    return near_origin_piece(D, t0, sv) + integrate(g, t0, U, pts, qi).value;
  };
  std::vector<SingularPoint> outer;
  for (double k : {1.0, 4.0, 16.0, 64.0, p.Z}) {
    if (k * eps < ell) outer.push_back(kink(k * eps));
  }
  if (ell > 3.0 * t0) outer.push_back(kink(ell - 3.0 * t0));
  return 2.0 * integrate(inner, 0.0, ell, outer, qo).value;
}

}  // namespace fracfield
