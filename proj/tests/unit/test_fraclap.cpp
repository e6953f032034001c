#include <doctest.h>

#include <cmath>
#include <memory>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracfield/fraclap.hpp"
#include "fracfield/profile.hpp"

using namespace fracfield;
using doctest::Approx;

namespace {

double cs(const FracOrder& s) { return gamma_ds(1, s) / s.value(); }

std::shared_ptr<const Profile> profile06() {
  static const auto p = std::make_shared<const Profile>(cached_profile(FracOrder(0.6)));
  return p;
}

Field1D smooth(std::function<double(double)> u, double lm, double lp) {
  Field1D f;
  f.u = std::move(u);
  f.lim_minus = lm;
  f.lim_plus = lp;
  return f;
}

}  // namespace

TEST_CASE("fraclap_1d of a constant vanishes") {
  const Field1D c = smooth([](double) { return 0.7; }, 0.7, 0.7);
  for (double s : {0.3, 0.5, 0.8}) CHECK(std::fabs(fraclap_1d(c, FracOrder(s), 0.4)) <= 1e-14);
}

TEST_CASE("fraclap_1d of cos at s = 1/2 is cos") {
  Field1D f = smooth([](double t) { return std::cos(t); }, 0.0, 0.0);
  f.has_limits = false;
  QuadratureSpec q;
  q.tail_cutoff = 2e3;
  q.max_subdivisions = 20000;
  CHECK(std::fabs(fraclap_1d(f, FracOrder(1, 2), 0.0, q) - 1.0) <= 1e-6);
}

TEST_CASE("fraclap_1d is linear") {
  const FracOrder s(0.4);
  const Field1D u = smooth([](double t) { return std::tanh(t); }, -1.0, 1.0);
  const Field1D v = smooth([](double t) { return std::atan(2.0 * t); }, -M_PI / 2, M_PI / 2);
  const Field1D w = smooth([&](double t) { return 2.0 * std::tanh(t) - 0.5 * std::atan(2.0 * t); }, -2.0 + M_PI / 4,
                           2.0 - M_PI / 4);
  for (double x : {-1.3, 0.0, 0.25, 2.0}) {
    const double lhs = fraclap_1d(w, s, x);
    const double rhs = 2.0 * fraclap_1d(u, s, x) - 0.5 * fraclap_1d(v, s, x);
    CHECK(std::fabs(lhs - rhs) <= 1e-8 * std::max(1.0, std::fabs(rhs)));
  }
}

TEST_CASE("fraclap_1d refuses points outside the declared C2 window") {
  Field1D f = smooth([](double t) { return std::fabs(t) < 1.0 ? t : (t > 0 ? 1.0 : -1.0); }, -1.0, 1.0);
  f.c2_lo = -1.0;
  f.c2_hi = 1.0;
  CHECK_THROWS_AS(fraclap_1d(f, FracOrder(0.5), 1.5), RegularityViolation);
  CHECK_NOTHROW(fraclap_1d(f, FracOrder(0.5), 0.2));
}

TEST_CASE("the profile field solves the eps-equation") {
  const auto p = profile06();
  for (double eps : {1.0, 0.1}) {
    for (double x : {0.05 * eps, 0.5 * eps, 3.0 * eps}) {
      // off-node points: the interpolation defect between nodes is a few tolerances
      const double lhs = fraclap_profile(*p, x, eps);
      const double rhs = -std::pow(eps, -1.2) * potential(p->potential, eval_profile(*p, x, 0, eps), 1);
      CHECK(std::fabs(lhs - rhs) <= 1e-4 * std::pow(eps, -1.2));
    }
  }
}

TEST_CASE("indicator of a half-space") {
  const SetDescriptor H = SetDescriptor::halfspace({1.0, 0.0});
  CHECK(fraclap_indicator(H, FracOrder(1, 2), {1.0, 3.0}) == Approx(2.0 / M_PI).epsilon(1e-12));
  CHECK(fraclap_indicator(H, FracOrder(1, 2), {-1.0, 0.0}) == Approx(-2.0 / M_PI).epsilon(1e-12));
  CHECK_THROWS_AS(fraclap_indicator(H, FracOrder(1, 2), {0.0, 1.0}), OnBoundary);
  for (double s : {0.3, 0.5, 0.6}) {
    for (double d : {0.1, 0.5, 1.0, 2.0}) {
      const double closed = cs(FracOrder(s)) * std::pow(d, -2.0 * s);
      const double brute = halfplane_indicator_bruteforce(FracOrder(s), d);
      CHECK(std::fabs(brute - closed) / closed <= 1e-6);
    }
  }
}

TEST_CASE("indicator of an interval") {
  const FracOrder s(0.35);
  const double L = 3.0;
  const SetDescriptor I = SetDescriptor::interval_union({{0.0, L}});
  CHECK(fraclap_indicator(I, s, {L / 2}) == Approx(2.0 * cs(s) * std::pow(L / 2, -0.7)).epsilon(1e-13));
  // scaling covariance is exact for the closed form
  const SetDescriptor I2 = SetDescriptor::interval_union({{0.0, 2.0 * L}});
  CHECK(fraclap_indicator(I2, s, {1.4}) == Approx(std::pow(2.0, -0.7) * fraclap_indicator(I, s, {0.7})).epsilon(1e-13));
  CHECK(fraclap_indicator(I, s, {-0.5}) < 0.0);
}

TEST_CASE("indicator of a disk") {
  const FracOrder s(0.35);
  const SetDescriptor B = SetDescriptor::ball({0.0, 0.0}, 1.0);
  const double out = fraclap_indicator(B, s, {1.3, 0.0});
  // The disk sits inside the half-plane, so it sees less of the opposite phase.
  CHECK(out < 0.0);
  CHECK(std::fabs(out) < cs(s) * std::pow(0.3, -0.7));
  // Independent oracle: chords through the disk seen from x, integrated in the angle.
  auto chord = [&](double ph) {
    const double rho = 1.3, root = std::sqrt(std::max(0.0, 1.0 - rho * rho * std::sin(ph) * std::sin(ph)));
    const double c = rho * std::cos(ph);
    return (std::pow(c - root, -0.7) - std::pow(c + root, -0.7)) / 0.7;
  };
  const double oracle =
      -4.0 * gamma_ds(2, s) * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(chord, 0.0, std::asin(1.0 / 1.3), 20, 1e-12);
  CHECK(std::fabs(out - oracle) <= 1e-4 * std::fabs(oracle));
  QuadratureSpec fine;
  fine.rel_tol = 1e-12;
  CHECK(std::fabs(fraclap_indicator(B, s, {1.3, 0.0}, fine) - out) <= 1e-4 * std::fabs(out));

  double lo = 1e300, hi = -1e300;
  for (int k = 0; k < 8; ++k) {
    const double th = 0.37 + k * M_PI / 4;
    const double v = fraclap_indicator(B, s, {0.6 * std::cos(th), 0.6 * std::sin(th)});
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo <= 1e-6);

  const SetDescriptor B3 = SetDescriptor::ball({0.0, 0.0}, 3.0);
  const double a = fraclap_indicator(B, s, {0.4, 0.2});
  const double b = fraclap_indicator(B3, s, {1.2, 0.6});
  CHECK(std::fabs(b - std::pow(3.0, -0.7) * a) <= 1e-5 * std::fabs(b));
}

TEST_CASE("reduction kernel") {
  const KernelCheck a = reduction_kernel(2, FracOrder(1, 2), 1.0);
  CHECK(a.closed_form == Approx(2.0).epsilon(1e-13));
  CHECK(a.quadrature == Approx(2.0).epsilon(1e-9));
  CHECK(reduction_kernel(2, FracOrder(1, 2), 2.0).closed_form == Approx(0.5).epsilon(1e-13));
  const KernelCheck c = reduction_kernel(3, FracOrder(0.3), 1.0);
  CHECK(std::fabs(c.quadrature - gamma_ds(1, FracOrder(0.3)) / gamma_ds(3, FracOrder(0.3))) <= 1e-8);
  CHECK(std::fabs(c.quadrature - c.closed_form) <= 1e-8);
}

TEST_CASE("phase field over a very large disk reduces to the one-dimensional profile") {
  const auto p = profile06();
  const double R = 1e3, eps = 0.05;
  FieldSpec f;
  f.profile = p;
  f.geometry = SetDescriptor::ball({0.0, 0.0}, R);
  f.mod = Modification{100.0, EtaSpec::constant(150.0, 150.0, 20.0)};
  f.eps = eps;
  const double z0 = 0.03;
  QuadratureSpec q;
  q.rel_tol = 1e-7;
  q.max_subdivisions = 20000;
  const double two = fraclap_phasefield_2d(f, {R - z0, 0.0}, q);
  const double one = fraclap_profile(*p, z0, eps);
  CHECK(std::fabs(two - one) <= 1e-4 * std::max(1.0, std::fabs(one)));
  // At the circle the locally odd field gives a value of curvature size only.
  QuadratureSpec loose = q;
  loose.rel_tol = 1e-6;
  CHECK(std::fabs(fraclap_phasefield_2d(f, {R, 0.0}, loose)) <= 1e-2);

  FieldSpec plain = f;
  plain.mod.reset();
  CHECK_THROWS_AS(fraclap_phasefield_2d(plain, {R - z0, 0.0}, q), RegularityViolation);
}
