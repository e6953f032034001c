#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <memory>
#include <random>

#include "fracfield/asymptotics.hpp"

using namespace fracfield;
using doctest::Approx;

namespace {

std::shared_ptr<const Profile> prof(double s) {
  static const auto p3 = std::make_shared<const Profile>(cached_profile(FracOrder(0.3)));
  static const auto p6 = std::make_shared<const Profile>(cached_profile(FracOrder(0.6)));
  return s < 0.5 ? p3 : p6;
}

std::vector<double> geometric(double first, double ratio, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(first * std::pow(ratio, i));
  return v;
}

}  // namespace

TEST_CASE("extrapolate recovers synthetic models") {
  const auto eps = geometric(0.1, 0.5, 6);
  std::vector<double> v;
  for (double e : eps) v.push_back(3.0 + 2.0 * std::sqrt(e));
  const SweepResult r = extrapolate(eps, v, FitModel::PowerLaw);
  CHECK(r.extrapolated == Approx(3.0).epsilon(1e-8));
  CHECK(r.rate == Approx(0.5).epsilon(1e-6));
  CHECK(r.residual <= 1e-8);

  std::vector<double> lg;
  for (double e : eps) lg.push_back(1.0 + 1.0 / std::fabs(std::log(e)));
  CHECK(extrapolate(eps, lg, FitModel::Log).extrapolated == Approx(1.0).epsilon(1e-10));

  const SweepResult fixed = extrapolate(eps, v, FitModel::PowerLaw, 0.5);
  CHECK(fixed.extrapolated == Approx(3.0).epsilon(1e-12));
  CHECK(fixed.coefficient == Approx(2.0).epsilon(1e-10));
}

TEST_CASE("extrapolate tolerates one percent noise") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-0.01, 0.01);
  const auto eps = geometric(0.1, 0.5, 8);
  std::vector<double> v;
  for (double e : eps) v.push_back((3.0 + 2.0 * std::sqrt(e)) * (1.0 + U(rng)));
  const SweepResult r = extrapolate(eps, v, FitModel::PowerLaw, std::nullopt, 0.5);
  CHECK(std::fabs(r.extrapolated - 3.0) <= 0.02 * 3.0);
}

TEST_CASE("extrapolate reports poor fits and bad sweeps") {
  const auto eps = geometric(0.1, 0.5, 5);
  const std::vector<double> zigzag = {1.0, 5.0, 0.5, 6.0, 0.2};
  try {
    extrapolate(eps, zigzag, FitModel::PowerLaw);
    FAIL("expected PoorFit");
  } catch (const PoorFit& e) {
    CHECK(e.result.residual > 0.1);
    CHECK(e.result.values.size() == 5);
  }
  CHECK_THROWS_AS(extrapolate({0.1, 0.05}, {1.0, 1.0}, FitModel::PowerLaw), DomainError);
  CHECK_THROWS_AS(extrapolate({0.1, 0.05, 0.05, 0.025}, {1.0, 1.0, 1.0, 1.0}, FitModel::PowerLaw), DomainError);
}

TEST_CASE("loglog slope") {
  const auto x = geometric(1.0, 0.3, 5);
  std::vector<double> y;
  for (double t : x) y.push_back(5.0 * std::pow(t, 1.7));
  CHECK(loglog_slope(x, y) == Approx(1.7).epsilon(1e-12));
}

TEST_CASE("curvature kernel term") {
  const ExpansionWindow w;
  CHECK(curvature_kernel_term(FracOrder(0.3), *prof(0.3), 0.05, 0.001, w, 1.0) == 0.0);
  CHECK(curvature_kernel_term(FracOrder(0.6), *prof(0.6), 0.05, 0.001, w, 0.0) == 0.0);
  const double a = curvature_kernel_term(FracOrder(0.6), *prof(0.6), 0.05, 0.0015, w, 1.0);
  const double b = curvature_kernel_term(FracOrder(0.6), *prof(0.6), 0.05, -0.0015, w, 1.0);
  CHECK(a > 0.0);
  CHECK(a == Approx(b).epsilon(1e-10));
  CHECK(curvature_kernel_term(FracOrder(0.6), *prof(0.6), 0.05, 0.0015, w, 2.0) == Approx(2.0 * a).epsilon(1e-14));
}

TEST_CASE("expansion window") {
  const ExpansionWindow w{10.0, 0.2, 10.0};
  CHECK(w.ell() == Approx(0.02));
  CHECK(w.collar() == Approx(0.002));
  CHECK_NOTHROW(w.validate(0.2));
  CHECK_THROWS_AS(w.validate(0.1), DomainError);
  CHECK_THROWS_AS((ExpansionWindow{5.0, 0.2, 10.0}).validate(0.2), DomainError);
}

TEST_CASE("remainder of the Fermi expansion in the flat proxy") {
  const auto p = prof(0.6);
  FieldSpec f;
  f.profile = p;
  f.geometry = SetDescriptor::ball({0.0, 0.0}, 1e3);
  f.mod = Modification{100.0, EtaSpec::constant(150.0, 150.0, 20.0)};
  f.eps = 0.02;
  const ExpansionWindow w{10.0, 1.0, 10.0};
  QuadratureSpec q;
  // The flat proxy is a stiff 2D integral; 1e-6 keeps it inside the subdivision budget.
  q.rel_tol = 1e-6;
  q.max_subdivisions = 20000;
  const RemainderParts r = fermi_remainder(f, {1e3 - 0.004, 0.0}, w, q);
  CHECK(r.remainder == Approx(r.full - r.one_d - r.curvature).epsilon(1e-14));
  CHECK(std::fabs(r.remainder) <= 1e-2);
  CHECK(std::fabs(r.one_d) > 1.0);
  CHECK_THROWS_AS(fermi_remainder(f, {1e3 - 0.5, 0.0}, w, q), DomainError);
}

TEST_CASE("formula for eta is an exact identity") {
  const Profile& p = *prof(0.6);
  const IdentitySides a = formula_eta_identity(p, 0.0, 1.0, 1.0);
  CHECK(std::fabs(a.lhs - a.rhs) <= 1e-8);
  // w_eps is odd, so at z0 = 0 the left side is 2 int_0^l w_eps(z)/z dz
  const double direct = 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                  [&](double z) { return eval_profile(p, z, 0, 0.5) / z; }, 0.0, 0.8, 25, 1e-13);
  CHECK(formula_eta_identity(p, 0.0, 0.8, 0.5).lhs == Approx(direct).epsilon(1e-8));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> Z(-0.5, 0.5), L(0.05, 2.0), E(0.01, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const IdentitySides r = formula_eta_identity(p, Z(rng), L(rng), E(rng));
    worst = std::max(worst, std::fabs(r.lhs - r.rhs));
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("log expansion integrals") {
  for (double d : {1.0, 10.0, 1e3}) {
    const double closed = 2.0 * (std::asinh(d) - d / std::sqrt(1.0 + d * d));
    CHECK(log_expansion_integral(2, d, LogVariant::Moment2) == Approx(closed).epsilon(1e-10));
  }
  const double s2 = (log_expansion_integral(2, 1e4, LogVariant::Moment2) - log_expansion_integral(2, 1e3, LogVariant::Moment2)) /
                    std::log(10.0);
  CHECK(s2 == Approx(2.0).epsilon(0.02));
  CHECK_THROWS_AS(log_expansion_integral(2, 0.5, LogVariant::Moment2), DomainError);
  CHECK_THROWS_AS(log_expansion_integral(4, 2.0, LogVariant::Moment2), DomainError);
}

TEST_CASE("willmore limit quantity") {
  const FracOrder s(0.6);
  const Profile& p = *prof(0.6);
  double prev = 0.0;
  for (double ell : {0.005, 0.01, 0.02, 0.04}) {
    const double Q = willmore_limit_quantity(s, p, 0.02, ell, 0.1);
    CHECK(Q >= prev);
    prev = Q;
  }
  CHECK(prev > 0.0);
  CHECK_THROWS_AS(willmore_limit_quantity(s, p, 0.02, 0.2, 0.1), DomainError);
}

TEST_CASE("potential limit ratio") {
  const Profile& p6 = *prof(0.6);
  for (double z : {0.2, 0.5, 1.3}) {
    CHECK(potential_limit_ratio(FracOrder(0.6), p6, 0.01, z) == Approx(potential_limit_ratio(FracOrder(0.6), p6, 0.01, -z)).epsilon(1e-12));
  }
  CHECK(std::fabs(potential_limit_ratio(FracOrder(0.3), *prof(0.3), 1e-3, 1.0) - 1.0) <= 0.03);
  CHECK_THROWS_AS(potential_limit_ratio(FracOrder(0.6), p6, 0.01, 0.05), DomainError);
}

TEST_CASE("double integral of the one-dimensional reduction") {
  const FracOrder s(0.3);
  const Profile& p = *prof(0.3);
  const double a = claim5_double_integral(s, p, 0.01, 0.5);
  CHECK(a > 0.0);
  CHECK(claim5_double_integral(s, p, 0.02, 0.5) > a);
  CHECK_THROWS_AS(claim5_double_integral(FracOrder(0.6), *prof(0.6), 0.01, 0.5), DomainError);
}
