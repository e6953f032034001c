#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "fracfield/foundations.hpp"

using namespace fracfield;
using doctest::Approx;

TEST_CASE("FracOrder recognises the critical orders exactly") {
  CHECK(FracOrder(0.5).regime() == Regime::Half);
  CHECK(FracOrder::parse("1/2").regime() == Regime::Half);
  CHECK(FracOrder::parse("3/4").regime() == Regime::ThreeQuarter);
  CHECK(FracOrder(0.75).regime() == Regime::ThreeQuarter);
  CHECK(FracOrder(0.3).regime() == Regime::Sub);
  CHECK(FracOrder(0.6).regime() == Regime::Mid);
  CHECK(FracOrder(0.8).regime() == Regime::Super);
  CHECK(FracOrder(0.6).num() == 3);
  CHECK(FracOrder(0.6).den() == 5);
  CHECK_THROWS_AS(FracOrder(1.0), DomainError);
  CHECK_THROWS_AS(FracOrder(0, 3), DomainError);
  CHECK_THROWS_AS(FracOrder::parse("1/x"), DomainError);
}

TEST_CASE("gamma_ds special values") {
  CHECK(gamma_ds(1, FracOrder(1, 2)) == Approx(1.0 / M_PI).epsilon(1e-13));
  CHECK(gamma_ds(2, FracOrder(1, 2)) == Approx(1.0 / (2.0 * M_PI)).epsilon(1e-13));
  CHECK(gamma_ds(1, FracOrder(1, 2)) / gamma_ds(2, FracOrder(1, 2)) == Approx(2.0).epsilon(1e-13));
  CHECK_THROWS_AS(gamma_ds(0, FracOrder(1, 2)), DomainError);
  CHECK_THROWS_AS(gamma_ds(4, FracOrder(1, 2)), DomainError);
}

TEST_CASE("gamma_ds matches an independent Gamma evaluation on a (d, s) grid") {
  for (int d = 1; d <= 3; ++d) {
    for (int k = 1; k <= 19; ++k) {
      const double s = 0.05 * k;
      const double ref = s * std::pow(4.0, s) * boost::math::tgamma(0.5 * d + s) /
                         (std::pow(M_PI, 0.5 * d) * boost::math::tgamma(1.0 - s));
      CHECK(std::fabs(gamma_ds(d, FracOrder(s)) - ref) / ref < 1e-12);
    }
  }
  CHECK(std::fabs(lanczos_gamma(0.3) - boost::math::tgamma(0.3)) / boost::math::tgamma(0.3) < 1e-13);
}

TEST_CASE("scalings follow the case tables") {
  const ScalePair a = scalings(FracOrder(0.6), 0.1);
  CHECK(a.alpha == Approx(std::pow(0.1, 0.2)).epsilon(1e-14));
  CHECK(a.alpha == Approx(0.6309573).epsilon(1e-7));
  CHECK(a.beta == 1.0);
  CHECK(scalings(FracOrder(1, 2), std::exp(-1.0)).alpha == Approx(1.0).epsilon(1e-14));
  const ScalePair c = scalings(FracOrder(0.3), 0.01);
  CHECK(c.alpha == 1.0);
  CHECK(c.beta == 1.0);
  CHECK(scalings(FracOrder(3, 4), 0.01).beta == Approx(1.0 / std::log(100.0)).epsilon(1e-14));
  CHECK(scalings(FracOrder(0.9), 0.01).beta == Approx(std::pow(0.01, 0.6)).epsilon(1e-14));
  CHECK_THROWS_AS(scalings(FracOrder(0.6), 1.0), DomainError);
  CHECK_THROWS_AS(scalings(FracOrder(0.6), 0.0), DomainError);
}

TEST_CASE("scalings ratio is exact in the power-law regimes") {
  const FracOrder s(0.9);
  const ScalePair a = scalings(s, 0.02), b = scalings(s, 0.005);
  CHECK(a.alpha / b.alpha == Approx(std::pow(4.0, 0.8)).epsilon(1e-14));
  CHECK(a.beta / b.beta == Approx(std::pow(4.0, 0.6)).epsilon(1e-14));
}

TEST_CASE("quartic potential values and derivatives") {
  const PotentialSpec W = PotentialSpec::quartic();
  CHECK(potential(W, 0.0, 0) == 1.0);
  CHECK(potential(W, 1.0, 1) == 0.0);
  CHECK(potential(W, 1.0, 2) == 8.0);
  CHECK(W.lambda == 8.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double u = U(rng);
    for (int k = 1; k <= 3; ++k) {
      const double fd = (potential(W, u + h, k - 1) - potential(W, u - h, k - 1)) / (2.0 * h);
      CHECK(std::fabs(fd - potential(W, u, k)) < 1e-6 * std::max(1.0, std::fabs(fd)));
    }
  }
}

TEST_CASE("custom potentials are validated") {
  // 2 (1 - u^2)^2 written out
  const PotentialSpec W = PotentialSpec::custom({2.0, 0.0, -4.0, 0.0, 2.0});
  CHECK(W.lambda == Approx(16.0));
  CHECK_THROWS_AS(PotentialSpec::custom({1.0, 0.5, -2.0, 0.0, 1.0}), DomainError);  // odd term
  CHECK_THROWS_AS(PotentialSpec::custom({1.0, 0.0, -1.0}), DomainError);              // W(1) != 0 with W' != 0
}

TEST_CASE("sigma_w") {
  const PotentialSpec W = PotentialSpec::quartic();
  CHECK(sigma_w(W) == Approx(4.0 * std::sqrt(2.0) / 3.0).epsilon(1e-10));
  const double half = quad([&](double t) { return std::sqrt(2.0 * potential(W, t, 0)); }, 0.0, 1.0);
  CHECK(sigma_w(W) == Approx(2.0 * half).epsilon(1e-10));
  CHECK(sigma_w(W.scaled(4.0)) == Approx(2.0 * sigma_w(W)).epsilon(1e-10));
}

TEST_CASE("integrate handles endpoint, interior and infinite singular behaviour") {
  CHECK(quad([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0, {algebraic(0.0, -0.5)}) == Approx(2.0).epsilon(1e-10));
  CHECK(quad([](double t) { return 1.0 / (t * t); }, 1.0, std::numeric_limits<double>::infinity()) ==
        Approx(1.0).epsilon(1e-10));
  CHECK(quad([](double t) { return std::pow(std::fabs(t), -0.4); }, -1.0, 1.0, {algebraic(0.0, -0.4)}) ==
        Approx(2.0 / 0.6).epsilon(1e-10));
  CHECK(quad([](double t) { return std::log(std::fabs(t)); }, -1.0, 2.0, {logarithmic(0.0)}) ==
        Approx(2.0 * std::log(2.0) - 2.0 - 1.0).epsilon(1e-10));
}

TEST_CASE("integrate reports its error estimate and is deterministic") {
  auto f = [](double t) { return std::exp(-t) * std::cos(5.0 * t); };
  const QuadResult a = integrate(f, 0.0, 3.0);
  const QuadResult b = integrate(f, 0.0, 3.0);
  CHECK(a.value == b.value);
  CHECK(a.err_est <= std::max(1e-13, 1e-10 * std::fabs(a.value)));
}

TEST_CASE("integrate throws NonConvergence with its best estimate") {
  QuadratureSpec q;
  q.max_subdivisions = 3;
  try {
    integrate([](double t) { return std::sin(1.0 / t); }, 1e-6, 1.0, {}, q);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(std::isfinite(e.best_estimate));
    CHECK(e.error_bound > 0.0);
  }
}

TEST_CASE("QuadratureSpec validation") {
  QuadratureSpec q;
  q.rel_tol = -1.0;
  CHECK_THROWS_AS(q.validate(), DomainError);
  QuadratureSpec r;
  r.tail_cutoff = 0.0;
  CHECK_THROWS_AS(r.validate(), DomainError);
}

TEST_CASE("parallel_map keeps slot order") {
  const auto v = parallel_map(50, [](std::size_t i) { return static_cast<double>(i * i); }, 4);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<double>(i * i));
}
