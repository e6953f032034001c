#include <doctest.h>

#include <cmath>

#include "fracfield/fraclap.hpp"
#include "fracfield/profile.hpp"

using namespace fracfield;
using doctest::Approx;

namespace {

const Profile& coarse06() {
  static const Profile p = cached_profile(FracOrder(0.6), PotentialSpec::quartic(), ProfileGrid{50.0, 0.05}, 1e-5);
  return p;
}

const Profile& default_profile(double s) {
  static const Profile p3 = cached_profile(FracOrder(0.3));
  static const Profile p6 = cached_profile(FracOrder(0.6));
  return s < 0.5 ? p3 : p6;
}

}  // namespace

TEST_CASE("solve_profile preconditions") {
  CHECK_THROWS_AS(solve_profile(FracOrder(0.6), PotentialSpec::quartic(), ProfileGrid{20.0, 0.05}), DomainError);
  CHECK_THROWS_AS(solve_profile(FracOrder(0.6), PotentialSpec::quartic(), ProfileGrid{50.0, 0.2}), DomainError);
  CHECK_THROWS_AS(solve_profile(FracOrder(0.6), PotentialSpec::quartic(), ProfileGrid{50.0, 0.05}, 1e-9),
                  DomainError);
}

TEST_CASE("profile at s = 0.6 with Z = 50, h = 0.05 meets its residual certificate") {
  const Profile& p = coarse06();
  CHECK(p.residual_sup <= 1e-5);
  CHECK(p.tail_coeff == Approx(gamma_ds(1, FracOrder(0.6)) / (0.6 * 8.0)).epsilon(1e-14));
  // Independent re-evaluation of the residual at a spread of nodes.
  QuadratureSpec q;
  q.rel_tol = 1e-9;
  for (int i : {1, 3, 10, 40, 200, 600, 999}) CHECK(std::fabs(profile_residual_quadrature(p, i * p.h, q)) <= 1e-5);
}

TEST_CASE("profile structure: odd, increasing, bounded") {
  for (double s : {0.3, 0.6}) {
    const Profile& p = default_profile(s);
    CHECK(p.w[0] == 0.0);
    for (std::size_t i = 1; i < p.w.size(); ++i) {
      CHECK(p.w[i] > p.w[i - 1]);
      CHECK(std::fabs(p.w[i]) < 1.0);
    }
    for (double z : {0.013, 0.5, 3.7, 49.0, 75.0, 500.0}) {
      CHECK(eval_profile(p, z, 0) * z > 0.0);
      CHECK(eval_profile(p, -z, 0) == -eval_profile(p, z, 0));
      CHECK(eval_profile(p, z, 1) > 0.0);
      CHECK(eval_profile(p, -z, 0, 0.3) == -eval_profile(p, z, 0, 0.3));
    }
    CHECK(eval_profile(p, 0.0, 0) == 0.0);
    CHECK(eval_profile(p, 0.0, 0, 0.01) == 0.0);
  }
}

TEST_CASE("rescaled evaluation") {
  const Profile& p = default_profile(0.6);
  CHECK(eval_profile(p, 0.02, 0, 0.1) == Approx(eval_profile(p, 0.2, 0)).epsilon(1e-14));
  CHECK(eval_profile(p, 0.02, 1, 0.1) == Approx(10.0 * eval_profile(p, 0.2, 1)).epsilon(1e-14));
  CHECK(eval_profile(p, 0.02, 2, 0.1) == Approx(100.0 * eval_profile(p, 0.2, 2)).epsilon(1e-14));
  // Beyond Z the matched tail sgn(z) - c eps^{2s} z |z|^{-1-2s} is used.
  const double z = 8.0, eps = 0.1;
  CHECK(eval_profile(p, z, 0, eps) == Approx(1.0 - p.tail_coeff * std::pow(eps, 1.2) * std::pow(z, -1.2)).epsilon(1e-14));
}

TEST_CASE("moderate s close to one still gives a monotone converged profile") {
  const Profile p = cached_profile(FracOrder(0.95), PotentialSpec::quartic(), ProfileGrid{30.0, 0.05}, 1e-5);
  CHECK(p.residual_sup <= 1e-5);
  for (std::size_t i = 1; i < p.w.size(); ++i) CHECK(p.w[i] > p.w[i - 1]);
}

TEST_CASE("tail formula agrees with a solve on a doubled domain") {
  const Profile& p = coarse06();
  const Profile big = cached_profile(FracOrder(0.6), PotentialSpec::quartic(), ProfileGrid{100.0, 0.05}, 1e-5);
  const double z = 2.0 * p.Z;
  const double tail = p.tail_coeff * std::pow(z, -1.2);
  CHECK(std::fabs((1.0 - eval_profile(big, z, 0)) - tail) / tail <= 0.1);
  CHECK(std::fabs((1.0 - eval_profile(p, z, 0)) - tail) / tail <= 1e-11);

  const ProfileDiagnostics d1 = verify_profile(p), d2 = verify_profile(big);
  CHECK(std::isfinite(d1.decay_constant));
  CHECK(std::fabs(d2.decay_constant / d1.decay_constant - 1.0) <= 0.2);
}

TEST_CASE("diagnostics: decay bound and tail match") {
  const Profile& p3 = default_profile(0.3);
  // w'(z) (1 + |z|^{1+2s}) stays bounded: no growth towards the end of the
  // grid, apart from the last unit where the pinned end value is matched.
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < p3.w.size(); ++i) {
    const double z = i * p3.h;
    if (z > p3.Z - 1.0) break;
    const double v = eval_profile(p3, z, 1) * (1.0 + std::pow(z, 1.6));
    CHECK(std::isfinite(v));
    if (z >= 0.25 * p3.Z && z < 0.5 * p3.Z) early = std::max(early, v);
    if (z >= 0.5 * p3.Z) late = std::max(late, v);
  }
  CHECK(late <= 1.5 * early);
  CHECK(std::isfinite(verify_profile(p3).decay_constant));
  CHECK(verify_profile(default_profile(0.6)).tail_match <= 0.05);
  CHECK(verify_profile(p3).tail_match <= 0.05);
}

TEST_CASE("scaling identity of the eps-equation at the collocation nodes") {
  for (double s : {0.3, 0.6}) {
    const Profile& p = default_profile(s);
    QuadratureSpec q;
    for (double eps : {1.0, 0.5, 0.25}) {
      for (int i : {1, 4, 20, 40, 200, 1000, 1800}) {
        const double x = eps * i * p.h;
        const double res = fraclap_profile(p, x, eps, q) + std::pow(eps, -2.0 * s) * potential(p.potential, eval_profile(p, x, 0, eps), 1);
        CHECK(std::fabs(res) <= 1e-5 * std::pow(eps, -2.0 * s));
      }
    }
  }
}

TEST_CASE("grid refinement changes shared nodes by at most four tolerances (s = 0.6)") {
  const Profile a = cached_profile(FracOrder(0.6), PotentialSpec::quartic(), ProfileGrid{30.0, 0.025}, 1e-5);
  const Profile b = cached_profile(FracOrder(0.6), PotentialSpec::quartic(), ProfileGrid{30.0, 0.0125}, 1e-5);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.w.size(); ++i) worst = std::max(worst, std::fabs(a.w[i] - b.w[2 * i]));
  CHECK(worst <= 4e-5);
}

TEST_CASE("serialization round trip") {
  const Profile& p = default_profile(0.3);
  const Profile q = deserialize_profile(serialize_profile(p));
  CHECK(q.s.num() == p.s.num());
  CHECK(q.s.den() == p.s.den());
  CHECK(q.h == p.h);
  CHECK(q.Z == p.Z);
  CHECK(q.tail_coeff == p.tail_coeff);
  CHECK(q.residual_sup == p.residual_sup);
  REQUIRE(q.w.size() == p.w.size());
  for (std::size_t i = 0; i < p.w.size(); i += 97) {
    CHECK(q.w[i] == p.w[i]);
    CHECK(q.m[i] == p.m[i]);
  }
  CHECK_THROWS_AS(deserialize_profile("garbage"), Error);
}
