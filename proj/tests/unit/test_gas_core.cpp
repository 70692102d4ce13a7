#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "wedge/errors.hpp"
#include "wedge/gas_core.hpp"

using namespace wedge;

TEST_CASE("pi vanishes at the reference density") {
  const GasModel m(1.4, 1.0, 1.0);
  CHECK(pi_of_rho(m, 1.0) == 0.0);
  CHECK(pi_inverse(m, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("isothermal pi is the logarithm") {
  const GasModel m(1.0, 1.0, 1.0);
  CHECK(pi_of_rho(m, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("pi at rho = 2 matches the closed form") {
  const GasModel m(1.4, 1.0, 1.0);
  const double expected = (std::pow(2.0, 0.4) - 1.0) / 0.4;
  CHECK(oracle::rel_err(pi_of_rho(m, 2.0), expected) < 1e-14);
}

TEST_CASE("nonpositive density is a domain error") {
  const GasModel m(1.4, 1.0, 1.0);
  CHECK_THROWS_AS(pi_of_rho(m, 0.0), DomainError);
  CHECK_THROWS_AS(pi_of_rho(m, -1.0), DomainError);
  CHECK_THROWS_AS(GasModel(0.9, 1.0, 1.0), DomainError);
}

TEST_CASE("pi inverse approaches vacuum at -c0^2/(gamma-1)") {
  const GasModel m(1.4, 1.0, 1.0);
  CHECK(pi_inverse(m, -2.5 + 1e-6) > 0.0);
  CHECK(pi_inverse(m, -2.5 + 1e-6) < 1e-3);
  CHECK_THROWS_AS(pi_inverse(m, -2.5), VacuumError);
  CHECK_THROWS_AS(pi_inverse(m, -3.0), VacuumError);
  // The isothermal inverse is defined everywhere.
  CHECK(pi_inverse(GasModel(1.0, 1.0, 1.0), -50.0) > 0.0);
}

TEST_CASE("pi round trip over six decades of density") {
  // For larger gamma, rho^(gamma-1) at rho = 1e-3 sits close to the vacuum
  // bound and the round trip loses digits to conditioning, not to the code.
  const std::pair<double, double> cases[] = {{1.0, 1e-12}, {1.4, 1e-12}, {5.0 / 3.0, 1e-10},
                                             {3.0, 1e-9}};
  for (const auto& [gamma, tol] : cases) {
    const GasModel m(gamma, 1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i <= 600; ++i) {
      const double rho = std::pow(10.0, -3.0 + 6.0 * i / 600.0);
      worst = std::max(worst, oracle::rel_err(pi_inverse(m, pi_of_rho(m, rho)), rho));
    }
    CHECK(worst < tol);
  }
}

TEST_CASE("pi is strictly increasing") {
  const GasModel m(1.4, 1.0, 1.0);
  double prev = pi_of_rho(m, 1e-3);
  for (int i = 1; i <= 500; ++i) {
    const double next = pi_of_rho(m, 1e-3 + i * 0.01);
    CHECK(next > prev);
    prev = next;
  }
}

TEST_CASE("sound speed squared equals dp/drho") {
  for (double gamma : {1.0, 1.4, 3.0}) {
    const GasModel m(gamma, 1.0, 1.2);
    CHECK(pressure(m, 1.0) == doctest::Approx(1.44 / gamma).epsilon(1e-14));
    for (double rho : {0.2, 1.0, 3.5}) {
      const double dp = oracle::central([&](double r) { return pressure(m, r); }, rho, 1e-5 * rho);
      const double c = sound_speed(m, rho);
      CHECK(oracle::rel_err(c * c, dp) < 1e-8);
      CHECK(oracle::rel_err(sound_speed_sq_of_pi(m, pi_of_rho(m, rho)), c * c) < 1e-12);
    }
  }
}

TEST_CASE("gamma near one approaches the isothermal law") {
  const GasModel iso(1.0, 1.0, 1.0);
  const GasModel near(1.0 + 1e-8, 1.0, 1.0);
  for (double rho : {0.1, 0.5, 2.0, 7.0}) {
    CHECK(oracle::rel_err(pi_of_rho(near, rho), pi_of_rho(iso, rho)) < 1e-6);
  }
}

TEST_CASE("reference point has zero pseudo-Mach number") {
  const GasModel m(1.4, 1.0, 1.0);
  const LocalGas g = density_sound_pseudo_mach(m, {{0.3, 0.2}, 0.0, {0.0, 0.0}});
  CHECK(g.rho == doctest::Approx(1.0));
  CHECK(g.c == doctest::Approx(1.0));
  CHECK(g.L == 0.0);
}

TEST_CASE("isothermal sample point") {
  const GasModel m(1.0, 1.0, 1.0);
  const LocalGas g = density_sound_pseudo_mach(m, {{0.0, 0.0}, -1.0, {1.0, 0.0}});
  CHECK(oracle::rel_err(g.rho, std::exp(0.5)) < 1e-14);
  CHECK(g.c == doctest::Approx(1.0));
  CHECK(g.L == doctest::Approx(1.0));
}

TEST_CASE("constant state is sonic exactly on its circle") {
  // psi = v . xi + const, so chi = v . xi - |xi|^2 / 2 + const and z = v - xi.
  const GasModel m(1.4, 1.0, 1.0);
  const Vec2 v{0.3, -0.4};
  const double c = 0.9;
  // Pick the constant so that the state at xi = v has sound speed c.
  const double a = (c * c - 1.0) / 0.4;
  const double k = -a + 0.5 * norm_sq(v) - dot(v, v);
  for (int i = 0; i < 16; ++i) {
    const double ang = 0.39 * i;
    const Vec2 xi = v + c * Vec2{std::cos(ang), std::sin(ang)};
    const double chi = dot(v, xi) - 0.5 * norm_sq(xi) + k;
    const LocalGas g = density_sound_pseudo_mach(m, {xi, chi, v - xi});
    CHECK(g.c == doctest::Approx(c).epsilon(1e-13));
    CHECK(g.L == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("derived psi and v follow from chi and z") {
  const SelfSimilarPoint p{{1.0, 2.0}, 0.5, {0.25, -1.0}};
  CHECK(p.psi() == doctest::Approx(0.5 + 2.5));
  CHECK(p.v() == Vec2{1.25, 1.0});
}
