#include <cmath>
#include <random>

#include "doctest.h"
#include "ssflow/jump.hpp"

using namespace ssflow;

TEST_CASE("incident shock hand values") {
  const GasModel g(2.0);
  const auto d = jump::incident_shock(g, 1.0, 2.0);
  CHECK(d.u1 == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(d.xi0 == doctest::Approx(2.0 * std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(d.u1 < g.sound_speed(2.0));
  CHECK_FALSE(d.degenerate);
  const auto z = jump::incident_shock(g, 1.0, 1.0);
  CHECK(z.u1 == 0.0);
  CHECK(z.degenerate);
  CHECK_THROWS_AS(jump::incident_shock(g, 2.0, 1.0), DomainError);
}

TEST_CASE("two incident shock location formulas agree") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> G(1.0, 3.0), R(0.1, 5.0);
  for (int k = 0; k < 200; ++k) {
    const double gamma = std::nextafter(G(rng), 4.0);
    const GasModel gas(gamma);
    const double r0 = R(rng), r1 = r0 * (1.01 + R(rng));
    const double c0s = std::pow(r0, gamma - 1), c1s = std::pow(r1, gamma - 1);
    const double alt = r1 * std::sqrt(2 * (c1s - c0s) / ((gamma - 1) * (r1 * r1 - r0 * r0)));
    const auto d = jump::incident_shock(gas, r0, r1);
    CHECK(std::abs(d.xi0 - alt) <= 1e-12 * alt);
  }
}

TEST_CASE("incident shock degenerates continuously") {
  const GasModel g(1.4);
  double prev = 1.0;
  for (double e : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const auto d = jump::incident_shock(g, 1.0, 1.0 + e);
    CHECK(d.u1 < prev);
    CHECK(d.xi0 * e < 2 * e);
    prev = d.u1;
  }
}

TEST_CASE("critical density closed form for gamma 2") {
  // u1^2 = 2(r-1)^2/(r+1) = c1^2 = r  <=>  r^2 - 5r + 2 = 0
  const GasModel g(2.0);
  const double rc = jump::critical_density(g, 1.0);
  CHECK(rc == doctest::Approx((5.0 + std::sqrt(17.0)) / 2.0).epsilon(1e-11));
  auto excess = [&](double r) { return jump::incident_velocity(g, 1.0, r) - g.sound_speed(r); };
  CHECK(excess(rc * (1 - 1e-6)) < 0);
  CHECK(excess(rc * (1 + 1e-6)) > 0);
  CHECK(excess(1.0 + 1e-6) < 0);
  double prev = 0.0;
  for (double r = 1.01; r < 50; r *= 1.1) {
    const double ratio = jump::incident_velocity(g, 1.0, r) / g.sound_speed(r);
    CHECK(ratio > prev);
    prev = ratio;
  }
  CHECK(jump::incident_shock(g, 1.0, 2.0).rho_c.has_value());
}

TEST_CASE("no critical density for gamma 3") {
  CHECK_THROWS_AS(jump::critical_density(GasModel(3.0), 1.0, 1e4), SearchFailure);
}

TEST_CASE("rh residual across the incident shock") {
  const GasModel g(2.0);
  const auto d = jump::incident_shock(g, 1.0, 2.0);
  for (double eta : {-3.0, 0.0, 0.7, 10.0}) {
    const auto r = jump::rh_residual(g, d.bernoulli, d.state0, d.state1, {d.xi0, eta}, {1.0, 0.0});
    CHECK(std::abs(r.dphi) < 1e-14);
    CHECK(std::abs(r.dflux) < 1e-14);
  }
  const auto off = jump::rh_residual(g, d.bernoulli, d.state0, d.state1, {d.xi0 + 0.1, 0.0}, {1.0, 0.0});
  CHECK(std::abs(off.dphi) > 1e-3);
  const auto same = jump::rh_residual(g, d.bernoulli, d.state1, d.state1, {0.3, 0.2}, {0.6, 0.8});
  CHECK(same.dphi == 0.0);
  CHECK(same.dflux == 0.0);
}

TEST_CASE("flux jump is constant along the potential jump line") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const GasModel g(1.4);
  const BernoulliData b{2.0};
  for (int k = 0; k < 20; ++k) {
    const auto a = make_uniform_state(g, b, U(rng), U(rng), U(rng));
    const auto c = make_uniform_state(g, b, U(rng), U(rng), U(rng));
    const auto s = jump::straight_shock(a, c);
    const Vec2 t = perp(s.normal);
    const double f0 = jump::rh_residual(g, b, a, c, s.point, s.normal).dflux;
    for (double l : {-2.0, 0.5, 3.0}) {
      const auto r = jump::rh_residual(g, b, a, c, s.point + t * l, s.normal);
      CHECK(std::abs(r.dphi) < 1e-13);
      CHECK(r.dflux == doctest::Approx(f0).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("entropy admissibility") {
  const GasModel g(2.0);
  const auto d = jump::incident_shock(g, 1.0, 2.0);
  CHECK(jump::entropy_admissible(g, d.state0, d.state1));
  CHECK_FALSE(jump::entropy_admissible(g, d.state1, d.state0));
  CHECK_FALSE(jump::entropy_admissible(g, d.state0, d.state0));
  UniformState bogus = d.state1;
  bogus.rho = 3.0;
  CHECK_THROWS_AS(jump::entropy_admissible(g, d.state0, bogus), PreconditionError);
}

TEST_CASE("straight shock normal points downstream") {
  const GasModel g(2.0);
  const auto d = jump::incident_shock(g, 1.0, 2.0);
  const auto s = jump::straight_shock(d.state0, d.state1);
  CHECK(s.normal.x == doctest::Approx(-1.0));
  CHECK(s.point.x == doctest::Approx(d.xi0));
}
