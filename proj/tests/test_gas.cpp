#include <cmath>
#include <random>

#include "doctest.h"
#include "ssflow/gas.hpp"

using namespace ssflow;

TEST_CASE("enthalpy and sound speed hand values") {
  const GasModel g2(2.0), g3(3.0), iso(1.0);
  CHECK(enthalpy(g2, 1.0) == doctest::Approx(0.0));
  CHECK(enthalpy(g2, 3.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(enthalpy(iso, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sound_speed(g2, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(sound_speed(g3, 1.0) == 1.0);
  CHECK(sound_speed(iso, 7.0) == 1.0);
  CHECK(iso.isothermal());
  CHECK_FALSE(g2.isothermal());
}

TEST_CASE("non-positive density and bad gamma are rejected") {
  const GasModel g(1.4);
  CHECK_THROWS_AS(g.enthalpy(0.0), DomainError);
  CHECK_THROWS_AS(g.sound_speed(-1.0), DomainError);
  CHECK_THROWS_AS(GasModel(0.9), DomainError);
}

TEST_CASE("density from Bernoulli hand values and vacuum") {
  const GasModel g(2.0);
  CHECK(density_from_bernoulli(g, BernoulliData::from_b0(g, 2.0), 1.0, 0.0) == doctest::Approx(1.5));
  CHECK(density_from_bernoulli(g, BernoulliData::from_b0(g, 1.0), 0.0, 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(density_from_bernoulli(g, BernoulliData::from_b0(g, 1.0), 0.0, 1.0), VacuumError);
  // sound speed squared equals the same base
  CHECK(sound_speed_sq_from_bernoulli(g, BernoulliData::from_b0(g, 2.0), 1.0, 0.0) == doctest::Approx(1.5));
}

TEST_CASE("B0 round trip") {
  const GasModel g(1.4);
  const auto b = BernoulliData::from_b0(g, 1.7);
  CHECK(b.b0(g) == doctest::Approx(1.7).epsilon(1e-15));
}

TEST_CASE("pseudo-potential evaluation") {
  const UniformState zero{};
  const auto v0 = eval_pseudo_potential(zero, {0.0, 0.0});
  CHECK(v0.phi == 0.0);
  CHECK(v0.grad == Vec2{0.0, 0.0});
  const double u1 = std::sqrt(2.0 / 3.0), xi0 = 2.0 * u1;
  const UniformState s1{u1, 0.0, -u1 * xi0, 2.0};
  const auto v1 = eval_pseudo_potential(s1, {xi0, 0.0});
  CHECK(v1.phi == doctest::Approx(-xi0 * xi0 / 2).epsilon(1e-15));
  CHECK(v1.grad.x == doctest::Approx(u1 - xi0));
  CHECK(v1.grad.y == 0.0);
  const UniformState s{0.3, -0.7, 0.2, 1.0};
  CHECK(norm(s.grad(s.sonic_center())) == 0.0);
}

TEST_CASE("Bernoulli density is constant on uniform states") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0), G(1.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const GasModel gas(trial % 10 == 0 ? 1.0 : G(rng));
    const BernoulliData b{1.5 + U(rng)};
    const auto s = make_uniform_state(gas, b, 0.5 * U(rng), 0.5 * U(rng), 0.3 * U(rng));
    for (int k = 0; k < 10; ++k) {
      const Vec2 p{2 * U(rng), 2 * U(rng)};
      const auto pv = eval_pseudo_potential(s, p);
      const double r = density_from_bernoulli(gas, b, norm_sq(pv.grad), pv.phi);
      CHECK(std::abs(r - s.rho) <= 1e-12 * s.rho);
    }
  }
}

TEST_CASE("ellipticity inside and outside the sonic circle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  const GasModel gas(1.4);
  const BernoulliData b{2.0};
  const auto s = make_uniform_state(gas, b, 0.4, 0.1, -0.2);
  const double c = s.sonic_radius(gas);
  int inside = 0, outside = 0;
  for (int k = 0; k < 2000; ++k) {
    const Vec2 p{U(rng), U(rng)};
    const double d = norm(p - s.sonic_center());
    if (std::abs(d - c) < 1e-6) continue;
    const auto pv = eval_pseudo_potential(s, p);
    const auto rep = ellipticity_ratio(gas, b, norm_sq(pv.grad), pv.phi);
    if (d < c) {
      ++inside;
      CHECK(rep.type == FlowType::elliptic);
      CHECK(rep.ratio < 1.0);
    } else {
      ++outside;
      CHECK(rep.type == FlowType::hyperbolic);
    }
  }
  CHECK(inside > 100);
  CHECK(outside > 100);
  const Vec2 on = s.sonic_center() + Vec2{c, 0.0};
  const auto pv = eval_pseudo_potential(s, on);
  CHECK(ellipticity_ratio(gas, b, norm_sq(pv.grad), pv.phi).type == FlowType::sonic);
  CHECK(ellipticity_ratio(gas, b, 0.0, 0.1).type == FlowType::elliptic);
}

TEST_CASE("enthalpy tends to log as gamma tends to one") {
  for (double rho : {0.3, 1.7, 5.0}) {
    for (double eps : {1e-3, 1e-6}) {
      const double h = GasModel(1.0 + eps).enthalpy(rho);
      const double err = std::abs(h - std::log(rho)) / std::abs(std::log(rho));
      CHECK(err < 2.0 * eps * std::abs(std::log(rho)) + 1e-12);
    }
  }
}
