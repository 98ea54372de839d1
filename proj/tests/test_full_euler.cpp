#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ssflow/full_euler.hpp"
#include "ssflow/jump.hpp"

using namespace ssflow;
using euler::FullEulerState;

namespace {

// state with prescribed pseudo-velocity (U, V) and sound speed c at x
FullEulerState with_pseudo(const GasModel& gas, Vec2 x, double U, double V, double c) {
  const double rho = 1.3;
  return {rho, U + x.x, V + x.y, c * c * rho / gas.gamma()};
}

}  // namespace

TEST_CASE("eigenvalues: hand values") {
  const GasModel gas(1.4);
  const Vec2 x{0.3, -0.2};
  const double c = 0.8;
  auto t = euler::eigenvalues(gas, with_pseudo(gas, x, 2 * c, 0.0, c), x);
  CHECK(t.lambda0 == doctest::Approx(0.0));
  CHECK(t.lambda_plus.real() == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(t.lambda_minus.real() == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(t.regime == euler::Regime::pseudo_supersonic);
  CHECK_FALSE(t.complex_pair);

  t = euler::eigenvalues(gas, with_pseudo(gas, x, 0.0, 0.0, c), x);
  CHECK(t.complex_pair);
  CHECK(t.lambda0_vertical);
  CHECK(t.regime == euler::Regime::pseudo_subsonic);

  t = euler::eigenvalues(gas, with_pseudo(gas, x, c * std::cos(0.3), c * std::sin(0.3), c), x);
  CHECK(t.sonic);
  CHECK(t.regime == euler::Regime::pseudo_sonic);
  CHECK(t.lambda_plus == t.lambda_minus);

  // U^2 = c^2: one family is vertical, the other has the finite limit (V^2-c^2)/(2UV)
  t = euler::eigenvalues(gas, with_pseudo(gas, x, c, 0.5 * c, c), x);
  CHECK(t.degenerate);
  const bool plus_finite = std::isfinite(t.lambda_plus.real());
  const double finite = plus_finite ? t.lambda_plus.real() : t.lambda_minus.real();
  CHECK(finite == doctest::Approx((0.25 - 1.0) / (2 * 0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(euler::eigenvalues(gas, FullEulerState{0.0, 0, 0, 1}, x), DomainError);
}

TEST_CASE("eigenvalues: complex exactly when subsonic, roots of the characteristic quadratic") {
  const GasModel gas(1.4);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-3, 3), dc(0.2, 2);
  for (int k = 0; k < 2000; ++k) {
    const Vec2 x{d(rng), d(rng)};
    const double U = d(rng), V = d(rng), c = dc(rng);
    const auto t = euler::eigenvalues(gas, with_pseudo(gas, x, U, V, c), x);
    const double q = std::hypot(U, V);
    CHECK(t.complex_pair == (q < c));
    if (q > c && std::abs(U * U - c * c) > 1e-6) {
      CHECK(t.lambda_plus.real() != t.lambda_minus.real());
      CHECK(t.lambda_plus.imag() == 0.0);
    }
    for (auto l : {t.lambda_plus, t.lambda_minus}) {
      if (!std::isfinite(l.real())) continue;
      const auto res = (U * U - c * c) * l * l - 2 * U * V * l + (V * V - c * c);
      const double scale = (std::abs(U * U - c * c) * std::norm(l) + 2 * std::abs(U * V * l) + std::abs(V * V - c * c));
      CHECK(std::abs(res) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("full RH residual: zero for identical states and a classical normal shock") {
  const GasModel gas(1.4);
  const Vec2 x{0.7, 0.4};
  const Vec2 n = normalized(Vec2{0.6, -0.8});
  const FullEulerState s{1.2, 0.3, -0.1, 0.9};
  const auto z = euler::rh_full_residual(gas, s, s, x, n);
  CHECK(z.r_L == 0.0);
  CHECK(z.r_mass == 0.0);
  CHECK(z.r_momentum == 0.0);
  CHECK(z.r_enthalpy == 0.0);

  // standard normal-shock relations in the shock frame
  const double g = 1.4, rho_u = 1.0, p_u = 1.0 / g, M = 2.3;
  const double c_u = std::sqrt(g * p_u / rho_u), N_u = M * c_u, L = 0.37;
  const double rho_d = rho_u * (g + 1) * M * M / ((g - 1) * M * M + 2);
  const double p_d = p_u * (1 + 2 * g / (g + 1) * (M * M - 1));
  const double N_d = N_u * rho_u / rho_d;
  const Vec2 t = perp(n);
  const Vec2 wu = n * N_u + t * L, wd = n * N_d + t * L;
  const FullEulerState up{rho_u, wu.x + x.x, wu.y + x.y, p_u}, down{rho_d, wd.x + x.x, wd.y + x.y, p_d};
  const auto r = euler::rh_full_residual(gas, up, down, x, n);
  CHECK(std::abs(r.r_L) < 1e-12);
  CHECK(std::abs(r.r_mass) < 1e-12);
  CHECK(std::abs(r.r_momentum) < 1e-12);
  CHECK(std::abs(r.r_enthalpy) < 1e-12);
}

TEST_CASE("full RH residual is antisymmetric under swapping sides") {
  const GasModel gas(1.67);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-2, 2), dp(0.1, 3);
  for (int k = 0; k < 200; ++k) {
    const FullEulerState a{dp(rng), d(rng), d(rng), dp(rng)}, b{dp(rng), d(rng), d(rng), dp(rng)};
    const Vec2 x{d(rng), d(rng)}, n = unit_at(d(rng));
    const auto r1 = euler::rh_full_residual(gas, a, b, x, n), r2 = euler::rh_full_residual(gas, b, a, x, n);
    CHECK(r1.r_L == doctest::Approx(-r2.r_L));
    CHECK(r1.r_mass == doctest::Approx(-r2.r_mass));
    CHECK(r1.r_momentum == doctest::Approx(-r2.r_momentum));
    CHECK(r1.r_enthalpy == doctest::Approx(-r2.r_enthalpy));
  }
  CHECK_THROWS_AS(euler::rh_full_residual(GasModel(1.0), FullEulerState{}, FullEulerState{}, Vec2{}, Vec2{1, 0}),
                  PreconditionError);
}

TEST_CASE("potential normal-reflection shock: mass conserved, momentum jump nonzero") {
  const GasModel gas(2.0);
  const auto nr = local::solve_normal_reflection(gas, 1, 2);
  const auto inc = jump::incident_shock(gas, 1, 2);
  const Vec2 x{nr.xi_bar, 0.3};
  const auto up = euler::from_potential(gas, inc.state1.rho, inc.state1.grad(x), x);
  const auto down = euler::from_potential(gas, nr.state2.rho, nr.state2.grad(x), x);
  const auto r = euler::rh_full_residual(gas, up, down, x, Vec2{1.0, 0.0});
  CHECK(std::abs(r.r_L) < 1e-14);
  CHECK(std::abs(r.r_mass) < 1e-13);
  CHECK(std::abs(r.r_momentum) > 1e-2);
  // the potential jump conserves the Bernoulli form of the energy flux
  CHECK(std::abs(r.r_enthalpy) < 1e-13);
}

TEST_CASE("shock-strength order study: third-order agreement") {
  const GasModel gas(1.4);
  const auto st = euler::shock_strength_order_study(gas, 1.0, {0.1, 0.05, 0.02, 0.01});
  CHECK_FALSE(st.degenerate);
  CHECK(std::abs(st.slope - 3.0) <= 0.3);
  for (std::size_t k = 0; k < st.epsilons.size(); ++k) CHECK(std::abs(st.mass_residuals[k]) < 1e-14);
  for (std::size_t k = 1; k < st.epsilons.size(); ++k) CHECK(st.residuals[k] < st.residuals[k - 1]);
  CHECK_THROWS_AS(euler::shock_strength_order_study(gas, 1.0, {0.1, 0.05, 0.02}), PreconditionError);
  CHECK_THROWS_AS(euler::shock_strength_order_study(gas, 1.0, {0.3, 0.05, 0.02, 0.01}), PreconditionError);
}

TEST_CASE("potential consistency: exact zeros on a uniform field, decay on a curved one") {
  const GasModel gas(2.0);
  fb::SolverConfig cfg;
  cfg.nx = cfg.ny = 16;
  const auto u = fb::solve_regular_reflection(gas, 1, 2, std::numbers::pi / 2, cfg);
  const auto r = euler::potential_consistency(u);
  CHECK(r.max_vorticity < 1e-11);
  CHECK(r.max_entropy_variation < 1e-12);
  CHECK(r.coverage > 0.0);

  auto bad = u;
  bad.diagnostics.shock_displacement = 1.0;
  CHECK_THROWS_AS(euler::potential_consistency(bad), PreconditionError);

  const auto s16 = euler::potential_consistency(fb::solve_regular_reflection(gas, 1, 2, 1.309, cfg));
  cfg.nx = cfg.ny = 32;
  const auto s32 = euler::potential_consistency(fb::solve_regular_reflection(gas, 1, 2, 1.309, cfg));
  CHECK(s32.max_vorticity_regular < s16.max_vorticity_regular);
  CHECK(s32.max_entropy_variation < 0.6 * s16.max_entropy_variation);
  CHECK(s32.max_vorticity_regular <= s32.max_vorticity);
}
