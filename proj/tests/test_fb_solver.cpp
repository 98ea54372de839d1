#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "ssflow/fb_solver.hpp"

using namespace ssflow;
using std::numbers::pi;

namespace {

const GasModel gas2(2.0);

fb::SolverConfig grid_config(int n) {
  fb::SolverConfig c;
  c.nx = c.ny = n;
  return c;
}

// phi* = phi2 + eps * smooth bump; exact derivatives for the manufactured source
fb::Manufactured bump_solution(const UniformState& s, double eps) {
  fb::Manufactured m;
  m.phi = [=](Vec2 x) { return s.phi(x) + eps * std::sin(2 * x.x) * std::cos(1.5 * x.y); };
  m.grad = [=](Vec2 x) {
    return s.grad(x) + Vec2{2 * eps * std::cos(2 * x.x) * std::cos(1.5 * x.y),
                            -1.5 * eps * std::sin(2 * x.x) * std::sin(1.5 * x.y)};
  };
  m.hessian = [=](Vec2 x) {
    return std::array<double, 3>{-1 - 4 * eps * std::sin(2 * x.x) * std::cos(1.5 * x.y),
                                 -3 * eps * std::cos(2 * x.x) * std::sin(1.5 * x.y),
                                 -1 - 2.25 * eps * std::sin(2 * x.x) * std::cos(1.5 * x.y)};
  };
  return m;
}

double manufactured_error(double eps, int n) {
  auto p = fb::regular_reflection_problem(gas2, 1, 2, 75 * pi / 180);
  p.manufactured = bump_solution(p.state_side1, eps);
  const auto cfg = grid_config(n);
  const auto shock = fb::initial_shock(p, n);
  const auto g = fb::build_grid(p, shock, n, n);
  std::vector<double> guess(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) guess[k] = p.state_side1.phi(g.nodes[k]);
  const auto f = fb::elliptic_solve(p, shock, guess, cfg);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) err = std::max(err, std::abs(f.phi[k] - p.manufactured->phi(g.nodes[k])));
  return err;
}

}  // namespace

TEST_CASE("normal reflection domain is solved exactly with no outer iterations") {
  const auto nr = local::solve_normal_reflection(gas2, 1, 2);
  auto s = fb::solve_regular_reflection(gas2, 1, 2, pi / 2, grid_config(16));
  for (const auto& v : s.shock.vertices()) CHECK(v.x == doctest::Approx(nr.xi_bar).epsilon(1e-12));
  CHECK(s.diagnostics.outer_iterations == 0);
  for (std::size_t k = 0; k < s.field.phi.size(); ++k)
    CHECK(std::abs(s.field.phi[k] - nr.state2.phi(s.field.grid.nodes[k])) < 1e-10);
  const auto& d = s.diagnostics;
  CHECK(d.pde_residual_inf < 1e-10);
  CHECK(d.rh_phi_residual_inf < 1e-10);
  CHECK(d.rh_flux_residual_inf < 1e-10);
  CHECK(d.bounds_violation < 1e-10);
  CHECK(d.monotonicity_violation < 1e-10);
  CHECK(d.sonic_gradient_mismatch < 1e-10);
  CHECK(s.displacement_history.back() < 1e-10);
}

TEST_CASE("initial shock is pinned on the state-2 sonic circle") {
  const auto p = fb::regular_reflection_problem(gas2, 1, 2, 75 * pi / 180);
  const auto sh = fb::initial_shock(p, 24);
  const Vec2 p1 = sh.vertex(sh.size() - 1);
  CHECK(std::abs(norm(p1 - p.state_side1.sonic_center()) - gas2.sound_speed(p.state_side1.rho)) < 1e-12);
  CHECK(std::abs(norm(p1 - p.straight_shock_points[1])) < 1e-12);
  // P1 lies on the straight reflected shock through P0
  const Vec2 d = p.straight_shock_points[1] - p.straight_shock_points[0];
  CHECK(std::abs(cross(normalized(d), p1 - p.straight_shock_points[0])) < 1e-12);
  const auto inv = fb::build_initial_guess(p, grid_config(24));
  CHECK(inv.field.phi.size() == 25u * 25u);
}

TEST_CASE("uniform state is reproduced to solver tolerance") {
  auto p = fb::regular_reflection_problem(gas2, 1, 2, 70 * pi / 180);
  p.manufactured = bump_solution(p.state_side1, 0.0);
  const int n = 12;
  const auto shock = fb::initial_shock(p, n);
  const auto g = fb::build_grid(p, shock, n, n);
  std::vector<double> guess(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) guess[k] = p.state_side1.phi(g.nodes[k]) + 0.01 * std::sin(3.0 * k);
  const auto f = fb::elliptic_solve(p, shock, guess, grid_config(n));
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(f.phi[k] - p.state_side1.phi(g.nodes[k])) < 1e-11);
}

TEST_CASE("manufactured solution converges at second order") {
  const double e1 = manufactured_error(0.02, 16), e2 = manufactured_error(0.02, 32), e3 = manufactured_error(0.02, 64);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("one outer step contracts a perturbed normal-reflection shock") {
  const auto p = fb::regular_reflection_problem(gas2, 1, 2, pi / 2);
  const auto cfg = grid_config(24);
  const auto exact = fb::initial_shock(p, cfg.ny);
  auto sh = exact;
  for (int j = 0; j < cfg.ny; ++j) sh.radii[j] *= 1 + 0.01 * std::sin(pi * j / cfg.ny);
  const auto g = fb::build_grid(p, sh, cfg.nx, cfg.ny);
  std::vector<double> guess(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) guess[k] = p.state_side1.phi(g.nodes[k]);
  const auto f = fb::elliptic_solve(p, sh, guess, cfg);
  const auto up = fb::shock_update(p, f, sh, cfg, cfg.relax);
  double before = 0, after = 0;
  for (std::size_t j = 0; j < sh.size(); ++j) {
    before = std::max(before, std::abs(sh.radii[j] - exact.radii[j]));
    after = std::max(after, std::abs(up.shock.radii[j] - exact.radii[j]));
  }
  CHECK(before / after >= 2.0);
  CHECK(up.shock.radii.back() == exact.radii.back());
}

TEST_CASE("supersonic regular reflection satisfies the admissibility diagnostics") {
  const auto s = fb::solve_regular_reflection(gas2, 1, 2, 75 * pi / 180, grid_config(32));
  const auto& d = s.diagnostics;
  CHECK(d.pde_residual_inf < 1e-8);
  CHECK(d.rh_phi_residual_inf < 1e-7);
  CHECK(d.rh_flux_residual_inf < 1e-8);
  CHECK(d.bounds_violation < 1e-7);
  CHECK(d.monotonicity_violation < 1e-4);
  CHECK(d.ellipticity_min_margin > 0.0);
  CHECK(d.cutoff_confined);
  // the straight segment stays fixed: P1 pinned
  CHECK(norm(s.shock.vertex(s.shock.size() - 1) - s.problem.straight_shock_points[1]) < 1e-12);
}

TEST_CASE("regular reflection near the normal limit stays close to the normal state") {
  const auto nr = local::solve_normal_reflection(gas2, 1, 2);
  const auto s = fb::solve_regular_reflection(gas2, 1, 2, pi / 2 - 0.01, grid_config(16));
  double dev = 0, scale = 0;
  for (std::size_t k = 0; k < s.field.phi.size(); ++k) {
    const Vec2 x = s.field.grid.nodes[k];
    dev = std::max(dev, std::abs(s.field.phi[k] - nr.state2.phi(x)));
    scale = std::max(scale, std::abs(nr.state2.phi(x)));
  }
  CHECK(dev / scale < 1e-2);
}

TEST_CASE("Prandtl-Meyer solve: bounds, monotonicity cone and continuity across sonic arcs") {
  const GasModel gas(1.4);
  const auto s = fb::solve_prandtl_meyer(gas, 2.0, 1.0, 0.3, grid_config(24));
  const auto& d = s.diagnostics;
  CHECK(d.bounds_violation < 1e-7);
  CHECK(d.monotonicity_violation < 1e-6);
  CHECK(d.ellipticity_min_margin > 0.0);
  const auto& p = s.problem;
  for (const fb::Arc* arc : {&p.arc0, &p.arc1}) {
    for (double t : {0.2, 0.5, 0.8}) {
      const Vec2 x = arc->at(t);
      const Vec2 r = normalized(x - arc->center);
      const double in = fb::assembled_potential(s, x - r * 1e-7), out = fb::assembled_potential(s, x + r * 1e-7);
      CHECK(std::abs(in - out) < 1e-6);
    }
  }
  // far upstream the assembled potential is the inflow state
  const Vec2 far{0.0, 5.0};  // above the weak shock S0
  CHECK(fb::assembled_potential(s, far) == doctest::Approx(p.upper.phi(far)));
}

TEST_CASE("small ramp angle: curved shock within O(theta) of the inflow sonic arc") {
  const GasModel gas(1.4);
  double prev = 0.0;
  for (double th : {0.02, 0.01}) {
    const auto s = fb::solve_prandtl_meyer(gas, 2.0, 1.0, th, grid_config(16));
    const double c = gas.sound_speed(1.0);
    double dist = 0.0;
    for (const auto& v : s.shock.vertices()) dist = std::max(dist, std::abs(norm(v - Vec2{2.0, 0.0}) - c));
    CHECK(dist < 5 * th);
    if (prev > 0) CHECK(dist < 0.7 * prev);
    prev = dist;
  }
}

TEST_CASE("configurations outside the solver's scope are refused") {
  CHECK_THROWS_AS(fb::regular_reflection_problem(gas2, 1, 2, 40 * pi / 180), UnsupportedConfiguration);
  const double ths = local::sonic_angle(gas2, 1, 2);
  CHECK_THROWS_AS(fb::regular_reflection_problem(gas2, 1, 2, ths + 5e-7), UnsupportedConfiguration);
  const auto pm = local::pm_angles(GasModel(1.4), 2.0, 1.0);
  CHECK_THROWS_AS(fb::prandtl_meyer_problem(GasModel(1.4), 2.0, 1.0, 0.5 * (pm.sonic + pm.detachment)),
                  UnsupportedConfiguration);
  auto cfg = grid_config(16);
  cfg.relax = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = grid_config(16);
  cfg.max_outer = 1;
  cfg.grid_sequencing = false;
  CHECK_THROWS_AS(fb::solve_regular_reflection(gas2, 1, 2, 75 * pi / 180, cfg), NonConvergence);
}

TEST_CASE("interpolation reproduces linear data and rejects outside points") {
  const auto p = fb::regular_reflection_problem(gas2, 1, 2, 75 * pi / 180);
  const auto g = fb::build_grid(p, fb::initial_shock(p, 10), 10, 10);
  std::vector<double> f(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) f[k] = 2 * g.nodes[k].x - 3 * g.nodes[k].y;
  const Vec2 x = (g.at(3, 4) + g.at(4, 5)) * 0.5;
  const auto v = fb::interpolate(g, f, x);
  REQUIRE(v);
  CHECK(*v == doctest::Approx(2 * x.x - 3 * x.y).epsilon(1e-3));
  CHECK_FALSE(fb::interpolate(g, f, Vec2{100.0, 100.0}));
  const fb::NodalCalculus calc(g);
  CHECK(calc.jacobian_min() > 0.0);
  const auto gr = calc.gradient(f);
  for (const auto& d : gr) {
    CHECK(d.x == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(d.y == doctest::Approx(-3.0).epsilon(1e-9));
  }
}
