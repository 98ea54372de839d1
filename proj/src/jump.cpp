#include "ssflow/jump.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ssflow/roots.hpp"

namespace ssflow::jump {

double enthalpy_slope(const GasModel& gas, double rho0, double rho1) {
  if (!(rho0 > 0.0) || !(rho1 > 0.0)) throw DomainError("densities must be positive");
  const double x = rho1 / rho0 - 1.0;
  const double gm1 = gas.gamma() - 1.0;
  if (x == 0.0) return gas.isothermal() ? 1.0 / rho0 : std::pow(rho0, gm1 - 1.0);
  const double l = std::log1p(x);
  if (gas.isothermal()) return l / (rho0 * x);
  return std::pow(rho0, gm1 - 1.0) * std::expm1(gm1 * l) / (gm1 * x);
}

double incident_velocity(const GasModel& gas, double rho0, double rho1) {
  const double s = enthalpy_slope(gas, rho0, rho1);
  return (rho1 - rho0) * std::sqrt(2.0 * s / (rho1 + rho0));
}

IncidentData incident_shock(const GasModel& gas, double rho0, double rho1) {
  if (!(rho0 > 0.0)) throw DomainError("rho0 must be positive");
  if (rho1 < rho0)
    throw DomainError("entropy-violating incident shock: rho1 < rho0 (" + std::to_string(rho1) +
                      " < " + std::to_string(rho0) + ")");
  IncidentData d;
  d.bernoulli = {gas.enthalpy(rho0)};
  d.state0 = {0.0, 0.0, 0.0, rho0};
  d.u1 = incident_velocity(gas, rho0, rho1);
  d.degenerate = rho1 == rho0;
  d.xi0 = d.degenerate ? std::numeric_limits<double>::quiet_NaN() : rho1 * d.u1 / (rho1 - rho0);
  d.state1 = {d.u1, 0.0, d.degenerate ? 0.0 : -d.u1 * d.xi0, rho1};
  try {
    d.rho_c = critical_density(gas, rho0);
  } catch (const SearchFailure&) {
    d.rho_c.reset();  // u1 < c1 for every rho1 (happens for gamma >= 3)
  }
  return d;
}

double critical_density(const GasModel& gas, double rho0, double upper_factor) {
  if (!(rho0 > 0.0)) throw DomainError("rho0 must be positive");
  auto f = [&](double r) { return incident_velocity(gas, rho0, r) - gas.sound_speed(r); };
  const double lo = rho0 * (1.0 + 1e-9);
  const double hi = expand_bracket(f, lo, 2.0 * rho0, upper_factor * rho0, 2.0, "critical density");
  // u1/c1 should cross 1 once inside the bracket
  const auto xs = logspace(lo, hi, 65);
  if (sign_changes(f, xs).size() != 1)
    throw SearchFailure("critical density: sign change of u1 - c1 is not unique", lo, hi);
  return bisect(f, lo, hi, 1e-13 * hi, "critical density");
}

RhResidual rh_residual(const GasModel& gas, const BernoulliData& b, const UniformState& a,
                       const UniformState& c, Vec2 point, Vec2 normal) {
  const auto pa = eval_pseudo_potential(a, point);
  const auto pc = eval_pseudo_potential(c, point);
  const double ra = density_from_bernoulli(gas, b, norm_sq(pa.grad), pa.phi);
  const double rc = density_from_bernoulli(gas, b, norm_sq(pc.grad), pc.phi);
  return {pa.phi - pc.phi, ra * dot(pa.grad, normal) - rc * dot(pc.grad, normal)};
}

StraightShock straight_shock(const UniformState& upstream, const UniformState& downstream) {
  // phi_up - phi_down = (du) . X + dk, positive on the downstream side
  const Vec2 du = upstream.velocity() - downstream.velocity();
  const double dk = upstream.k - downstream.k;
  const double n2 = norm_sq(du);
  if (n2 == 0.0) throw PreconditionError("states have equal velocities; no shock line");
  return {du * (-dk / n2), du / std::sqrt(n2)};
}

bool entropy_admissible(const GasModel& gas, const UniformState& upstream,
                        const UniformState& downstream, double rel_tol) {
  (void)gas;
  if (upstream.velocity() == downstream.velocity()) {
    if (upstream.k != downstream.k || upstream.rho != downstream.rho)
      throw PreconditionError("states are not connected by a shock");
    return false;  // same state, no shock
  }
  const auto s = straight_shock(upstream, downstream);
  const double fu = upstream.rho * dot(upstream.grad(s.point), s.normal);
  const double fd = downstream.rho * dot(downstream.grad(s.point), s.normal);
  const double scale = std::abs(fu) + std::abs(fd) + 1e-300;
  if (std::abs(fu - fd) > rel_tol * scale)
    throw PreconditionError("states violate mass-flux continuity on their shock line");
  return downstream.rho > upstream.rho;
}

}  // namespace ssflow::jump
