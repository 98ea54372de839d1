#include "ssflow/full_euler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssflow/jump.hpp"

namespace ssflow::euler {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void require_state(const FullEulerState& s) {
  if (!(s.rho > 0.0) || !(s.p > 0.0)) throw DomainError("full Euler state needs rho > 0 and p > 0");
}

}  // namespace

double sound_speed(const GasModel& gas, const FullEulerState& s) {
  require_state(s);
  return std::sqrt(gas.gamma() * s.p / s.rho);
}

FullEulerState from_potential(const GasModel& gas, double rho, Vec2 grad_phi, Vec2 x) {
  return {rho, grad_phi.x + x.x, grad_phi.y + x.y, gas.pressure(rho)};
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::pseudo_supersonic: return "pseudo-supersonic";
    case Regime::pseudo_sonic: return "pseudo-sonic";
    default: return "pseudo-subsonic";
  }
}

TypeReport eigenvalues(const GasModel& gas, const FullEulerState& s, Vec2 x, double sonic_band) {
  TypeReport t;
  t.c = sound_speed(gas, s);
  const Vec2 w = s.pseudo_velocity(x);
  const double U = w.x, V = w.y, c = t.c, c2 = c * c;
  t.q = norm(w);
  const double scale = std::max(t.q, c);
  t.lambda0_vertical = std::abs(U) <= 1e-14 * scale;
  t.lambda0 = t.lambda0_vertical ? nan : V / U;

  const double disc = t.q * t.q - c2;  // q^2 - c^2
  t.sonic = std::abs(t.q - c) <= sonic_band * c;
  t.regime = t.sonic ? Regime::pseudo_sonic : (t.q > c ? Regime::pseudo_supersonic : Regime::pseudo_subsonic);
  const double den = U * U - c2;
  if (!t.sonic && disc < 0.0) {
    // complex pair; U^2 < c^2 here since |U| <= q < c
    t.complex_pair = true;
    const double im = c * std::sqrt(-disc) / den;
    t.lambda_plus = {U * V / den, im};
    t.lambda_minus = {U * V / den, -im};
    return t;
  }
  const double sq = t.sonic ? 0.0 : std::sqrt(disc);
  // (UV +- c sq)/(U^2 - c^2) == (V^2 - c^2)/(UV -+ c sq); pick the better-conditioned form
  auto branch = [&](double sign) {
    const double d_alt = U * V - sign * c * sq;
    const double tol = 1e-12 * scale * scale;
    if (std::abs(den) >= std::abs(d_alt) && std::abs(den) > tol) return (U * V + sign * c * sq) / den;
    if (std::abs(d_alt) > tol) return (V * V - c2) / d_alt;
    t.degenerate = true;
    return nan;
  };
  t.lambda_plus = branch(1.0);
  t.lambda_minus = branch(-1.0);
  return t;
}

RhFullResidual rh_full_residual(const GasModel& gas, const FullEulerState& up, const FullEulerState& down,
                                Vec2 x, Vec2 normal) {
  require_state(up);
  require_state(down);
  if (gas.isothermal()) throw PreconditionError("energy jump needs gamma > 1");
  if (std::abs(norm(normal) - 1.0) > 1e-12) throw PreconditionError("shock normal must be a unit vector");
  const Vec2 tan = perp(normal);
  const double g = gas.gamma();
  auto flux = [&](const FullEulerState& s) {
    const Vec2 w = s.pseudo_velocity(x);
    const double L = dot(w, tan), N = dot(w, normal);
    return RhFullResidual{L, s.rho * N, s.p + s.rho * N * N, g * s.p / ((g - 1) * s.rho) + 0.5 * N * N};
  };
  const auto a = flux(up), b = flux(down);
  return {b.r_L - a.r_L, b.r_mass - a.r_mass, b.r_momentum - a.r_momentum, b.r_enthalpy - a.r_enthalpy};
}

OrderStudy shock_strength_order_study(const GasModel& gas, double rho0, const std::vector<double>& epsilons) {
  if (epsilons.size() < 4) throw PreconditionError("order study needs at least 4 shock strengths");
  for (double e : epsilons)
    if (!(e > 0.0 && e <= 0.2)) throw PreconditionError("shock strengths must lie in (0, 0.2]");
  if (!(rho0 > 0)) throw DomainError("rho0 must be positive");
  OrderStudy out;
  out.epsilons = epsilons;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : epsilons) {
    const auto inc = jump::incident_shock(gas, rho0, (1 + e) * rho0);
    const Vec2 x{inc.xi0, 0.0};
    const auto up = from_potential(gas, inc.state0.rho, inc.state0.grad(x), x);
    const auto down = from_potential(gas, inc.state1.rho, inc.state1.grad(x), x);
    const auto r = rh_full_residual(gas, up, down, x, Vec2{-1.0, 0.0});
    const double res = std::max(std::abs(r.r_momentum), std::abs(r.r_enthalpy));
    out.residuals.push_back(res);
    out.mass_residuals.push_back(r.r_mass);
    if (!(res > 1e-13)) out.degenerate = true;
    const double lx = std::log(e), ly = std::log(std::max(res, 1e-300));
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double n = static_cast<double>(epsilons.size());
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 1e-14)) {
    out.degenerate = true;
    out.slope = nan;
  } else {
    out.slope = (n * sxy - sx * sy) / den;
  }
  return out;
}

namespace {

// Bilinear sampling of nodal data at logical coordinates (a, b) in [0,1]^2.
struct LogicalSampler {
  const fb::StructuredGrid& g;
  template <class T>
  T operator()(const std::vector<T>& f, double a, double b) const {
    const double fa = std::clamp(a, 0.0, 1.0) * g.nx, fb = std::clamp(b, 0.0, 1.0) * g.ny;
    const int i = std::min(static_cast<int>(fa), g.nx - 1), j = std::min(static_cast<int>(fb), g.ny - 1);
    const double s = fa - i, t = fb - j;
    return f[g.index(i, j)] * ((1 - s) * (1 - t)) + f[g.index(i + 1, j)] * (s * (1 - t)) +
           f[g.index(i, j + 1)] * ((1 - s) * t) + f[g.index(i + 1, j + 1)] * (s * t);
  }
};

}  // namespace

ConsistencyReport potential_consistency(const fb::FreeBoundaryProblem& p, const fb::SelfSimilarField& field) {
  const auto& g = field.grid;
  if (g.size() == 0 || field.phi.size() != g.size()) throw PreconditionError("empty or inconsistent field");
  const fb::NodalCalculus calc(g);
  const std::size_t n = g.size();
  std::vector<double> U(n), V(n);
  for (std::size_t k = 0; k < n; ++k) U[k] = field.grad[k].x, V[k] = field.grad[k].y;
  const auto dU = calc.gradient(U), dV = calc.gradient(V);

  ConsistencyReport out;
  out.vorticity.resize(n);
  std::vector<Vec2> accel(n), logical_vel(n);
  std::vector<double> power(n);  // rho * A . U, the pressure sink along a streamline
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 w = field.grad[k];
    out.vorticity[k] = dV[k].x - dU[k].y;
    out.max_vorticity = std::max(out.max_vorticity, std::abs(out.vorticity[k]));
    // (U.D)U + U vanishes identically for uniform states
    accel[k] = {w.x * dU[k].x + w.y * dU[k].y + w.x, w.x * dV[k].x + w.y * dV[k].y + w.y};
    power[k] = field.rho[k] * dot(accel[k], w);
    const Vec2 xa = calc.xa(k), xb = calc.xb(k);
    const double det = cross(xa, xb);
    logical_vel[k] = {cross(w, xb) / det, cross(xa, w) / det};
  }

  const double gam = p.gas.gamma();
  out.entropy_variation.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<unsigned char> visited(static_cast<std::size_t>(g.nx) * g.ny, 0);
  const LogicalSampler at{g};
  const double h = 1.0 / std::max(g.nx, g.ny);
  const int max_steps = 40 * (g.nx + g.ny);

  auto trace = [&](double a, double b) {
    const double rho0 = at(field.rho, a, b);
    double pr = p.gas.pressure(rho0);
    const double s0 = std::log(pr) - gam * std::log(rho0);
    ++out.trajectories;
    // state y = (a, b, p)
    auto rhs = [&](double ya, double yb) {
      const Vec2 lv = at(logical_vel, ya, yb);
      return std::array<double, 3>{lv.x, lv.y, -at(power, ya, yb)};
    };
    for (int step = 0; step < max_steps; ++step) {
      const Vec2 lv = at(logical_vel, a, b);
      const double speed = std::max(std::abs(lv.x), std::abs(lv.y));
      if (!(speed > 1e-10)) break;
      const double dt = 0.25 * h / speed;
      const auto k1 = rhs(a, b);
      const auto k2 = rhs(a + 0.5 * dt * k1[0], b + 0.5 * dt * k1[1]);
      const auto k3 = rhs(a + 0.5 * dt * k2[0], b + 0.5 * dt * k2[1]);
      const auto k4 = rhs(a + dt * k3[0], b + dt * k3[1]);
      a += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      b += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      pr += dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
      if (a < 0 || a > 1 || b < 0 || b > 1 || !(pr > 0)) break;
      const double rho = at(field.rho, a, b);
      const double ds = std::abs(std::log(pr) - gam * std::log(rho) - s0);
      out.max_entropy_variation = std::max(out.max_entropy_variation, ds);
      const int i = std::min(static_cast<int>(a * g.nx), g.nx - 1), j = std::min(static_cast<int>(b * g.ny), g.ny - 1);
      visited[static_cast<std::size_t>(i) * g.ny + j] = 1;
      for (int di = 0; di <= 1; ++di)
        for (int dj = 0; dj <= 1; ++dj) {
          double& e = out.entropy_variation[g.index(i + di, j + dj)];
          e = std::isnan(e) ? ds : std::max(e, ds);
        }
    }
  };

  // seeds on the sonic arcs, at twice the node density
  const int seeds = 2 * g.nx;
  for (int k = 1; k < seeds; ++k) {
    const double a = static_cast<double>(k) / seeds;
    trace(a, 1.0);
    if (p.side0 == fb::SideKind::dirichlet) trace(a, 0.0);
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& x : g.nodes)
    xmin = std::min(xmin, x.x), xmax = std::max(xmax, x.x), ymin = std::min(ymin, x.y), ymax = std::max(ymax, x.y);
  const double r_ex = corner_exclusion * ((xmax - xmin) + (ymax - ymin));
  const bool has_corner = p.side0 == fb::SideKind::symmetry;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::abs(out.vorticity[k]);
    if (!std::isnan(out.entropy_variation[k])) out.max_vorticity_traced = std::max(out.max_vorticity_traced, w);
    if (!has_corner || norm(g.nodes[k] - p.wall0) > r_ex) out.max_vorticity_regular = std::max(out.max_vorticity_regular, w);
  }
  out.coverage = static_cast<double>(std::count(visited.begin(), visited.end(), 1)) / visited.size();
  return out;
}

ConsistencyReport potential_consistency(const fb::Solution& s) {
  if (!(s.diagnostics.shock_displacement <= s.config.tol_shock) || s.field.phi.empty())
    throw PreconditionError("potential consistency needs a converged free-boundary solution");
  return potential_consistency(s.problem, s.field);
}

}  // namespace ssflow::euler
