#include <cmath>
#include <numbers>

#include "ssflow/fb_solver.hpp"

namespace ssflow::fb {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double near_sonic_guard = 1e-6;

// Representative of `a` within pi of `ref`.
double unwrap_near(double a, double ref) {
  while (a - ref > pi) a -= 2 * pi;
  while (ref - a > pi) a += 2 * pi;
  return a;
}

double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

Arc make_arc(Vec2 center, double radius, Vec2 from, double to_angle) {
  const double a0 = angle_of(from - center);
  return {center, radius, a0, unwrap_near(to_angle, a0)};
}

}  // namespace

const char* to_string(Configuration c) {
  return c == Configuration::regular_reflection ? "regular_reflection" : "prandtl_meyer";
}

void SolverConfig::validate() const {
  if (nx < 4 || ny < 4) throw ConfigError("grid needs at least 4 cells per direction");
  if (!(delta_cutoff > 0) || !(cutoff_range_fraction > 0)) throw ConfigError("cutoff parameters must be positive");
  if (!(relax > 0 && relax <= 1)) throw ConfigError("relax must lie in (0, 1]");
  if (!(tol_pde > 0) || !(tol_shock > 0)) throw ConfigError("tolerances must be positive");
  if (max_outer < 1 || max_newton < 1) throw ConfigError("iteration caps must be positive");
  if (!(max_move_fraction > 0)) throw ConfigError("max_move_fraction must be positive");
}

std::vector<Vec2> ShockPolyline::vertices() const {
  std::vector<Vec2> v(size());
  for (std::size_t j = 0; j < size(); ++j) v[j] = vertex(j);
  return v;
}

double FreeBoundaryProblem::phi_reference(Vec2 x, double b) const {
  if (manufactured) return manufactured->phi(x);
  if (side0 == SideKind::symmetry) return state_side1.phi(x);
  return (1.0 - b) * state_side0.phi(x) + b * state_side1.phi(x);
}

double FreeBoundaryProblem::distance_to_sonic(Vec2 x) const {
  double d = std::abs(arc1.radius - norm(x - arc1.center));
  if (side0 == SideKind::dirichlet) d = std::min(d, std::abs(arc0.radius - norm(x - arc0.center)));
  return d;
}

FreeBoundaryProblem regular_reflection_problem(const GasModel& gas, double rho0, double rho1,
                                               double theta_w) {
  FreeBoundaryProblem p;
  p.configuration = Configuration::regular_reflection;
  p.gas = gas;
  p.theta_w = theta_w;
  const auto inc = jump::incident_shock(gas, rho0, rho1);
  p.bernoulli = inc.bernoulli;
  p.upstream = inc.state1;

  UniformState s2;
  Vec2 p1, e_s1;
  if (theta_w == pi / 2) {
    const auto nr = local::solve_normal_reflection(gas, rho0, rho1);
    s2 = nr.state2;
    const double c2 = gas.sound_speed(s2.rho);
    if (std::abs(nr.xi_bar) >= c2) throw UnsupportedConfiguration("normal reflection shock outside the sonic circle");
    p1 = {nr.xi_bar, std::sqrt(c2 * c2 - nr.xi_bar * nr.xi_bar)};
    e_s1 = {0.0, -1.0};
    p.normal_limit = true;
    p.straight_shock_points = {p1};
  } else {
    const auto loc = local::state2_regular_reflection(gas, rho0, rho1, theta_w);
    if (loc.classification != local::Classification::supersonic)
      throw UnsupportedConfiguration(std::string("free-boundary solve needs a supersonic reflection, got ") +
                                     local::to_string(loc.classification));
    if (loc.weak_ratio < 1.05) {
      const double ths = local::sonic_angle(gas, rho0, rho1);
      if (std::abs(theta_w - ths) < near_sonic_guard)
        throw UnsupportedConfiguration("near-sonic wedge angle: within 1e-6 of the sonic angle");
    }
    s2 = *loc.weak;
    const double c2 = gas.sound_speed(s2.rho);
    Vec2 t = perp(normalized(inc.state1.velocity() - s2.velocity()));
    if (t.y > 0) t = -t;
    // first hit of the straight reflected shock with the sonic circle of state (2)
    const Vec2 d = loc.p0 - s2.sonic_center();
    const double bq = dot(d, t), cq = norm_sq(d) - c2 * c2;
    if (bq * bq - cq < 0) throw UnsupportedConfiguration("reflected shock misses the sonic circle");
    p1 = loc.p0 + t * (-bq - std::sqrt(bq * bq - cq));
    e_s1 = t;
    p.straight_shock_points = {loc.p0, p1};
  }
  const double c2 = gas.sound_speed(s2.rho);
  const Vec2 ew = unit_at(theta_w);
  const Vec2 p4 = s2.sonic_center() + ew * c2;

  p.shock_center = inc.state1.sonic_center();
  p.shock_angle0 = pi;
  p.shock_angle1 = angle_of(p1 - p.shock_center);
  p.pinned_radius1 = norm(p1 - p.shock_center);
  p.wall0 = {0.0, 0.0};
  p.wall1 = p4;
  p.wall_normal = {-ew.y, ew.x};
  p.side0 = SideKind::symmetry;
  p.symmetry_normal = {0.0, 1.0};
  p.arc1 = make_arc(s2.sonic_center(), c2, p1, theta_w);
  p.state_side1 = s2;
  p.state_side0 = s2;
  p.lower_a = p.lower_b = s2;
  p.upper = inc.state1;
  p.cone_le = {Vec2{0.0, 1.0}, e_s1};
  return p;
}

FreeBoundaryProblem prandtl_meyer_problem(const GasModel& gas, double u_inf, double rho_inf,
                                          double theta_w) {
  const auto ang = local::pm_angles(gas, u_inf, rho_inf);
  if (!(theta_w < ang.sonic))
    throw UnsupportedConfiguration("free-boundary solve needs a supersonic weak state (ramp angle below the sonic angle)");
  if (ang.sonic - theta_w < near_sonic_guard)
    throw UnsupportedConfiguration("near-sonic ramp angle: within 1e-6 of the sonic angle");
  const auto st = local::pm_states(gas, u_inf, rho_inf, theta_w);
  FreeBoundaryProblem p;
  p.configuration = Configuration::prandtl_meyer;
  p.gas = gas;
  p.theta_w = theta_w;
  p.bernoulli = st.bernoulli;
  p.upstream = st.inflow;

  const Vec2 ew = unit_at(theta_w), nw{-ew.y, ew.x};
  const Vec2 c0 = st.weak.sonic_center(), c1 = st.state1.sonic_center();
  const double r0 = gas.sound_speed(st.weak.rho), r1 = gas.sound_speed(st.state1.rho);
  const double s = st.s1_offset;
  if (!(s < r1)) throw UnsupportedConfiguration("normal shock misses the sonic circle of state (1)");
  const Vec2 es0 = unit_at(st.weak_polar.beta);
  const double ec = dot(es0, c0), disc = ec * ec - norm_sq(c0) + r0 * r0;
  if (disc < 0) throw UnsupportedConfiguration("weak shock misses the sonic circle of state (0)");
  const Vec2 ps0 = es0 * (ec - std::sqrt(disc));
  const Vec2 ps1 = c1 + nw * s + ew * std::sqrt(r1 * r1 - s * s);
  const Vec2 ramp0 = c0 - ew * r0, ramp1 = c1 + ew * r1;
  if (!(dot(ramp0, ew) < dot(ramp1, ew))) throw UnsupportedConfiguration("sonic arcs overlap on the ramp");

  p.shock_center = c1;
  p.shock_angle0 = angle_of(ps0 - c1);
  p.shock_angle1 = unwrap_near(angle_of(ps1 - c1), p.shock_angle0);
  p.pinned_radius0 = norm(ps0 - c1);
  p.pinned_radius1 = norm(ps1 - c1);
  p.wall0 = ramp0;
  p.wall1 = ramp1;
  p.wall_normal = nw;
  p.side0 = SideKind::dirichlet;
  p.arc0 = make_arc(c0, r0, ps0, theta_w + pi);
  p.arc1 = make_arc(c1, r1, ps1, theta_w);
  p.state_side0 = st.weak;
  p.state_side1 = st.state1;
  p.lower_a = st.weak;
  p.lower_b = st.state1;
  p.upper = st.inflow;
  p.cone_ge = {ew};
  p.cone_le = {es0};
  p.straight_shock_points = {Vec2{0.0, 0.0}, ps0, ps1, ps1 + ew * (2 * r1)};
  return p;
}

StructuredGrid build_grid(const FreeBoundaryProblem& p, const ShockPolyline& shock, int nx, int ny) {
  if (static_cast<int>(shock.size()) != ny + 1) throw PreconditionError("shock size does not match grid");
  StructuredGrid g{nx, ny, std::vector<Vec2>(static_cast<std::size_t>(nx + 1) * (ny + 1))};
  const Vec2 s0 = shock.vertex(0), s1 = shock.vertex(ny);
  const Vec2 w0 = p.wall0, w1 = p.wall1;
  auto side0 = [&](double a) { return p.side0 == SideKind::symmetry ? s0 * (1 - a) + w0 * a : p.arc0.at(a); };
  auto side1 = [&](double a) { return p.arc1.at(a); };
  for (int i = 0; i <= nx; ++i) {
    const double a = static_cast<double>(i) / nx;
    const Vec2 e0 = side0(a), e1 = side1(a);
    for (int j = 0; j <= ny; ++j) {
      const double b = static_cast<double>(j) / ny;
      const Vec2 sh = shock.vertex(j), wl = w0 * (1 - b) + w1 * b;
      g.nodes[g.index(i, j)] = sh * (1 - a) + wl * a + e0 * (1 - b) + e1 * b -
                               (s0 * ((1 - a) * (1 - b)) + w0 * (a * (1 - b)) + s1 * ((1 - a) * b) + w1 * (a * b));
    }
  }
  return g;
}

ShockPolyline initial_shock(const FreeBoundaryProblem& p, int ny) {
  ShockPolyline s;
  s.center = p.shock_center;
  s.pin_start = p.pinned_radius0.has_value();
  s.pin_end = true;
  s.angles.resize(ny + 1);
  s.radii.resize(ny + 1);
  for (int j = 0; j <= ny; ++j)
    s.angles[j] = p.shock_angle0 + (p.shock_angle1 - p.shock_angle0) * j / ny;
  const Vec2 end = s.center + unit_at(p.shock_angle1) * p.pinned_radius1;
  Vec2 start;
  if (p.pinned_radius0) {
    start = s.center + unit_at(p.shock_angle0) * *p.pinned_radius0;
  } else {
    // foot of the normal-reflection shock on the symmetry line
    const auto& st = p.upstream;
    const double rho1 = st.rho;
    const double rho0 = p.gas.density_from_enthalpy(p.bernoulli.B);
    const auto nr = local::solve_normal_reflection(p.gas, rho0, rho1);
    start = {nr.xi_bar, 0.0};
    if (p.normal_limit) start = {end.x, 0.0};
  }
  // chord from start to end, intersected with each ray
  const Vec2 d = end - start;
  for (int j = 0; j <= ny; ++j) {
    const Vec2 e = unit_at(s.angles[j]);
    const double den = cross(e, d);
    s.radii[j] = std::abs(den) < 1e-300 ? norm(start - s.center) : cross(start - s.center, d) / den;
  }
  s.radii[ny] = p.pinned_radius1;
  if (p.pinned_radius0) s.radii[0] = *p.pinned_radius0;
  return s;
}

}  // namespace ssflow::fb
