#include "ssflow/local_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ssflow/roots.hpp"

namespace ssflow::local {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr int speed_scan_points = 1000;
constexpr double tangent_gap = 1e-7;

void require_reflection_pair(double rho0, double rho1) {
  if (!(rho0 > 0.0) || !(rho1 > rho0))
    throw DomainError("need 0 < rho0 < rho1, got rho0=" + std::to_string(rho0) +
                      " rho1=" + std::to_string(rho1));
}

void require_reflection_angle(double theta_w) {
  if (!(theta_w > 0.0 && theta_w < pi / 2))
    throw DomainError("reflection wedge angle must lie in (0, pi/2), got " + std::to_string(theta_w));
}

// Speed cap along the wall: rho2 increases with q only up to xi0 / cos(theta_w).
double speed_cap(const jump::IncidentData& inc, double theta_w) { return inc.xi0 / std::cos(theta_w); }

// Flux mismatch across S1 at P0 divided by q, to remove the trivial root q = 0.
double reduced_flux(const GasModel& gas, const jump::IncidentData& inc, double theta_w, double q) {
  const auto s2 = state2_from_speed(gas, inc, theta_w, q);
  const Vec2 p0{inc.xi0, inc.xi0 * std::tan(theta_w)};
  const Vec2 n = normalized(inc.state1.velocity() - s2.velocity());
  const double f = inc.state1.rho * dot(inc.state1.grad(p0), n) - s2.rho * dot(s2.grad(p0), n);
  return f / q;
}

struct SpeedScan {
  std::vector<double> qs;
  std::vector<double> g;
};

SpeedScan scan_speeds(const GasModel& gas, const jump::IncidentData& inc, double theta_w) {
  SpeedScan s;
  const double cap = speed_cap(inc, theta_w);
  s.qs = logspace(cap * 1e-12, cap, speed_scan_points);
  s.g.reserve(s.qs.size());
  for (double q : s.qs) s.g.push_back(reduced_flux(gas, inc, theta_w, q));
  return s;
}

// Minimum of the reduced flux over the speed range (refined in log q).
Extremum min_reduced_flux(const GasModel& gas, const jump::IncidentData& inc, double theta_w,
                          const SpeedScan& s) {
  const auto it = std::min_element(s.g.begin(), s.g.end());
  const auto i = static_cast<std::size_t>(it - s.g.begin());
  const double lo = std::log(s.qs[i == 0 ? 0 : i - 1]);
  const double hi = std::log(s.qs[std::min(i + 1, s.qs.size() - 1)]);
  auto f = [&](double lq) { return reduced_flux(gas, inc, theta_w, std::exp(lq)); };
  const auto m = minimize_unimodal(f, lo, hi);
  return {std::exp(m.x), m.f};
}

}  // namespace

void validate(const WedgeGeometry& w) {
  const double hi = w.kind == WedgeKind::diffraction ? pi : pi / 2;
  if (!(w.theta_w > 0.0 && w.theta_w < hi))
    throw DomainError("wedge angle " + std::to_string(w.theta_w) + " outside (0, " +
                      std::to_string(hi) + ")");
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::supersonic: return "supersonic";
    case Classification::sonic: return "sonic";
    case Classification::subsonic: return "subsonic";
    case Classification::detached: return "detached";
  }
  return "?";
}

double State2Residuals::max_abs() const {
  return std::max({std::abs(slip), std::abs(phi_jump), std::abs(flux_jump), std::abs(bernoulli)});
}

UniformState state2_from_speed(const GasModel& gas, const jump::IncidentData& inc, double theta_w,
                               double q) {
  const double u2 = q * std::cos(theta_w), v2 = q * std::sin(theta_w);
  // phi2(P0) = phi1(P0); phi1(P0) + |P0|^2/2 = u1 xi0 + k1 = 0
  const double k2 = -q * speed_cap(inc, theta_w);
  return make_uniform_state(gas, inc.bernoulli, u2, v2, k2);
}

State2Residuals state2_residuals(const GasModel& gas, const jump::IncidentData& inc, double theta_w,
                                 const UniformState& s2) {
  const Vec2 p0{inc.xi0, inc.xi0 * std::tan(theta_w)};
  const Vec2 nw{-std::sin(theta_w), std::cos(theta_w)};
  State2Residuals r{};
  r.slip = dot(s2.grad(p0), nw);
  const Vec2 du = inc.state1.velocity() - s2.velocity();
  const auto rh = jump::rh_residual(gas, inc.bernoulli, inc.state1, s2, p0, normalized(du));
  r.phi_jump = rh.dphi;
  r.flux_jump = rh.dflux;
  r.bernoulli = bernoulli_mismatch(gas, inc.bernoulli, s2);
  return r;
}

ReflectionLocalData state2_regular_reflection(const GasModel& gas, double rho0, double rho1,
                                              double theta_w) {
  require_reflection_pair(rho0, rho1);
  require_reflection_angle(theta_w);
  ReflectionLocalData out;
  out.theta_w = theta_w;
  out.incident = jump::incident_shock(gas, rho0, rho1);
  const auto& inc = out.incident;
  out.state0 = inc.state0;
  out.state1 = inc.state1;
  out.p0 = {inc.xi0, inc.xi0 * std::tan(theta_w)};

  const auto scan = scan_speeds(gas, inc, theta_w);
  auto g = [&](double q) { return reduced_flux(gas, inc, theta_w, q); };
  std::vector<std::pair<double, double>> brackets;
  for (std::size_t i = 0; i + 1 < scan.qs.size(); ++i)
    if (std::signbit(scan.g[i]) != std::signbit(scan.g[i + 1]))
      brackets.emplace_back(scan.qs[i], scan.qs[i + 1]);

  std::vector<double> roots;
  if (brackets.empty()) {
    // both roots may sit between two samples close to detachment
    const auto m = min_reduced_flux(gas, inc, theta_w, scan);
    if (m.f < 0.0) {
      const auto it = std::upper_bound(scan.qs.begin(), scan.qs.end(), m.x);
      const double lo = *(it - 1), hi = it == scan.qs.end() ? scan.qs.back() : *it;
      roots.push_back(bisect(g, lo, m.x, 1e-16 * m.x, "weak state (2)"));
      roots.push_back(bisect(g, m.x, hi, 1e-16 * hi, "strong state (2)"));
    } else if (m.f == 0.0) {
      roots.push_back(m.x);
    }
  } else {
    for (const auto& [lo, hi] : brackets) roots.push_back(bisect(g, lo, hi, 1e-16 * hi, "state (2)"));
  }

  std::vector<UniformState> states;
  for (double q : roots) states.push_back(state2_from_speed(gas, inc, theta_w, q));
  std::sort(states.begin(), states.end(),
            [](const UniformState& a, const UniformState& b) { return a.rho < b.rho; });
  if (states.size() >= 2 && std::abs(norm(states[0].velocity()) - norm(states[1].velocity())) <
                                tangent_gap * norm(states[1].velocity())) {
    states.erase(states.begin() + 1);
    out.tangent = true;
  }
  if (states.empty()) return out;
  out.weak = states.front();
  out.strong = states.size() >= 2 ? states.back() : states.front();
  const double c2 = gas.sound_speed(out.weak->rho);
  out.weak_ratio = norm(out.weak->grad(out.p0)) / c2;
  const auto cls = classify_ratio(out.weak_ratio);
  out.classification = cls.type == FlowType::hyperbolic ? Classification::supersonic
                       : cls.type == FlowType::sonic    ? Classification::sonic
                                                        : Classification::subsonic;
  return out;
}

double detachment_angle(const GasModel& gas, double rho0, double rho1) {
  require_reflection_pair(rho0, rho1);
  const auto inc = jump::incident_shock(gas, rho0, rho1);
  auto m = [&](double th) { return min_reduced_flux(gas, inc, th, scan_speeds(gas, inc, th)).f; };
  double hi = pi / 2 - 1e-3;
  if (!(m(hi) < 0.0)) throw SearchFailure("detachment angle: no state (2) near pi/2", hi, pi / 2);
  double lo = hi;
  const int n = 64;
  for (int k = 1; k < n; ++k) {
    lo = hi * (n - k) / n;
    if (m(lo) > 0.0) break;
    hi = lo;
  }
  if (!(m(lo) > 0.0)) throw SearchFailure("detachment angle: roots persist for all angles", lo, pi / 2);
  return bisect(m, lo, hi, 1e-13, "detachment angle");
}

double sonic_angle(const GasModel& gas, double rho0, double rho1) {
  const double thd = detachment_angle(gas, rho0, rho1);
  // the ratio grows like 1/(pi/2 - theta), so the scan can stop well short of pi/2
  auto f = [&](double th) {
    try {
      const auto d = state2_regular_reflection(gas, rho0, rho1, th);
      return d.weak ? d.weak_ratio - 1.0 : nan;
    } catch (const SearchFailure&) {
      return nan;
    }
  };
  const auto grid = linspace(thd + 1e-9, pi / 2 - 1e-4, 128);
  const auto br = sign_changes(f, grid);
  if (br.empty()) throw SearchFailure("sonic angle: weak state never sonic", grid.front(), grid.back());
  return bisect(f, br.front().first, br.front().second, 1e-13, "sonic angle");
}

DiffractionContact diffraction_contacts(const GasModel& gas, const jump::IncidentData& inc,
                                        double theta_w) {
  const Vec2 d = unit_at(theta_w - pi);
  const double c0 = gas.sound_speed(inc.state0.rho);
  const double c1 = gas.sound_speed(inc.state1.rho);
  const double u1 = inc.u1;
  const double disc = c1 * c1 - u1 * u1 * (1.0 - d.x * d.x);
  DiffractionContact out{d * c0, {nan, nan}, -c0};
  if (disc < 0.0) return out;  // ray misses circle 1
  const double s1 = u1 * d.x + std::sqrt(disc);
  out.on_circle1 = d * s1;
  out.gap = s1 - c0;
  return out;
}

double diffraction_critical_angle(const GasModel& gas, double rho0, double rho1) {
  require_reflection_pair(rho0, rho1);
  const auto inc = jump::incident_shock(gas, rho0, rho1);
  auto gap = [&](double th) { return diffraction_contacts(gas, inc, th).gap; };
  const auto grid = linspace(1e-9, pi - 1e-9, 2001);
  const auto br = sign_changes(gap, grid);
  if (br.size() != 1)
    throw SearchFailure("critical angle: expected one tangency, found " + std::to_string(br.size()),
                        grid.front(), grid.back());
  return bisect(gap, br[0].first, br[0].second, 1e-13, "critical angle");
}

CriticalAngles critical_angles(const GasModel& gas, double rho0, double rho1) {
  CriticalAngles a{sonic_angle(gas, rho0, rho1), detachment_angle(gas, rho0, rho1), std::nullopt};
  try {
    a.diffraction_critical = diffraction_critical_angle(gas, rho0, rho1);
  } catch (const SearchFailure&) {
  }
  return a;
}

NormalReflection solve_normal_reflection(const GasModel& gas, double rho0, double rho1) {
  require_reflection_pair(rho0, rho1);
  const auto inc = jump::incident_shock(gas, rho0, rho1);
  const double u1 = inc.u1;
  const double h1 = gas.enthalpy(rho1);
  auto xi_bar = [&](double r2) { return rho1 * u1 / (rho1 - r2); };
  auto f = [&](double r2) { return gas.enthalpy(r2) - h1 - 0.5 * u1 * u1 + u1 * xi_bar(r2); };
  const double lo = rho1 * (1.0 + 1e-14);
  const double hi = expand_bracket(f, lo, 2.0 * rho1, 1e12 * rho1, 2.0, "normal reflection");
  const double r2 = bisect(f, lo, hi, 4 * std::numeric_limits<double>::epsilon() * hi,
                           "normal reflection");
  NormalReflection out;
  out.rho2 = r2;
  out.xi_bar = xi_bar(r2);
  out.state2 = {0.0, 0.0, u1 * (out.xi_bar - inc.xi0), r2};
  return out;
}

double PolarResiduals::max_abs() const {
  return std::max({std::abs(tangential), std::abs(mass), std::abs(bernoulli)});
}

PolarSample polar_point(const GasModel& gas, double u_inf, double rho_inf, double beta) {
  const double c_inf = gas.sound_speed(rho_inf);
  const double sb = std::sin(beta);
  const double cb = beta == pi / 2 ? 0.0 : std::cos(beta);
  const double w1 = u_inf * sb;
  if (w1 <= c_inf) return {beta, u_inf, 0.0, rho_inf};  // at or below the Mach angle: no shock
  // (h(rho) - h_inf)/(rho - rho_inf) = w1^2 (rho + rho_inf) / (2 rho^2)
  auto g = [&](double r) {
    return jump::enthalpy_slope(gas, rho_inf, r) - w1 * w1 * (r + rho_inf) / (2.0 * r * r);
  };
  const double hi = expand_bracket(g, rho_inf, 2.0 * rho_inf, 1e12 * rho_inf, 2.0, "polar density");
  const double rho = bisect(g, rho_inf, hi, 2 * std::numeric_limits<double>::epsilon() * hi,
                            "polar density");
  const double w2 = w1 * rho_inf / rho;
  return {beta, u_inf * cb * cb + w2 * sb, cb * (u_inf * sb - w2), rho};
}

PolarResiduals polar_residuals(const GasModel& gas, double u_inf, double rho_inf,
                               const PolarSample& s) {
  const Vec2 t{std::cos(s.beta), std::sin(s.beta)};
  const Vec2 n{t.y, -t.x};
  const Vec2 up{u_inf, 0.0}, down{s.u, s.v};
  return {dot(down - up, t), s.rho * dot(down, n) - rho_inf * dot(up, n),
          gas.enthalpy(s.rho) + 0.5 * norm_sq(down) - gas.enthalpy(rho_inf) - 0.5 * u_inf * u_inf};
}

static double mach_angle(const GasModel& gas, double u_inf, double rho_inf) {
  const double c = gas.sound_speed(rho_inf);
  if (!(u_inf > c))
    throw DomainError("supersonic inflow required: u_inf=" + std::to_string(u_inf) +
                      " c_inf=" + std::to_string(c));
  return std::asin(c / u_inf);
}

PolarCurve steady_shock_polar(const GasModel& gas, double u_inf, double rho_inf, int n_samples) {
  if (n_samples < 2) throw DomainError("polar needs at least two samples");
  PolarCurve pc{u_inf, rho_inf, mach_angle(gas, u_inf, rho_inf), {}};
  pc.samples.reserve(n_samples);
  for (double b : linspace(pc.mach_angle, pi / 2, n_samples))
    pc.samples.push_back(polar_point(gas, u_inf, rho_inf, b));
  pc.samples.back() = polar_point(gas, u_inf, rho_inf, pi / 2);
  return pc;
}

static double deflection(const PolarSample& s) { return std::atan2(s.v, s.u); }

PmAngles pm_angles(const GasModel& gas, double u_inf, double rho_inf, SonicReference ref) {
  const double mu = mach_angle(gas, u_inf, rho_inf);
  auto delta = [&](double b) { return deflection(polar_point(gas, u_inf, rho_inf, b)); };
  const auto mx = maximize_unimodal(delta, mu, pi / 2);
  PmAngles a{};
  a.detachment = mx.f;
  a.beta_detachment = mx.x;
  const double c_inf = gas.sound_speed(rho_inf);
  auto excess = [&](double b) {
    const auto s = polar_point(gas, u_inf, rho_inf, b);
    const double c = ref == SonicReference::local ? gas.sound_speed(s.rho) : c_inf;
    return std::hypot(s.u, s.v) - c;
  };
  a.beta_sonic = bisect(excess, mu, a.beta_detachment, 1e-14, "PM sonic angle");
  a.sonic = delta(a.beta_sonic);
  return a;
}

PmStates pm_states(const GasModel& gas, double u_inf, double rho_inf, double theta_w) {
  validate({theta_w, WedgeKind::ramp});
  const auto ang = pm_angles(gas, u_inf, rho_inf);
  PmStates out;
  out.theta_w = theta_w;
  out.bernoulli = {gas.enthalpy(rho_inf) + 0.5 * u_inf * u_inf};
  out.inflow = {u_inf, 0.0, 0.0, rho_inf};
  const double mu = mach_angle(gas, u_inf, rho_inf);
  auto delta = [&](double b) {
    return deflection(polar_point(gas, u_inf, rho_inf, b)) - theta_w;
  };
  if (theta_w > ang.detachment + 1e-10)
    throw UnsupportedConfiguration("ramp angle above detachment: no attached weak shock");
  if (theta_w >= ang.detachment - 1e-10) {
    out.tangent = true;
    out.weak_polar = out.strong_polar = polar_point(gas, u_inf, rho_inf, ang.beta_detachment);
  } else {
    out.weak_polar = polar_point(gas, u_inf, rho_inf,
                                 bisect(delta, mu, ang.beta_detachment, 1e-15, "PM weak state"));
    out.strong_polar = polar_point(gas, u_inf, rho_inf,
                                   bisect(delta, ang.beta_detachment, pi / 2, 1e-15, "PM strong state"));
  }
  out.weak = {out.weak_polar.u, out.weak_polar.v, 0.0, out.weak_polar.rho};
  out.strong = {out.strong_polar.u, out.strong_polar.v, 0.0, out.strong_polar.rho};

  // normal shock parallel to the ramp: w = normal inflow speed, s = offset of S1
  const double w = u_inf * std::sin(theta_w);
  const double h_inf = gas.enthalpy(rho_inf);
  auto f = [&](double r1) {
    return gas.enthalpy(r1) - h_inf - 0.5 * w * w - w * w * rho_inf / (r1 - rho_inf);
  };
  const double lo = rho_inf * (1.0 + 1e-13);
  const double hi = expand_bracket(f, lo, 2.0 * rho_inf, 1e12 * rho_inf, 2.0, "PM state (1)");
  const double r1 = bisect(f, lo, hi, 2 * std::numeric_limits<double>::epsilon() * hi, "PM state (1)");
  out.s1_offset = rho_inf * w / (r1 - rho_inf);
  const double q1 = u_inf * std::cos(theta_w);
  out.state1 = {q1 * std::cos(theta_w), q1 * std::sin(theta_w), -w * out.s1_offset, r1};
  return out;
}

}  // namespace ssflow::local
