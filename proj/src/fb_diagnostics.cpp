#include <algorithm>
#include <cmath>

#include "fb_discretization.hpp"
#include "ssflow/fb_solver.hpp"

namespace ssflow::fb {

namespace {

using detail::Discretization;
using detail::NodeKind;

double one_sided(double f0, double f1, double f2, double h) { return (-3 * f0 + 4 * f1 - f2) / (2 * h); }

double d_logical(const std::vector<double>& f, const StructuredGrid& g, int i, int j, bool along_a) {
  const int n = along_a ? g.nx : g.ny;
  const int t = along_a ? i : j;
  const double h = 1.0 / n;
  auto F = [&](int s) { return along_a ? f[g.index(s, j)] : f[g.index(i, s)]; };
  if (t == 0) return one_sided(F(0), F(1), F(2), h);
  if (t == n) return -one_sided(F(n), F(n - 1), F(n - 2), h);
  return (F(t + 1) - F(t - 1)) / (2 * h);
}

}  // namespace

NodalCalculus::NodalCalculus(const StructuredGrid& g) : grid_(g), xa_(g.size()), xb_(g.size()) {
  std::vector<double> xs(g.size()), ys(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) xs[k] = g.nodes[k].x, ys[k] = g.nodes[k].y;
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const auto k = g.index(i, j);
      xa_[k] = {d_logical(xs, g, i, j, true), d_logical(ys, g, i, j, true)};
      xb_[k] = {d_logical(xs, g, i, j, false), d_logical(ys, g, i, j, false)};
    }
}

std::vector<Vec2> NodalCalculus::gradient(const std::vector<double>& f) const {
  const auto& g = grid_;
  std::vector<Vec2> out(g.size());
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const auto k = g.index(i, j);
      const double fa = d_logical(f, g, i, j, true), fb = d_logical(f, g, i, j, false);
      const Vec2 a = xa_[k], b = xb_[k];
      const double det = cross(a, b);
      out[k] = {(b.y * fa - a.y * fb) / det, (a.x * fb - b.x * fa) / det};
    }
  return out;
}

double NodalCalculus::jacobian_min() const {
  const auto& g = grid_;
  const double orient = cross(xa_[g.index(g.nx / 2, g.ny / 2)], xb_[g.index(g.nx / 2, g.ny / 2)]) > 0 ? 1.0 : -1.0;
  double m = 1e300;
  for (std::size_t k = 0; k < g.size(); ++k) m = std::min(m, orient * cross(xa_[k], xb_[k]));
  return m;
}

Diagnostics diagnostics_report(const FreeBoundaryProblem& p, const SelfSimilarField& field,
                               const ShockPolyline& shock, const SolverConfig& cfg) {
  (void)shock;
  const auto& g = field.grid;
  const Discretization d(p, g, cfg);
  std::vector<double> vp(g.size()), r;
  for (std::size_t k = 0; k < g.size(); ++k) vp[k] = field.phi[k] + 0.5 * norm_sq(g.nodes[k]);
  d.residual(vp, r);

  Diagnostics out;
  const double diam = d.diameter();
  double hmax = 0.0;
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      if (i < g.nx) hmax = std::max(hmax, norm(g.at(i + 1, j) - g.at(i, j)));
      if (j < g.ny) hmax = std::max(hmax, norm(g.at(i, j + 1) - g.at(i, j)));
    }
  out.ellipticity_min_margin = 1.0;
  for (int i = 0; i <= g.nx; ++i) {
    for (int j = 0; j <= g.ny; ++j) {
      const auto k = g.index(i, j);
      const auto& node = d.nodes()[k];
      const Vec2 x = g.nodes[k];
      if (node.kind == NodeKind::shock)
        out.rh_flux_residual_inf = std::max(out.rh_flux_residual_inf, std::abs(r[k]));
      else
        out.pde_residual_inf = std::max(out.pde_residual_inf, std::abs(r[k]));
      if (i == 0) out.rh_phi_residual_inf = std::max(out.rh_phi_residual_inf, std::abs(field.phi[k] - p.upstream.phi(x)));

      // on the sonic arcs D phi is prescribed by the neighbouring uniform state
      Vec2 grad = field.grad[k];
      if (!p.manufactured && j == g.ny) grad = p.state_side1.grad(x);
      if (!p.manufactured && j == 0 && p.side0 == SideKind::dirichlet) grad = p.state_side0.grad(x);

      const double lower = std::max(p.lower_a.phi(x), p.lower_b.phi(x));
      out.bounds_violation = std::max({out.bounds_violation, lower - field.phi[k], field.phi[k] - p.upper.phi(x)});
      const Vec2 dw = p.upper.grad(x) - grad;
      for (const Vec2& e : p.cone_ge) out.monotonicity_violation = std::max(out.monotonicity_violation, -dot(dw, e));
      for (const Vec2& e : p.cone_le) out.monotonicity_violation = std::max(out.monotonicity_violation, dot(dw, e));

      const double ds = p.distance_to_sonic(x);
      if (node.kind != NodeKind::dirichlet && ds >= 0.05 * diam)
        out.ellipticity_min_margin = std::min(out.ellipticity_min_margin, 1.0 - field.ratio[k]);
      if (field.cutoff_active[k]) {
        ++out.cutoff_active_nodes;
        if (ds > 3 * hmax) out.cutoff_confined = false;
      }
    }
  }

  // first-order one-sided gradient on the sonic arcs against the state gradient
  const double db = 1.0 / g.ny;
  auto arc_mismatch = [&](int j, int jn, const UniformState& s) {
    for (int i = 0; i <= g.nx; ++i) {
      const auto k = g.index(i, j);
      const auto& node = d.nodes()[k];
      const double pa = d_logical(vp, g, i, j, true);
      const double pb = (vp[k] - vp[g.index(i, jn)]) / (j > jn ? db : -db);
      const Vec2 a = node.xa, b = node.xb;
      const Vec2 gv{(b.y * pa - a.y * pb) / node.det, (a.x * pb - b.x * pa) / node.det};
      const Vec2 x = g.nodes[k];
      out.sonic_gradient_mismatch = std::max(out.sonic_gradient_mismatch, norm(gv - x - s.grad(x)));
    }
  };
  if (!p.manufactured) {
    arc_mismatch(g.ny, g.ny - 1, p.state_side1);
    if (p.side0 == SideKind::dirichlet) arc_mismatch(0, 1, p.state_side0);
  }
  return out;
}

std::optional<double> interpolate(const StructuredGrid& g, const std::vector<double>& f, Vec2 x) {
  constexpr double eps = 1e-10;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const Vec2 p00 = g.at(i, j), p10 = g.at(i + 1, j), p01 = g.at(i, j + 1), p11 = g.at(i + 1, j + 1);
      const double xmin = std::min({p00.x, p10.x, p01.x, p11.x}), xmax = std::max({p00.x, p10.x, p01.x, p11.x});
      const double ymin = std::min({p00.y, p10.y, p01.y, p11.y}), ymax = std::max({p00.y, p10.y, p01.y, p11.y});
      const double pad = 1e-9 * (xmax - xmin + ymax - ymin);
      if (x.x < xmin - pad || x.x > xmax + pad || x.y < ymin - pad || x.y > ymax + pad) continue;
      // inverse bilinear map by Newton
      double s = 0.5, t = 0.5;
      for (int it = 0; it < 30; ++it) {
        const Vec2 q = p00 * ((1 - s) * (1 - t)) + p10 * (s * (1 - t)) + p01 * ((1 - s) * t) + p11 * (s * t);
        const Vec2 qs = (p10 - p00) * (1 - t) + (p11 - p01) * t;
        const Vec2 qt = (p01 - p00) * (1 - s) + (p11 - p10) * s;
        const Vec2 res = q - x;
        const double det = cross(qs, qt);
        if (det == 0.0) break;
        const double ds = (res.x * qt.y - res.y * qt.x) / det, dt = (qs.x * res.y - qs.y * res.x) / det;
        s -= ds, t -= dt;
        if (std::abs(ds) + std::abs(dt) < 1e-15) break;
      }
      if (s < -eps || s > 1 + eps || t < -eps || t > 1 + eps) continue;
      return f[g.index(i, j)] * ((1 - s) * (1 - t)) + f[g.index(i + 1, j)] * (s * (1 - t)) +
             f[g.index(i, j + 1)] * ((1 - s) * t) + f[g.index(i + 1, j + 1)] * (s * t);
    }
  }
  return std::nullopt;
}

double cauchy_difference(const Solution& coarse, const Solution& fine, double sonic_exclusion) {
  const auto& g = coarse.field.grid;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& x : g.nodes)
    xmin = std::min(xmin, x.x), xmax = std::max(xmax, x.x), ymin = std::min(ymin, x.y), ymax = std::max(ymax, x.y);
  const double cut = sonic_exclusion * ((xmax - xmin) + (ymax - ymin));
  double d = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec2 x = g.nodes[k];
    if (coarse.problem.distance_to_sonic(x) < cut) continue;
    if (const auto v = interpolate(fine.field.grid, fine.field.phi, x)) d = std::max(d, std::abs(*v - coarse.field.phi[k]));
  }
  return d;
}

double assembled_potential(const Solution& s, Vec2 x) {
  const auto& p = s.problem;
  if (auto v = interpolate(s.field.grid, s.field.phi, x)) return *v;
  if (p.configuration == Configuration::prandtl_meyer)
    return std::min(p.upper.phi(x), std::max(p.lower_a.phi(x), p.lower_b.phi(x)));
  // regular reflection: incident shock at xi0, straight reflected shock through P1
  const double rho0 = p.gas.density_from_enthalpy(p.bernoulli.B);
  const UniformState s0{0.0, 0.0, 0.0, rho0};
  const double xi0 = p.upstream.rho * p.upstream.u / (p.upstream.rho - rho0);
  if (x.x >= xi0) return s0.phi(x);
  const auto& s2 = p.state_side1;
  const Vec2 p1 = s.shock.vertex(s.shock.size() - 1);
  const Vec2 t = p.normal_limit ? Vec2{0.0, -1.0} : normalized(p.straight_shock_points[1] - p.straight_shock_points[0]);
  const Vec2 o2 = s2.sonic_center();
  const bool downstream = cross(t, x - p1) * cross(t, o2 - p1) > 0;
  return downstream ? s2.phi(x) : p.upstream.phi(x);
}

}  // namespace ssflow::fb
