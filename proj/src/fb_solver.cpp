#include "ssflow/fb_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fb_discretization.hpp"

namespace ssflow::fb {

namespace detail {

Discretization::Discretization(const FreeBoundaryProblem& p, const StructuredGrid& g,
                               const SolverConfig& cfg)
    : p_(p), grid_(g), geo_(g.size()), da_(1.0 / g.nx), db_(1.0 / g.ny) {
  const int n = g.nx, m = g.ny;
  std::vector<double> xs(g.size()), ys(g.size());
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (std::size_t k = 0; k < g.size(); ++k) {
    xs[k] = g.nodes[k].x;
    ys[k] = g.nodes[k].y;
    xmin = std::min(xmin, xs[k]), xmax = std::max(xmax, xs[k]);
    ymin = std::min(ymin, ys[k]), ymax = std::max(ymax, ys[k]);
  }
  diam_ = (xmax - xmin) + (ymax - ymin);
  const double d0 = cfg.cutoff_range_fraction * diam_;

  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= m; ++j) {
      auto& q = geo_[g.index(i, j)];
      q.x = g.at(i, j);
      q.xa = {d_a(xs, i, j), d_a(ys, i, j)};
      q.xb = {d_b(xs, i, j), d_b(ys, i, j)};
      q.det = cross(q.xa, q.xb);
    }
  const double orient = geo_[g.index(n / 2, m / 2)].det > 0 ? 1.0 : -1.0;
  for (const auto& q : geo_)
    if (!(orient * q.det > 0.0)) folded_ = true;

  const auto& mf = p.manufactured;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      auto& q = geo_[g.index(i, j)];
      const Vec2 x = q.x;
      const bool dir0 = j == 0 && p.side0 == SideKind::dirichlet;
      if (j == m || dir0 || (i == 0 && mf)) {
        q.kind = NodeKind::dirichlet;
        const double phi = mf ? mf->phi(x) : (j == m ? p.state_side1 : p.state_side0).phi(x);
        q.target = phi + 0.5 * norm_sq(x);
      } else if (i == 0) {
        q.kind = NodeKind::shock;
        Vec2 nu = normalized(perp(q.xb));
        if (dot(nu, x - g.at(1, j)) < 0) nu = -nu;
        q.normal = nu;
      } else if (i == n && j == 0) {
        q.kind = NodeKind::wall_symmetry;
        q.normal = p.wall_normal;
        if (mf) q.neumann = dot(mf->grad(x), p.wall_normal) + dot(mf->grad(x), p.symmetry_normal);
      } else if (i == n) {
        q.kind = NodeKind::wall;
        q.normal = p.wall_normal;
        if (mf) q.neumann = dot(mf->grad(x), p.wall_normal);
      } else if (j == 0) {
        q.kind = NodeKind::symmetry;
        q.normal = p.symmetry_normal;
        if (mf) q.neumann = dot(mf->grad(x), p.symmetry_normal);
      } else {
        q.kind = NodeKind::interior;
        q.cutoff_limit = 1.0 - cfg.delta_cutoff * std::min(p.distance_to_sonic(x), d0);
        q.xaa = {(xs[g.index(i + 1, j)] - 2 * xs[g.index(i, j)] + xs[g.index(i - 1, j)]) / (da_ * da_),
                 (ys[g.index(i + 1, j)] - 2 * ys[g.index(i, j)] + ys[g.index(i - 1, j)]) / (da_ * da_)};
        q.xbb = {(xs[g.index(i, j + 1)] - 2 * xs[g.index(i, j)] + xs[g.index(i, j - 1)]) / (db_ * db_),
                 (ys[g.index(i, j + 1)] - 2 * ys[g.index(i, j)] + ys[g.index(i, j - 1)]) / (db_ * db_)};
        auto mixed = [&](const std::vector<double>& f) {
          return (f[g.index(i + 1, j + 1)] - f[g.index(i + 1, j - 1)] - f[g.index(i - 1, j + 1)] +
                  f[g.index(i - 1, j - 1)]) / (4 * da_ * db_);
        };
        q.xab = {mixed(xs), mixed(ys)};
        const Vec2 a = q.xa, b = q.xb;
        Eigen::Matrix3d M;
        M << a.x * a.x, 2 * a.x * a.y, a.y * a.y,
             a.x * b.x, a.x * b.y + a.y * b.x, a.y * b.y,
             b.x * b.x, 2 * b.x * b.y, b.y * b.y;
        const Eigen::Matrix3d Mi = M.inverse();
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) q.hess_inv[3 * r + c] = Mi(r, c);
        if (mf) q.source = manufactured_operator(p, x, q.cutoff_limit);
      }
    }
  }
}

double manufactured_operator(const FreeBoundaryProblem& p, Vec2 x, double cutoff_limit) {
  const auto& mf = *p.manufactured;
  const double phi = mf.phi(x);
  const Vec2 d = mf.grad(x);
  const auto h = mf.hessian(x);
  const double q2 = norm_sq(d);
  const double c2 = p.gas.sound_speed_sq_from_head(p.bernoulli.B - 0.5 * q2 - phi);
  if (!(c2 > 0)) throw VacuumError("manufactured solution reaches vacuum");
  const double w2 = q2 / c2;
  const double f = w2 > cutoff_limit ? cutoff_limit / q2 : 1.0 / c2;
  return (1 - f * d.x * d.x) * h[0] - 2 * f * d.x * d.y * h[1] + (1 - f * d.y * d.y) * h[2] + 2 - w2;
}

}  // namespace detail

namespace {

using detail::Discretization;
using detail::NodeKind;
using SpMat = Eigen::SparseMatrix<double>;

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

// Exact Jacobian by forward-mode differentiation with a 5x5 colouring (stencil radius 2).
SpMat jacobian(const Discretization& d, const std::vector<double>& x) {
  const int n = d.nx(), m = d.ny();
  const auto& g = d.grid();
  std::vector<Dual> xd(x.size()), rd;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(x.size() * 20);
  for (int ci = 0; ci < 5; ++ci) {
    for (int cj = 0; cj < 5; ++cj) {
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) {
          const std::size_t k = g.index(i, j);
          xd[k] = Dual(x[k], (i % 5 == ci && j % 5 == cj) ? 1.0 : 0.0);
        }
      d.residual(xd, rd);
      for (int i = 0; i <= n; ++i) {
        int oi = i - (((i - ci) % 5) + 5) % 5;
        if (i - oi > 2) oi += 5;
        if (oi > n) continue;
        for (int j = 0; j <= m; ++j) {
          const double v = rd[g.index(i, j)].d;
          if (v == 0.0) continue;
          int oj = j - (((j - cj) % 5) + 5) % 5;
          if (j - oj > 2) oj += 5;
          if (oj > m) continue;
          trip.emplace_back(static_cast<int>(g.index(i, j)), static_cast<int>(g.index(oi, oj)), v);
        }
      }
    }
  }
  SpMat J(static_cast<int>(x.size()), static_cast<int>(x.size()));
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

// Residual norm, or +inf when the state is not admissible (vacuum).
double residual_norm(const Discretization& d, const std::vector<double>& x, std::vector<double>& r) {
  try {
    d.residual(x, r);
  } catch (const VacuumError&) {
    return std::numeric_limits<double>::infinity();
  }
  return max_abs(r);
}

std::vector<double> newton(const Discretization& d, std::vector<double> x, const SolverConfig& cfg) {
  const double tol = 1e-2 * cfg.tol_pde;
  std::vector<double> r, rt, xt(x.size());
  double n0 = residual_norm(d, x, r);
  if (!std::isfinite(n0)) throw NonConvergence("vacuum in the initial state of the elliptic solve", n0);
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  for (int it = 0; it < cfg.max_newton; ++it) {
    if (n0 <= tol) return x;
    const SpMat J = jacobian(d, x);
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw NonConvergence("singular Jacobian in the elliptic solve", n0);
    const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<long>(r.size()));
    const Eigen::VectorXd dx = lu.solve(-rv);
    double lam = 1.0, nt = n0;
    for (; lam > 1e-3; lam *= 0.5) {
      for (std::size_t k = 0; k < x.size(); ++k) xt[k] = x[k] + lam * dx[static_cast<long>(k)];
      nt = residual_norm(d, xt, rt);
      if (nt < n0 * (1 - 1e-4 * lam)) break;
    }
    if (!(lam > 1e-3)) {
      // round-off floor: accept when the residual is already tiny
      if (n0 <= 1e3 * tol) return x;
      throw NonConvergence("line search failed in the elliptic solve", n0);
    }
    x.swap(xt);
    r.swap(rt);
    n0 = nt;
  }
  if (n0 <= tol) return x;
  throw NonConvergence("Newton iteration cap reached in the elliptic solve", n0);
}

SelfSimilarField make_field(const FreeBoundaryProblem& p, const Discretization& d,
                            const std::vector<double>& vp) {
  const auto& g = d.grid();
  SelfSimilarField f;
  f.grid = g;
  const std::size_t n = g.size();
  f.phi.resize(n), f.grad.resize(n), f.rho.resize(n), f.c2.resize(n), f.ratio.resize(n);
  f.cutoff_active.assign(n, 0);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const Vec2 x = g.nodes[k];
      const auto gr = d.gradient(vp, i, j);
      f.phi[k] = vp[k] - 0.5 * norm_sq(x);
      f.grad[k] = Vec2{gr[0], gr[1]} - x;
      const double q2 = norm_sq(f.grad[k]);
      const double head = p.bernoulli.B - 0.5 * q2 - f.phi[k];
      f.c2[k] = p.gas.sound_speed_sq_from_head(head);
      f.rho[k] = p.gas.density_from_head(head);
      f.ratio[k] = std::sqrt(q2 / f.c2[k]);
      const auto& node = d.nodes()[k];
      f.cutoff_active[k] = node.kind == NodeKind::interior && q2 / f.c2[k] > node.cutoff_limit;
    }
  return f;
}

std::vector<double> reference_vp(const FreeBoundaryProblem& p, const StructuredGrid& g) {
  std::vector<double> v(g.size());
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const Vec2 x = g.at(i, j);
      v[g.index(i, j)] = p.phi_reference(x, static_cast<double>(j) / g.ny) + 0.5 * norm_sq(x);
    }
  return v;
}

// Logical-space bilinear transfer of nodal values between grid resolutions.
std::vector<double> transfer(const std::vector<double>& f, int nx0, int ny0, int nx1, int ny1) {
  std::vector<double> out(static_cast<std::size_t>(nx1 + 1) * (ny1 + 1));
  auto F = [&](int i, int j) { return f[static_cast<std::size_t>(i) * (ny0 + 1) + j]; };
  for (int i = 0; i <= nx1; ++i)
    for (int j = 0; j <= ny1; ++j) {
      const double a = static_cast<double>(i) * nx0 / nx1, b = static_cast<double>(j) * ny0 / ny1;
      const int i0 = std::min(static_cast<int>(a), nx0 - 1), j0 = std::min(static_cast<int>(b), ny0 - 1);
      const double s = a - i0, t = b - j0;
      out[static_cast<std::size_t>(i) * (ny1 + 1) + j] =
          (1 - s) * (1 - t) * F(i0, j0) + s * (1 - t) * F(i0 + 1, j0) + (1 - s) * t * F(i0, j0 + 1) +
          s * t * F(i0 + 1, j0 + 1);
    }
  return out;
}

ShockPolyline refine_shock(const FreeBoundaryProblem& p, const ShockPolyline& coarse, int ny) {
  // intersect each fine ray with the coarse polyline (exact for straight shocks)
  ShockPolyline s = initial_shock(p, ny);
  const int nc = static_cast<int>(coarse.size()) - 1;
  for (int j = 0; j <= ny; ++j) {
    const double b = static_cast<double>(j) * nc / ny;
    const int j0 = std::min(static_cast<int>(b), nc - 1);
    const Vec2 q0 = coarse.vertex(j0), d = coarse.vertex(j0 + 1) - q0;
    const Vec2 e = unit_at(s.angles[j]);
    const double den = cross(e, d);
    const double t = b - j0;
    s.radii[j] = std::abs(den) > 1e-14 * norm(d) ? cross(q0 - s.center, d) / den
                                                   : (1 - t) * coarse.radii[j0] + t * coarse.radii[j0 + 1];
  }
  return s;
}

}  // namespace

SelfSimilarField elliptic_solve(const FreeBoundaryProblem& p, const ShockPolyline& shock,
                                const std::vector<double>& phi_guess, const SolverConfig& cfg) {
  const auto g = build_grid(p, shock, cfg.nx, cfg.ny);
  const Discretization d(p, g, cfg);
  if (d.folded()) throw NonConvergence("grid folds for the given shock", 0.0);
  if (phi_guess.size() != g.size()) throw PreconditionError("initial field does not match the grid");
  std::vector<double> vp(g.size());
  for (std::size_t k = 0; k < vp.size(); ++k) vp[k] = phi_guess[k] + 0.5 * norm_sq(g.nodes[k]);
  return make_field(p, d, newton(d, vp, cfg));
}

InitialGuess build_initial_guess(const FreeBoundaryProblem& p, const SolverConfig& cfg) {
  InitialGuess ig;
  ig.shock = initial_shock(p, cfg.ny);
  const auto g = build_grid(p, ig.shock, cfg.nx, cfg.ny);
  const Discretization d(p, g, cfg);
  ig.field = make_field(p, d, reference_vp(p, g));
  return ig;
}

ShockUpdate shock_update(const FreeBoundaryProblem& p, const SelfSimilarField& field,
                         const ShockPolyline& shock, const SolverConfig& cfg, double relax) {
  const auto& g = field.grid;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& x : g.nodes)
    xmin = std::min(xmin, x.x), xmax = std::max(xmax, x.x), ymin = std::min(ymin, x.y), ymax = std::max(ymax, x.y);
  const double cap = cfg.max_move_fraction * ((xmax - xmin) + (ymax - ymin));
  ShockUpdate u{shock, 0.0};
  const int m = g.ny;
  std::vector<double> t(m + 1, 0.0);
  for (int j = 0; j <= m; ++j) {
    if ((j == 0 && shock.pin_start) || (j == m && shock.pin_end)) continue;
    const std::size_t k = g.index(0, j);
    const Vec2 x = g.nodes[k];
    const double dphi = field.phi[k] - p.upstream.phi(x);
    const double slope = dot(field.grad[k] - p.upstream.grad(x), unit_at(shock.angles[j]));
    t[j] = -dphi / slope;
    if (!std::isfinite(t[j]))
      throw SearchFailure("shock update: level set not bracketed on a ray", shock.angles[j], shock.angles[j]);
    u.displacement = std::max(u.displacement, std::abs(t[j]));
  }
  // (1, 4, 1)/6 smoothing: invertible, so the fixed point is unchanged, but the
  // sawtooth mode next to a pinned end is damped threefold
  for (int j = 0; j <= m; ++j) {
    if ((j == 0 && shock.pin_start) || (j == m && shock.pin_end)) continue;
    const double left = j > 0 ? t[j - 1] : t[j + 1];  // mirror at a free end
    const double right = j < m ? t[j + 1] : t[j - 1];
    const double ts = (left + 4 * t[j] + right) / 6;
    u.shock.radii[j] += std::clamp(relax * ts, -cap, cap);
    if (!(u.shock.radii[j] > 0.0)) throw SearchFailure("shock update: ray search left the chart", shock.angles[j], shock.angles[j]);
  }
  return u;
}

Solution solve(const FreeBoundaryProblem& p, const SolverConfig& cfg) {
  cfg.validate();
  ShockPolyline shock;
  std::vector<double> psi;
  const bool seq = cfg.grid_sequencing && cfg.nx % 2 == 0 && cfg.ny % 2 == 0 &&
                   cfg.nx / 2 >= cfg.min_sequencing_cells && cfg.ny / 2 >= cfg.min_sequencing_cells &&
                   !p.manufactured;
  if (seq) {
    SolverConfig cc = cfg;
    cc.nx /= 2, cc.ny /= 2;
    cc.tol_shock = std::max(cfg.tol_shock, 1e-7);
    const auto coarse = solve(p, cc);
    shock = refine_shock(p, coarse.shock, cfg.ny);
    const auto cref = reference_vp(p, coarse.field.grid);
    std::vector<double> cpsi(cref.size());
    for (std::size_t k = 0; k < cref.size(); ++k)
      cpsi[k] = coarse.field.phi[k] + 0.5 * norm_sq(coarse.field.grid.nodes[k]) - cref[k];
    psi = transfer(cpsi, cc.nx, cc.ny, cfg.nx, cfg.ny);
  } else {
    shock = initial_shock(p, cfg.ny);
    psi.assign(static_cast<std::size_t>(cfg.nx + 1) * (cfg.ny + 1), 0.0);
  }

  Solution sol;
  sol.problem = p;
  sol.config = cfg;
  double relax = cfg.relax;
  std::optional<ShockPolyline> previous;
  double last_residual = std::numeric_limits<double>::infinity();
  int growth = 0;  // consecutive outer steps with a larger displacement
  auto fail = [&](const std::string& what) {
    std::shared_ptr<Solution> partial;
    if (!sol.field.phi.empty()) {
      partial = std::make_shared<Solution>(sol);
      partial->diagnostics = diagnostics_report(p, sol.field, sol.shock, cfg);
      partial->diagnostics.outer_iterations = static_cast<int>(sol.displacement_history.size());
      partial->diagnostics.shock_displacement = last_residual;
    }
    throw SolveFailure(what, last_residual, partial);
  };
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    bool ok = true;
    try {
      const auto g = build_grid(p, shock, cfg.nx, cfg.ny);
      const Discretization d(p, g, cfg);
      if (d.folded()) throw NonConvergence("grid folded", 0.0);
      auto vp = reference_vp(p, g);
      const auto ref = vp;
      for (std::size_t k = 0; k < vp.size(); ++k) vp[k] += psi[k];
      vp = newton(d, vp, cfg);
      for (std::size_t k = 0; k < vp.size(); ++k) psi[k] = vp[k] - ref[k];
      sol.field = make_field(p, d, vp);
      sol.shock = shock;
      const auto upd = shock_update(p, sol.field, shock, cfg, relax);
      sol.displacement_history.push_back(upd.displacement);
      if (cfg.verbose)
        std::fprintf(stderr, "[fb %dx%d] outer %d displacement %.3e relax %.3g\n", cfg.nx, cfg.ny, outer,
                     upd.displacement, relax);
      if (upd.displacement <= cfg.tol_shock) {
        sol.diagnostics = diagnostics_report(p, sol.field, sol.shock, cfg);
        sol.diagnostics.outer_iterations = outer;
        sol.diagnostics.shock_displacement = upd.displacement;
        return sol;
      }
      growth = upd.displacement > last_residual ? growth + 1 : 0;
      last_residual = upd.displacement;
      // slowly growing oscillation near the pinned end: treat like a rejection of the gain
      if (growth >= 3 && relax > 0.05) {
        relax *= 0.5;
        growth = 0;
      }
      previous = shock;
      shock = upd.shock;
    } catch (const NonConvergence&) {
      ok = false;
    } catch (const VacuumError&) {
      ok = false;
    } catch (const SearchFailure&) {
      ok = false;
    }
    if (!ok) {
      if (!previous) fail("free-boundary solve failed on the initial shock");
      for (std::size_t j = 0; j < shock.size(); ++j)
        shock.radii[j] = previous->radii[j] + 0.5 * (shock.radii[j] - previous->radii[j]);
      relax *= 0.5;
      if (cfg.verbose) std::fprintf(stderr, "[fb %dx%d] step rejected, relax %.3g\n", cfg.nx, cfg.ny, relax);
      if (relax < 1e-4) fail("free-boundary solve stalled: relaxation exhausted");
    }
  }
  fail("free-boundary solve hit max_outer; last shock displacement " + std::to_string(last_residual));
  return sol;  // unreachable
}

Solution solve_regular_reflection(const GasModel& gas, double rho0, double rho1, double theta_w,
                                  const SolverConfig& cfg) {
  return solve(regular_reflection_problem(gas, rho0, rho1, theta_w), cfg);
}

Solution solve_prandtl_meyer(const GasModel& gas, double u_inf, double rho_inf, double theta_w,
                             const SolverConfig& cfg) {
  return solve(prandtl_meyer_problem(gas, u_inf, rho_inf, theta_w), cfg);
}

}  // namespace ssflow::fb
