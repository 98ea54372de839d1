#pragma once

// Finite-difference discretisation of the potential-flow equation on the
// body-fitted grid.  The unknown is the velocity potential
// vp = phi + |x|^2/2, which is linear for uniform states, so the scheme
// reproduces those exactly on any grid.

#include <array>
#include <vector>

#include "ssflow/dual.hpp"
#include "ssflow/fb_solver.hpp"

namespace ssflow::fb::detail {

enum class NodeKind : unsigned char { interior, dirichlet, symmetry, wall, wall_symmetry, shock };

struct NodeGeometry {
  Vec2 x, xa, xb;
  Vec2 xaa, xbb, xab;
  double det = 0.0;
  std::array<double, 9> hess_inv{};  // maps metric-corrected second differences to (Hxx, Hxy, Hyy)
  double cutoff_limit = 1.0;         // largest admitted |Dphi|^2/c^2
  double source = 0.0;               // manufactured right-hand side
  double target = 0.0;               // Dirichlet value of vp
  double neumann = 0.0;              // manufactured normal derivative
  Vec2 normal;                       // shock, wall or symmetry normal
  NodeKind kind = NodeKind::interior;
};

class Discretization {
 public:
  Discretization(const FreeBoundaryProblem& p, const StructuredGrid& g, const SolverConfig& cfg);

  const StructuredGrid& grid() const { return grid_; }
  const std::vector<NodeGeometry>& nodes() const { return geo_; }
  int nx() const { return grid_.nx; }
  int ny() const { return grid_.ny; }
  bool folded() const { return folded_; }
  double diameter() const { return diam_; }

  template <class T>
  void residual(const std::vector<T>& vp, std::vector<T>& r) const;

  // Discrete gradient of vp at node k.
  template <class T>
  std::array<T, 2> gradient(const std::vector<T>& vp, int i, int j) const;

  double vp_upstream(Vec2 x) const { return p_.upstream.phi(x) + 0.5 * norm_sq(x); }

 private:
  template <class T>
  T d_a(const std::vector<T>& f, int i, int j) const;
  template <class T>
  T d_b(const std::vector<T>& f, int i, int j) const;

  const FreeBoundaryProblem& p_;
  StructuredGrid grid_;
  std::vector<NodeGeometry> geo_;
  double da_, db_;
  double diam_ = 0.0;
  bool folded_ = false;
};

template <class T>
T Discretization::d_a(const std::vector<T>& f, int i, int j) const {
  const int n = grid_.nx;
  auto F = [&](int ii) -> const T& { return f[grid_.index(ii, j)]; };
  if (i == 0) return (-3.0 * F(0) + 4.0 * F(1) - F(2)) / (2.0 * da_);
  if (i == n) return (3.0 * F(n) - 4.0 * F(n - 1) + F(n - 2)) / (2.0 * da_);
  return (F(i + 1) - F(i - 1)) / (2.0 * da_);
}

template <class T>
T Discretization::d_b(const std::vector<T>& f, int i, int j) const {
  const int m = grid_.ny;
  auto F = [&](int jj) -> const T& { return f[grid_.index(i, jj)]; };
  if (j == 0) return (-3.0 * F(0) + 4.0 * F(1) - F(2)) / (2.0 * db_);
  if (j == m) return (3.0 * F(m) - 4.0 * F(m - 1) + F(m - 2)) / (2.0 * db_);
  return (F(j + 1) - F(j - 1)) / (2.0 * db_);
}

template <class T>
std::array<T, 2> Discretization::gradient(const std::vector<T>& vp, int i, int j) const {
  const auto& g = geo_[grid_.index(i, j)];
  const T pa = d_a(vp, i, j), pb = d_b(vp, i, j);
  return {(g.xb.y * pa - g.xa.y * pb) / g.det, (g.xa.x * pb - g.xb.x * pa) / g.det};
}

template <class T>
void Discretization::residual(const std::vector<T>& vp, std::vector<T>& r) const {
  using std::sqrt;
  const int n = grid_.nx, m = grid_.ny;
  r.resize(vp.size());
  const double B = p_.bernoulli.B;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      const std::size_t k = grid_.index(i, j);
      const auto& g = geo_[k];
      if (g.kind == NodeKind::dirichlet) {
        r[k] = vp[k] - g.target;
        continue;
      }
      const auto grad = gradient(vp, i, j);
      const T fx = grad[0] - g.x.x, fy = grad[1] - g.x.y;  // D phi
      switch (g.kind) {
        case NodeKind::symmetry:
        case NodeKind::wall:
          r[k] = fx * g.normal.x + fy * g.normal.y - g.neumann;
          continue;
        case NodeKind::wall_symmetry: {
          const Vec2 ns = p_.symmetry_normal;
          r[k] = fx * g.normal.x + fy * g.normal.y + fx * ns.x + fy * ns.y - g.neumann;
          continue;
        }
        default:
          break;
      }
      const T phi = vp[k] - 0.5 * norm_sq(g.x);
      const T q2 = fx * fx + fy * fy;
      const T head = B - 0.5 * q2 - phi;
      if (g.kind == NodeKind::shock) {
        const T rho = p_.gas.density_from_head(head);
        const Vec2 du = p_.upstream.grad(g.x);
        r[k] = rho * (fx * g.normal.x + fy * g.normal.y) - p_.upstream.rho * dot(du, g.normal);
        continue;
      }
      // interior: (c^2 I - Dphi Dphi^T) : D^2 phi + 2c^2 - |Dphi|^2, divided by c^2
      const T c2 = p_.gas.sound_speed_sq_from_head(head);
      if (!(value(c2) > 0.0)) throw VacuumError("vacuum in the subsonic domain");
      const T w2 = q2 / c2;
      // coefficient scale 1/c^2, reduced where the ellipticity cutoff is active
      const T f = value(w2) > g.cutoff_limit ? T(g.cutoff_limit) / q2 : T(1.0) / c2;
      const T paa = (vp[grid_.index(i + 1, j)] - 2.0 * vp[k] + vp[grid_.index(i - 1, j)]) / (da_ * da_) -
                    (g.xaa.x * grad[0] + g.xaa.y * grad[1]);
      const T pbb = (vp[grid_.index(i, j + 1)] - 2.0 * vp[k] + vp[grid_.index(i, j - 1)]) / (db_ * db_) -
                    (g.xbb.x * grad[0] + g.xbb.y * grad[1]);
      const T pab = (vp[grid_.index(i + 1, j + 1)] - vp[grid_.index(i + 1, j - 1)] -
                     vp[grid_.index(i - 1, j + 1)] + vp[grid_.index(i - 1, j - 1)]) /
                        (4.0 * da_ * db_) -
                    (g.xab.x * grad[0] + g.xab.y * grad[1]);
      const auto& h = g.hess_inv;
      const T hxx = h[0] * paa + h[1] * pab + h[2] * pbb - 1.0;
      const T hxy = h[3] * paa + h[4] * pab + h[5] * pbb;
      const T hyy = h[6] * paa + h[7] * pab + h[8] * pbb - 1.0;
      r[k] = (1.0 - f * fx * fx) * hxx - 2.0 * f * fx * fy * hxy + (1.0 - f * fy * fy) * hyy + 2.0 - w2 -
             g.source;
    }
  }
}

// Manufactured right-hand side: the same operator applied to exact derivatives.
double manufactured_operator(const FreeBoundaryProblem& p, Vec2 x, double cutoff_limit);

}  // namespace ssflow::fb::detail
