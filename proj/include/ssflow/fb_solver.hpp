#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssflow/gas.hpp"
#include "ssflow/local_analysis.hpp"

namespace ssflow::fb {

struct SolverConfig {
  int nx = 32;  // cells from the shock (a = 0) to the wall (a = 1)
  int ny = 32;  // cells between the two side edges (b = 0 .. 1)
  double delta_cutoff = 0.1;
  double cutoff_range_fraction = 0.1;  // d0 as a fraction of diam(Omega)
  double relax = 0.5;
  double tol_pde = 1e-8;
  double tol_shock = 1e-8;
  int max_outer = 200;
  int max_newton = 30;
  double max_move_fraction = 0.05;  // cap on a single radial move, relative to diam(Omega)
  bool grid_sequencing = true;      // start from a solve on the half-resolution grid
  int min_sequencing_cells = 16;
  bool verbose = false;

  void validate() const;
};

// Circle arc parametrised by a linear sweep of the polar angle.
struct Arc {
  Vec2 center;
  double radius = 0.0;
  double angle0 = 0.0;
  double angle1 = 0.0;
  Vec2 at(double s) const { return center + unit_at(angle0 + s * (angle1 - angle0)) * radius; }
};

// Curved shock as a polar graph r(alpha) about a fixed centre.
struct ShockPolyline {
  Vec2 center;
  std::vector<double> angles;
  std::vector<double> radii;
  bool pin_start = false;  // b = 0 end fixed on its boundary
  bool pin_end = true;     // b = 1 end fixed on its boundary

  std::size_t size() const { return angles.size(); }
  Vec2 vertex(std::size_t j) const { return center + unit_at(angles[j]) * radii[j]; }
  std::vector<Vec2> vertices() const;
};

struct StructuredGrid {
  int nx = 0;
  int ny = 0;
  std::vector<Vec2> nodes;  // (nx+1) x (ny+1), index i*(ny+1)+j

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * (ny + 1) + j; }
  const Vec2& at(int i, int j) const { return nodes[index(i, j)]; }
  std::size_t size() const { return nodes.size(); }
};

// Second-order nodal derivatives on a curvilinear grid (one-sided at edges).
class NodalCalculus {
 public:
  explicit NodalCalculus(const StructuredGrid& g);
  std::vector<Vec2> gradient(const std::vector<double>& f) const;
  double jacobian_min() const;  // signed min of det(dX/d(a,b)) times the orientation
  const StructuredGrid& grid() const { return grid_; }
  Vec2 xa(std::size_t k) const { return xa_[k]; }
  Vec2 xb(std::size_t k) const { return xb_[k]; }

 private:
  StructuredGrid grid_;
  std::vector<Vec2> xa_, xb_;
};

struct SelfSimilarField {
  StructuredGrid grid;
  std::vector<double> phi;   // pseudo-potential phi at nodes
  std::vector<Vec2> grad;    // discrete D phi
  std::vector<double> rho;
  std::vector<double> c2;
  std::vector<double> ratio;  // |D phi| / c
  std::vector<unsigned char> cutoff_active;
};

struct Diagnostics {
  double pde_residual_inf = 0.0;
  double rh_phi_residual_inf = 0.0;
  double rh_flux_residual_inf = 0.0;
  double ellipticity_min_margin = 0.0;
  double bounds_violation = 0.0;
  double monotonicity_violation = 0.0;
  double sonic_gradient_mismatch = 0.0;
  int cutoff_active_nodes = 0;
  bool cutoff_confined = true;
  int outer_iterations = 0;
  double shock_displacement = 0.0;
};

enum class Configuration { regular_reflection, prandtl_meyer };
const char* to_string(Configuration c);

enum class SideKind { symmetry, dirichlet };

// Exact solution used to manufacture sources and boundary data for verification runs.
struct Manufactured {
  std::function<double(Vec2)> phi;
  std::function<Vec2(Vec2)> grad;
  std::function<std::array<double, 3>(Vec2)> hessian;  // phi_xx, phi_xy, phi_yy
};

// Geometry, boundary data and reference states of one free-boundary problem.
struct FreeBoundaryProblem {
  Configuration configuration = Configuration::regular_reflection;
  GasModel gas{2.0};
  BernoulliData bernoulli;
  double theta_w = 0.0;
  UniformState upstream;  // state ahead of the curved shock
  // shock chart; angle range from the b = 0 end to the b = 1 end
  Vec2 shock_center;
  double shock_angle0 = 0.0;
  double shock_angle1 = 0.0;
  std::optional<double> pinned_radius0;  // fixed radius at b = 0 (PM)
  double pinned_radius1 = 0.0;           // fixed radius at b = 1
  // wall a = 1 from wall0 (b = 0) to wall1 (b = 1)
  Vec2 wall0;
  Vec2 wall1;
  Vec2 wall_normal;
  SideKind side0 = SideKind::symmetry;
  Vec2 symmetry_normal{0.0, 1.0};
  Arc arc0;  // b = 0 edge when Dirichlet
  UniformState state_side0;
  Arc arc1;  // b = 1 edge (sonic arc)
  UniformState state_side1;
  // states bounding the admissible class
  UniformState lower_a;  // phi >= max(lower_a, lower_b)
  UniformState lower_b;
  UniformState upper;    // phi <= upper
  // monotonicity cone: D(upper - phi).e >= 0 for e in cone_ge, <= 0 for e in cone_le
  std::vector<Vec2> cone_ge;
  std::vector<Vec2> cone_le;
  // straight part of the reflected shock (RR) or the S0/S1 anchors (PM), for export
  std::vector<Vec2> straight_shock_points;
  std::optional<Manufactured> manufactured;  // shock edge becomes Dirichlet when set
  bool normal_limit = false;                 // wedge angle pi/2: vertical reflected shock

  double phi_reference(Vec2 x, double b) const;
  double distance_to_sonic(Vec2 x) const;
};

FreeBoundaryProblem regular_reflection_problem(const GasModel& gas, double rho0, double rho1,
                                               double theta_w);
FreeBoundaryProblem prandtl_meyer_problem(const GasModel& gas, double u_inf, double rho_inf,
                                          double theta_w);

StructuredGrid build_grid(const FreeBoundaryProblem& p, const ShockPolyline& shock, int nx, int ny);
ShockPolyline initial_shock(const FreeBoundaryProblem& p, int ny);

struct InitialGuess {
  ShockPolyline shock;
  SelfSimilarField field;
};
InitialGuess build_initial_guess(const FreeBoundaryProblem& p, const SolverConfig& cfg);

// Newton solve of the discrete problem with the shock held fixed; guess.phi is the start.
SelfSimilarField elliptic_solve(const FreeBoundaryProblem& p, const ShockPolyline& shock,
                                const std::vector<double>& phi_guess, const SolverConfig& cfg);

struct ShockUpdate {
  ShockPolyline shock;
  double displacement = 0.0;  // max unrelaxed move to the level set phi = phi_upstream
};
ShockUpdate shock_update(const FreeBoundaryProblem& p, const SelfSimilarField& field,
                         const ShockPolyline& shock, const SolverConfig& cfg, double relax);

Diagnostics diagnostics_report(const FreeBoundaryProblem& p, const SelfSimilarField& field,
                               const ShockPolyline& shock, const SolverConfig& cfg);

struct Solution {
  FreeBoundaryProblem problem;
  SolverConfig config;
  SelfSimilarField field;
  ShockPolyline shock;
  Diagnostics diagnostics;
  std::vector<double> displacement_history;
};

// Non-convergence of the outer iteration; carries the last accepted iterate
// (diagnostics evaluated on it) so callers can still export it.
class SolveFailure : public NonConvergence {
 public:
  SolveFailure(const std::string& what, double last_residual, std::shared_ptr<const Solution> partial)
      : NonConvergence(what, last_residual), partial_(std::move(partial)) {}
  const Solution* partial() const { return partial_.get(); }

 private:
  std::shared_ptr<const Solution> partial_;
};

Solution solve(const FreeBoundaryProblem& p, const SolverConfig& cfg);
Solution solve_regular_reflection(const GasModel& gas, double rho0, double rho1, double theta_w,
                                  const SolverConfig& cfg);
Solution solve_prandtl_meyer(const GasModel& gas, double u_inf, double rho_inf, double theta_w,
                             const SolverConfig& cfg);

// Bilinear interpolation of nodal values at a physical point; nullopt outside the grid.
std::optional<double> interpolate(const StructuredGrid& g, const std::vector<double>& f, Vec2 x);

// Max |phi_coarse - phi_fine| over coarse nodes at least sonic_exclusion * diam
// away from the sonic arcs, the fine field sampled by interpolation.
double cauchy_difference(const Solution& coarse, const Solution& fine, double sonic_exclusion = 0.1);

// Global pseudo-potential: the solution in Omega, uniform states elsewhere.
double assembled_potential(const Solution& s, Vec2 x);

}  // namespace ssflow::fb
