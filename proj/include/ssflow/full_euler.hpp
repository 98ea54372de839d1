#pragma once

#include <complex>
#include <vector>

#include "ssflow/fb_solver.hpp"
#include "ssflow/gas.hpp"

namespace ssflow::euler {

// Point state of the self-similar full Euler system.
struct FullEulerState {
  double rho = 1.0;
  double u = 0.0;
  double v = 0.0;
  double p = 1.0;

  // pseudo-velocity (U, V) = (u - xi, v - eta)
  Vec2 pseudo_velocity(Vec2 x) const { return {u - x.x, v - x.y}; }
};

double sound_speed(const GasModel& gas, const FullEulerState& s);  // sqrt(gamma p / rho)

// State carried by a potential flow: velocity Dphi + x, p = rho^gamma / gamma.
FullEulerState from_potential(const GasModel& gas, double rho, Vec2 grad_phi, Vec2 x);

enum class Regime { pseudo_supersonic, pseudo_sonic, pseudo_subsonic };
const char* to_string(Regime r);

struct TypeReport {
  double q = 0.0;  // pseudo-speed
  double c = 0.0;
  double lambda0 = 0.0;           // V/U; NaN when vertical
  bool lambda0_vertical = false;  // U = 0
  std::complex<double> lambda_plus, lambda_minus;
  bool complex_pair = false;  // q < c
  bool sonic = false;         // q = c within the band: square-root term is zero
  bool degenerate = false;    // U^2 = c^2 and one of lambda+- has no finite value (reported NaN)
  Regime regime = Regime::pseudo_subsonic;
};

TypeReport eigenvalues(const GasModel& gas, const FullEulerState& s, Vec2 x, double sonic_band = 1e-12);

struct RhFullResidual {
  double r_L = 0.0;
  double r_mass = 0.0;
  double r_momentum = 0.0;
  double r_enthalpy = 0.0;
};

// Jumps [F] = F(down) - F(up) across a shock through x with unit normal
// pointing from the upstream to the downstream side; L, N are the tangential
// and normal pseudo-velocity components.
RhFullResidual rh_full_residual(const GasModel& gas, const FullEulerState& up, const FullEulerState& down,
                                Vec2 x, Vec2 normal);

struct OrderStudy {
  std::vector<double> epsilons;
  std::vector<double> residuals;  // max(|r_momentum|, |r_enthalpy|)
  std::vector<double> mass_residuals;
  double slope = 0.0;
  bool degenerate = false;  // some residual at round-off level: slope unreliable
};

// Full-Euler residuals of weak potential shocks with density jump eps * rho0.
OrderStudy shock_strength_order_study(const GasModel& gas, double rho0, const std::vector<double>& epsilons);

struct ConsistencyReport {
  std::vector<double> vorticity;          // nodal curl of the velocity
  std::vector<double> entropy_variation;  // nodal |S - S_start| on traced trajectories, NaN if not reached
  double max_vorticity = 0.0;
  double max_vorticity_traced = 0.0;  // over nodes reached by a trajectory
  // excluding a ball of radius corner_exclusion * diam around a wall-symmetry
  // corner, where the continuum solution itself is singular (equals max_vorticity without one)
  double max_vorticity_regular = 0.0;
  double max_entropy_variation = 0.0;
  double coverage = 0.0;  // fraction of cells crossed by a trajectory
  int trajectories = 0;
};

// Rebuilds the full Euler state from a potential field and measures how far it
// is from satisfying the vorticity and entropy equations. Pressure is
// integrated from the momentum equation along pseudo-streamlines started on
// the sonic arcs, so constant entropy is a check, not an assumption.
inline constexpr double corner_exclusion = 0.1;

ConsistencyReport potential_consistency(const fb::FreeBoundaryProblem& p, const fb::SelfSimilarField& field);
ConsistencyReport potential_consistency(const fb::Solution& s);

}  // namespace ssflow::euler
