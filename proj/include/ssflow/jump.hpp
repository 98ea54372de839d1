#pragma once

#include <optional>

#include "ssflow/gas.hpp"

namespace ssflow::jump {

// Line {phi_A = phi_B}; normal points from the upstream side to the downstream side.
struct StraightShock {
  Vec2 point;
  Vec2 normal;
};

// Plane incident shock moving into state (0) at rest, state (1) behind it.
struct IncidentData {
  double u1 = 0.0;
  double xi0 = 0.0;  // NaN when degenerate
  std::optional<double> rho_c;
  bool degenerate = false;
  BernoulliData bernoulli;
  UniformState state0;
  UniformState state1;
};

// (h(rho1) - h(rho0)) / (rho1 - rho0), accurate as rho1 -> rho0.
double enthalpy_slope(const GasModel& gas, double rho0, double rho1);

double incident_velocity(const GasModel& gas, double rho0, double rho1);

IncidentData incident_shock(const GasModel& gas, double rho0, double rho1);

// rho^c with u1(rho^c) = c1(rho^c); SearchFailure if no crossing below upper_factor * rho0.
double critical_density(const GasModel& gas, double rho0, double upper_factor = 1e6);

struct RhResidual {
  double dphi;
  double dflux;
};

RhResidual rh_residual(const GasModel& gas, const BernoulliData& b, const UniformState& a,
                       const UniformState& c, Vec2 point, Vec2 normal);

// Straight shock separating two states; PreconditionError if the velocities coincide.
StraightShock straight_shock(const UniformState& upstream, const UniformState& downstream);

// rho_down > rho_up for states joined by a straight admissible shock.
// PreconditionError when the states do not satisfy R-H on any line.
bool entropy_admissible(const GasModel& gas, const UniformState& upstream,
                        const UniformState& downstream, double rel_tol = 1e-9);

}  // namespace ssflow::jump
