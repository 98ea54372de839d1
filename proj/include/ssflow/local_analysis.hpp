#pragma once

#include <optional>
#include <vector>

#include "ssflow/gas.hpp"
#include "ssflow/jump.hpp"

namespace ssflow::local {

enum class WedgeKind { reflection, diffraction, ramp };

struct WedgeGeometry {
  double theta_w;
  WedgeKind kind;
};
void validate(const WedgeGeometry& w);

enum class Classification { supersonic, sonic, subsonic, detached };
const char* to_string(Classification c);

// Residuals of the state-(2) system at P0: wall slip, potential continuity,
// mass flux across S1, Bernoulli consistency.
struct State2Residuals {
  double slip;
  double phi_jump;
  double flux_jump;
  double bernoulli;
  double max_abs() const;
};

struct ReflectionLocalData {
  double theta_w = 0.0;
  jump::IncidentData incident;
  UniformState state0;
  UniformState state1;
  Vec2 p0;
  std::optional<UniformState> weak;
  std::optional<UniformState> strong;
  bool tangent = false;          // double root
  double weak_ratio = 0.0;       // |Dphi2(P0)| / c2 for the weak root, 0 when detached
  Classification classification = Classification::detached;
};

// Slip-consistent state (2) with speed q along the wall; rho2 from Bernoulli.
UniformState state2_from_speed(const GasModel& gas, const jump::IncidentData& inc, double theta_w,
                               double q);
State2Residuals state2_residuals(const GasModel& gas, const jump::IncidentData& inc, double theta_w,
                                 const UniformState& s2);

ReflectionLocalData state2_regular_reflection(const GasModel& gas, double rho0, double rho1,
                                              double theta_w);

double detachment_angle(const GasModel& gas, double rho0, double rho1);
// Root of |Dphi2_weak(P0)|/c2 = 1 above the detachment angle.
double sonic_angle(const GasModel& gas, double rho0, double rho1);

struct CriticalAngles {
  double sonic;
  double detachment;
  std::optional<double> diffraction_critical;
};
CriticalAngles critical_angles(const GasModel& gas, double rho0, double rho1);

struct DiffractionContact {
  Vec2 on_circle0;  // contact of the wedge ray with the state-(0) sonic circle
  Vec2 on_circle1;  // far intersection with the state-(1) sonic circle; NaN when missed
  double gap;       // signed distance |P1| - |P0| along the ray
};
DiffractionContact diffraction_contacts(const GasModel& gas, const jump::IncidentData& inc,
                                        double theta_w);
double diffraction_critical_angle(const GasModel& gas, double rho0, double rho1);

struct NormalReflection {
  double rho2;
  double xi_bar;
  UniformState state2;
};
NormalReflection solve_normal_reflection(const GasModel& gas, double rho0, double rho1);

// Steady shock polar in the velocity plane for uniform inflow (u_inf, 0).
struct PolarSample {
  double beta;  // shock angle from the inflow direction
  double u;
  double v;
  double rho;
};

struct PolarCurve {
  double u_inf;
  double rho_inf;
  double mach_angle;
  std::vector<PolarSample> samples;  // beta increasing from the Mach angle to pi/2
};

struct PolarResiduals {
  double tangential;
  double mass;
  double bernoulli;
  double max_abs() const;
};

PolarSample polar_point(const GasModel& gas, double u_inf, double rho_inf, double beta);
PolarResiduals polar_residuals(const GasModel& gas, double u_inf, double rho_inf,
                               const PolarSample& s);
PolarCurve steady_shock_polar(const GasModel& gas, double u_inf, double rho_inf, int n_samples);

enum class SonicReference { local, upstream };  // c(rho0) or c_inf

struct PmAngles {
  double sonic;
  double detachment;
  double beta_sonic;
  double beta_detachment;
};
PmAngles pm_angles(const GasModel& gas, double u_inf, double rho_inf,
                   SonicReference ref = SonicReference::local);

struct PmStates {
  double theta_w;
  BernoulliData bernoulli;
  UniformState inflow;  // phi_inf
  PolarSample weak_polar;
  PolarSample strong_polar;
  UniformState weak;    // state (0): k = 0, shock S0 through the wedge tip
  UniformState strong;
  UniformState state1;  // behind the normal shock S1 parallel to the ramp
  double s1_offset;     // distance of S1 from the ramp
  bool tangent = false;
};
PmStates pm_states(const GasModel& gas, double u_inf, double rho_inf, double theta_w);

}  // namespace ssflow::local
