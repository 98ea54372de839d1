#pragma once

#include <cmath>

#include "ssflow/errors.hpp"
#include "ssflow/vec2.hpp"

namespace ssflow {

// Polytropic gas with kappa = 1/gamma, so c^2 = rho^(gamma-1) and p = rho^gamma / gamma.
class GasModel {
 public:
  explicit GasModel(double gamma);
  static GasModel isothermal_gas() { return GasModel(1.0); }

  double gamma() const { return gamma_; }
  bool isothermal() const { return isothermal_; }

  double enthalpy(double rho) const;
  // h^{-1}; throws VacuumError when the enthalpy value lies below h(0+).
  double density_from_enthalpy(double h) const;
  double sound_speed(double rho) const;
  double sound_speed_sq(double rho) const;
  double pressure(double rho) const;

  // c^2 as a function of the Bernoulli head H = B - |Dphi|^2/2 - phi.
  // Templated so the solver can differentiate through it.
  template <class T>
  T sound_speed_sq_from_head(T head) const {
    if (isothermal_) return T(1.0) + 0.0 * head;
    return 1.0 + (gamma_ - 1.0) * head;
  }
  template <class T>
  T density_from_head(T head) const {
    using std::exp;
    using std::pow;
    if (isothermal_) return exp(head);
    const T base = 1.0 + (gamma_ - 1.0) * head;
    if (!(value_of(base) > 0.0)) throw VacuumError("vacuum: Bernoulli base is not positive");
    return pow(base, 1.0 / (gamma_ - 1.0));
  }

 private:
  static double value_of(double x) { return x; }
  template <class T>
  static double value_of(const T& x) { return x.v; }

  double gamma_;
  bool isothermal_;
};

// Bernoulli constant B of h(rho) + |Dphi|^2/2 + phi = B.  The scaled form
// B0 = (gamma-1)B + 1 is what the literature quotes; it loses B when gamma = 1,
// so the raw constant is what we store.
struct BernoulliData {
  double B = 0.0;

  static BernoulliData from_b0(const GasModel& gas, double b0);
  double b0(const GasModel& gas) const { return (gas.gamma() - 1.0) * B + 1.0; }
};

double enthalpy(const GasModel& gas, double rho);
double sound_speed(const GasModel& gas, double rho);

// rho(|Dphi|^2, phi); VacuumError when the base is not positive.
double density_from_bernoulli(const GasModel& gas, const BernoulliData& b, double grad_sq, double phi);
double sound_speed_sq_from_bernoulli(const GasModel& gas, const BernoulliData& b, double grad_sq,
                                     double phi);

struct PotentialValue {
  double phi;
  Vec2 grad;
};

// phi = -(xi^2+eta^2)/2 + u xi + v eta + k with constant density.
struct UniformState {
  double u = 0.0;
  double v = 0.0;
  double k = 0.0;
  double rho = 1.0;

  Vec2 velocity() const { return {u, v}; }
  double phi(Vec2 p) const { return -0.5 * norm_sq(p) + u * p.x + v * p.y + k; }
  Vec2 grad(Vec2 p) const { return {u - p.x, v - p.y}; }
  Vec2 sonic_center() const { return {u, v}; }
  double sonic_radius(const GasModel& gas) const { return gas.sound_speed(rho); }
};

PotentialValue eval_pseudo_potential(const UniformState& s, Vec2 p);

// Builds the state (u, v, k) with density fixed by Bernoulli.
UniformState make_uniform_state(const GasModel& gas, const BernoulliData& b, double u, double v,
                                double k);

// Residual of h(rho) + (u^2+v^2)/2 + k - B; zero iff the state shares the constant.
double bernoulli_mismatch(const GasModel& gas, const BernoulliData& b, const UniformState& s);

enum class FlowType { elliptic, sonic, hyperbolic };
const char* to_string(FlowType t);

struct EllipticityReport {
  double ratio;  // |Dphi| / c
  FlowType type;
};

inline constexpr double default_sonic_band = 1e-9;

EllipticityReport classify_ratio(double ratio, double sonic_band = default_sonic_band);
EllipticityReport ellipticity_ratio(const GasModel& gas, const BernoulliData& b, double grad_sq,
                                    double phi, double sonic_band = default_sonic_band);

}  // namespace ssflow
