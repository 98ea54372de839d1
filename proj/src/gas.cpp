#include "ssflow/gas.hpp"

#include <cmath>
#include <string>

namespace ssflow {

GasModel::GasModel(double gamma) : gamma_(gamma), isothermal_(gamma == 1.0) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma))
    throw DomainError("gamma must be >= 1, got " + std::to_string(gamma));
}

static void require_positive_density(double rho) {
  if (!(rho > 0.0)) throw DomainError("density must be positive, got " + std::to_string(rho));
}

double GasModel::enthalpy(double rho) const {
  require_positive_density(rho);
  if (isothermal_) return std::log(rho);
  // expm1 keeps h accurate for gamma close to 1
  return std::expm1((gamma_ - 1.0) * std::log(rho)) / (gamma_ - 1.0);
}

double GasModel::density_from_enthalpy(double h) const {
  if (isothermal_) return std::exp(h);
  const double base = 1.0 + (gamma_ - 1.0) * h;
  if (!(base > 0.0)) throw VacuumError("vacuum: enthalpy below h(0+)");
  return std::exp(std::log1p((gamma_ - 1.0) * h) / (gamma_ - 1.0));
}

double GasModel::sound_speed_sq(double rho) const {
  require_positive_density(rho);
  if (isothermal_) return 1.0;
  return std::pow(rho, gamma_ - 1.0);
}

double GasModel::sound_speed(double rho) const { return std::sqrt(sound_speed_sq(rho)); }

double GasModel::pressure(double rho) const {
  require_positive_density(rho);
  return std::pow(rho, gamma_) / gamma_;
}

BernoulliData BernoulliData::from_b0(const GasModel& gas, double b0) {
  if (gas.isothermal()) {
    if (b0 != 1.0) throw DomainError("isothermal gas requires B0 = 1");
    return {0.0};
  }
  return {(b0 - 1.0) / (gas.gamma() - 1.0)};
}

double enthalpy(const GasModel& gas, double rho) { return gas.enthalpy(rho); }
double sound_speed(const GasModel& gas, double rho) { return gas.sound_speed(rho); }

double density_from_bernoulli(const GasModel& gas, const BernoulliData& b, double grad_sq,
                              double phi) {
  return gas.density_from_head(b.B - 0.5 * grad_sq - phi);
}

double sound_speed_sq_from_bernoulli(const GasModel& gas, const BernoulliData& b, double grad_sq,
                                     double phi) {
  const double head = b.B - 0.5 * grad_sq - phi;
  const double c2 = gas.sound_speed_sq_from_head(head);
  if (!(c2 > 0.0)) throw VacuumError("vacuum: Bernoulli base is not positive");
  return c2;
}

PotentialValue eval_pseudo_potential(const UniformState& s, Vec2 p) { return {s.phi(p), s.grad(p)}; }

UniformState make_uniform_state(const GasModel& gas, const BernoulliData& b, double u, double v,
                                double k) {
  const double rho = gas.density_from_head(b.B - 0.5 * (u * u + v * v) - k);
  return {u, v, k, rho};
}

double bernoulli_mismatch(const GasModel& gas, const BernoulliData& b, const UniformState& s) {
  return gas.enthalpy(s.rho) + 0.5 * (s.u * s.u + s.v * s.v) + s.k - b.B;
}

const char* to_string(FlowType t) {
  switch (t) {
    case FlowType::elliptic: return "elliptic";
    case FlowType::sonic: return "sonic";
    case FlowType::hyperbolic: return "hyperbolic";
  }
  return "?";
}

EllipticityReport classify_ratio(double ratio, double sonic_band) {
  if (std::abs(ratio - 1.0) <= sonic_band) return {ratio, FlowType::sonic};
  return {ratio, ratio < 1.0 ? FlowType::elliptic : FlowType::hyperbolic};
}

EllipticityReport ellipticity_ratio(const GasModel& gas, const BernoulliData& b, double grad_sq,
                                    double phi, double sonic_band) {
  const double c2 = sound_speed_sq_from_bernoulli(gas, b, grad_sq, phi);
  return classify_ratio(std::sqrt(grad_sq / c2), sonic_band);
}

}  // namespace ssflow
