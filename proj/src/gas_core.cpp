#include "wedge/gas_core.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wedge/errors.hpp"

namespace wedge {

GasModel::GasModel(double gamma, double rho0, double c0) : gamma_(gamma), rho0_(rho0), c0_(c0) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw DomainError("gamma must be >= 1, got " + std::to_string(gamma));
  }
  if (!(rho0 > 0.0) || !std::isfinite(rho0)) {
    throw DomainError("rho0 must be positive, got " + std::to_string(rho0));
  }
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw DomainError("c0 must be positive, got " + std::to_string(c0));
  }
}

double pi_of_rho(const GasModel& model, double rho) {
  if (!(rho > 0.0)) {
    throw DomainError("pi_of_rho: density must be positive, got " + std::to_string(rho));
  }
  const double c02 = model.c0() * model.c0();
  const double lr = std::log(rho / model.rho0());
  if (model.isothermal()) {
    return c02 * lr;
  }
  const double gm1 = model.gamma() - 1.0;
  // expm1 keeps the gamma -> 1 limit accurate.
  return c02 * std::expm1(gm1 * lr) / gm1;
}

double pi_inverse(const GasModel& model, double a) {
  const double c02 = model.c0() * model.c0();
  if (model.isothermal()) {
    return model.rho0() * std::exp(a / c02);
  }
  const double gm1 = model.gamma() - 1.0;
  const double arg = gm1 * a / c02;
  // gamma - 1 is inexact in binary, so the bound carries a few ulps of slack.
  if (!(arg > -1.0 + 8.0 * std::numeric_limits<double>::epsilon())) {
    throw VacuumError("pi_inverse: argument " + std::to_string(a) +
                      " at or below vacuum bound " + std::to_string(-c02 / gm1));
  }
  return model.rho0() * std::exp(std::log1p(arg) / gm1);
}

double pressure(const GasModel& model, double rho) {
  if (!(rho > 0.0)) {
    throw DomainError("pressure: density must be positive");
  }
  const double c02 = model.c0() * model.c0();
  return c02 * model.rho0() / model.gamma() * std::pow(rho / model.rho0(), model.gamma());
}

double sound_speed(const GasModel& model, double rho) {
  if (!(rho > 0.0)) {
    throw DomainError("sound_speed: density must be positive");
  }
  if (model.isothermal()) {
    return model.c0();
  }
  return model.c0() * std::pow(rho / model.rho0(), 0.5 * (model.gamma() - 1.0));
}

double sound_speed_sq_of_pi(const GasModel& model, double a) {
  const double c02 = model.c0() * model.c0();
  if (model.isothermal()) {
    return c02;
  }
  const double c2 = c02 + (model.gamma() - 1.0) * a;
  if (!(c2 > 0.0)) {
    throw VacuumError("sound speed squared nonpositive: " + std::to_string(c2));
  }
  return c2;
}

FlowState FlowState::make(const GasModel& model, double rho, Vec2 v) {
  return FlowState{rho, v, sound_speed(model, rho)};
}

LocalGas density_sound_pseudo_mach(const GasModel& model, const SelfSimilarPoint& p) {
  const double a = -p.chi - 0.5 * norm_sq(p.z);
  const double rho = pi_inverse(model, a);
  const double c = std::sqrt(sound_speed_sq_of_pi(model, a));
  return LocalGas{rho, c, norm(p.z) / c};
}

}  // namespace wedge
