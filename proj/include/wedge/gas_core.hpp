#pragma once

// Polytropic gas and the Bernoulli closure of self-similar potential flow.
//
// With pseudo-potential chi and pseudo-velocity z = grad chi, density and
// sound speed follow from  pi(rho) = -chi - |z|^2/2.

#include "wedge/vec2.hpp"

namespace wedge {

// Below this gamma - 1 the isothermal branch is used.
inline constexpr double kIsothermalThreshold = 1e-12;

class GasModel {
 public:
  GasModel(double gamma, double rho0, double c0);

  double gamma() const noexcept { return gamma_; }
  double rho0() const noexcept { return rho0_; }
  double c0() const noexcept { return c0_; }
  bool isothermal() const noexcept { return gamma_ - 1.0 < kIsothermalThreshold; }

 private:
  double gamma_;
  double rho0_;
  double c0_;
};

// Enthalpy-like potential pi(rho); pi(rho0) = 0.
double pi_of_rho(const GasModel& model, double rho);

// Inverse of pi_of_rho. Throws VacuumError at or below -c0^2/(gamma-1).
double pi_inverse(const GasModel& model, double a);

double pressure(const GasModel& model, double rho);

// c(rho) with c^2 = p'(rho).
double sound_speed(const GasModel& model, double rho);

// c^2 as a function of a = pi(rho): c0^2 + (gamma-1) a.
double sound_speed_sq_of_pi(const GasModel& model, double a);

struct FlowState {
  double rho = 0.0;
  Vec2 v;
  double c = 0.0;

  // Fills c from the model; rho must be positive.
  static FlowState make(const GasModel& model, double rho, Vec2 v);
};

// Stores chi and z only; psi and v are derived.
struct SelfSimilarPoint {
  Vec2 xi;
  double chi = 0.0;
  Vec2 z;

  double psi() const { return chi + 0.5 * norm_sq(xi); }
  Vec2 v() const { return z + xi; }
};

struct LocalGas {
  double rho = 0.0;
  double c = 0.0;
  double L = 0.0;
};

LocalGas density_sound_pseudo_mach(const GasModel& model, const SelfSimilarPoint& p);

}  // namespace wedge
