#pragma once

// Rankine-Hugoniot relations for self-similar potential flow.
//
// Across a shock with downstream-pointing unit normal n, z^t is continuous and
// the normal pseudo-Mach numbers satisfy g(L_d^n) = g(L_u^n).

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wedge/gas_core.hpp"
#include "wedge/vec2.hpp"

namespace wedge {

// Angle in radians; keeps degree/radian confusion out of signatures.
struct Radians {
  double value = 0.0;
};

double g_value(double gamma, double x);
double g_derivative(double gamma, double x);

// Nontrivial root of g(L_d^n) = g(L_u^n); decreasing and self-inverse.
double downstream_normal_mach(double gamma, double Lun);

struct JumpState {
  double rho_d = 0.0;
  double c_d = 0.0;
};

// Throws InadmissibleShock for Lun < 1 unless require_admissible is false.
JumpState jump_state(const GasModel& model, double rho_u, double c_u, double Lun,
                     bool require_admissible = true);

struct Sensitivities {
  double dLdn_dLun = 0.0;
  // d z_d^n / d z_u^n with rho_u, c_u fixed.
  double dzdn_dzun = 0.0;
  // (z_u^n / z_d^n) d z_d^n / d z_u^n.
  double scaled_dzdn_dzun = 0.0;
  // d rho_d / d sigma per unit rho_u / c_u; always negative.
  double drho_d_dsigma = 0.0;
  int drho_d_dsigma_sign = 0;
  // d v_d^n / d sigma = 1 - dzdn_dzun and its guaranteed lower bound 2/(gamma+1).
  double dvdn_dsigma = 0.0;
  double dvdn_dsigma_lower_bound = 0.0;
};

// Throws DomainError for Lun <= 1.
Sensitivities sensitivities(double gamma, double Lun);

struct ShockSolution {
  Vec2 point;
  Vec2 n;
  FlowState upstream;
  FlowState downstream;
  double z_t = 0.0;
  double Lun = 0.0;
  double Ldn = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  bool admissible = true;

  Vec2 tangent() const { return perp(n); }
  Vec2 z_u() const { return upstream.v - point; }
  Vec2 z_d() const { return downstream.v - point; }
};

// Throws WrongSideError when (v_u - xi) . n <= 0. Expansion shocks are
// returned with admissible = false.
ShockSolution resolve_oblique(const GasModel& model, const FlowState& upstream, Vec2 xi, Vec2 n);

struct PolarSample {
  double beta = 0.0;
  Vec2 downstream_v;
  double rho_d = 0.0;
  double c_d = 0.0;
  double L_d = 0.0;
  double z_d = 0.0;
};

// Largest |beta| with L_u^n >= 1. Throws NoPolarError when |z_u| <= c_u.
double polar_beta_max(const FlowState& upstream, Vec2 xi);

// Normal at angle beta counterclockwise from z_u.
Vec2 polar_normal(const FlowState& upstream, Vec2 xi, double beta);

std::vector<PolarSample> shock_polar(const GasModel& model, const FlowState& upstream, Vec2 xi,
                                     std::span<const double> beta_grid);

// Uniform grid of n points on [-beta_max, beta_max].
std::vector<double> polar_beta_grid(const FlowState& upstream, Vec2 xi, int n);

struct AttachedShock {
  ShockSolution shock;
  double deflection = 0.0;
  double mach_d = 0.0;
  bool supersonic = false;
};

struct DeflectionSolutions {
  AttachedShock weak;
  AttachedShock strong;
};

// Steady shocks at xi = 0 turning the flow counterclockwise by tau.
// Throws NoAttachedShock when the upstream flow is not supersonic.
std::optional<DeflectionSolutions> deflection_solutions(const GasModel& model,
                                                        const FlowState& upstream, Radians tau);

// Largest deflection with an attached shock.
double critical_angle(const GasModel& model, const FlowState& upstream);

struct HorizontalShock {
  double eta0 = 0.0;
  ShockSolution shock;
};

// Shock through (0, eta) with normal (sin beta, -cos beta) and v_d^y = 0,
// upstream velocity (0, v_u_y) with v_u_y < 0.
HorizontalShock horizontal_downstream_shock(const GasModel& model, double rho_u, double v_u_y,
                                            double beta);

// The two points on a straight shock where L_d = sqrt(1 - epsilon), ordered
// along the tangent (first = minus side). Throws NoSonicIntersection.
std::pair<Vec2, Vec2> sonic_points(const ShockSolution& s, double epsilon);

// Closest point of the shock line to v_d (and v_u).
Vec2 pseudo_normal_point(const ShockSolution& s);

}  // namespace wedge
