#include "wedge/shock_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "root_find.hpp"
#include "wedge/errors.hpp"

namespace wedge {
namespace {

constexpr double kNearSonic = 1e-9;

bool isothermal(double gamma) { return gamma - 1.0 < kIsothermalThreshold; }

// F(x) = 0 iff g(x) = g(y), in a form without the 2/(gamma-1) cancellation.
// Monotone on (0,1) and on (1,inf).
struct MatchResidual {
  double gamma;
  double y;

  double operator()(double x) const {
    const double dlog = std::log(x) - std::log(y);
    const double dsq = (x - y) * (x + y);
    if (isothermal(gamma)) {
      return dsq - 2.0 * dlog;
    }
    const double k = 2.0 / (gamma - 1.0);
    const double delta = (gamma - 1.0) / (gamma + 1.0);
    return std::log1p(dsq / (y * y + k)) - 2.0 * delta * dlog;
  }

  double derivative(double x) const {
    if (isothermal(gamma)) {
      return 2.0 * x - 2.0 / x;
    }
    const double k = 2.0 / (gamma - 1.0);
    const double delta = (gamma - 1.0) / (gamma + 1.0);
    return 2.0 * x / (x * x + k) - 2.0 * delta / x;
  }
};

// Safeguarded Newton inside a sign-change bracket.
double bracketed_newton(const MatchResidual& f, double lo, double hi) {
  double flo = f(lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double fx = f(x);
    if (fx == 0.0) {
      return x;
    }
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = f.derivative(x);
    double xn = d != 0.0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) {
      xn = 0.5 * (lo + hi);
    }
    if (std::abs(xn - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
      return xn;
    }
    x = xn;
  }
  return x;
}

double slope_exponent(double gamma) { return -2.0 * (gamma - 1.0) / (gamma + 1.0); }

}  // namespace

double g_value(double gamma, double x) {
  if (!(x > 0.0)) {
    throw DomainError("g_value: x must be positive, got " + std::to_string(x));
  }
  if (isothermal(gamma)) {
    return x * x - 2.0 * std::log(x);
  }
  return (x * x + 2.0 / (gamma - 1.0)) * std::pow(x, 2.0 * (1.0 - gamma) / (gamma + 1.0));
}

double g_derivative(double gamma, double x) {
  if (!(x > 0.0)) {
    throw DomainError("g_derivative: x must be positive");
  }
  return 4.0 / (gamma + 1.0) * (x - 1.0 / x) * std::pow(x, slope_exponent(gamma));
}

double downstream_normal_mach(double gamma, double Lun) {
  if (!(Lun > 0.0) || !std::isfinite(Lun)) {
    throw DomainError("downstream_normal_mach: Lun must be positive, got " + std::to_string(Lun));
  }
  if (Lun == 1.0) {
    return 1.0;
  }
  if (std::abs(Lun - 1.0) < kNearSonic) {
    return 2.0 - Lun;
  }
  const MatchResidual f{gamma, Lun};
  if (Lun > 1.0) {
    double lo = 1e-8;
    const double hi = 1.0 - 1e-14;
    // F > 0 near 0 and F < 0 just below 1 on this branch.
    while (f(lo) <= 0.0) {
      lo *= 1e-4;
      if (lo < 1e-300) {
        return 0.0;
      }
    }
    return bracketed_newton(f, lo, hi);
  }
  const double lo = 1.0 + 1e-14;
  double hi = 2.0;
  while (f(hi) <= 0.0) {
    hi *= 2.0;
  }
  return bracketed_newton(f, lo, hi);
}

JumpState jump_state(const GasModel& model, double rho_u, double c_u, double Lun,
                     bool require_admissible) {
  if (require_admissible && Lun < 1.0) {
    throw InadmissibleShock("jump_state: Lun = " + std::to_string(Lun) + " < 1");
  }
  const double gamma = model.gamma();
  const double Ldn = downstream_normal_mach(gamma, Lun);
  const double ratio = Ldn / Lun;
  JumpState out;
  out.rho_d = rho_u * std::pow(ratio, -2.0 / (gamma + 1.0));
  out.c_d = c_u * std::pow(ratio, -(gamma - 1.0) / (gamma + 1.0));
  return out;
}

Sensitivities sensitivities(double gamma, double Lun) {
  if (!(Lun > 1.0)) {
    throw DomainError("sensitivities: Lun must exceed 1, got " + std::to_string(Lun));
  }
  const double Ldn = downstream_normal_mach(gamma, Lun);
  const double gp1 = gamma + 1.0;
  Sensitivities s;
  s.dLdn_dLun = (Lun - 1.0 / Lun) / (Ldn - 1.0 / Ldn) * std::pow(Lun / Ldn, slope_exponent(gamma));
  s.scaled_dzdn_dzun = 2.0 / gp1 * (Lun / Ldn) * s.dLdn_dLun + (gamma - 1.0) / gp1;
  s.dzdn_dzun = std::pow(Lun / Ldn, -2.0 / gp1) * s.scaled_dzdn_dzun;
  // rho_d = (Lun/Ldn)^{2/(gamma+1)}; sigma enters through z_u^n = c_u Lun - sigma.
  const double drho_dLun =
      2.0 / gp1 * std::pow(Lun / Ldn, 2.0 / gp1) * (1.0 / Lun - s.dLdn_dLun / Ldn);
  s.drho_d_dsigma = -drho_dLun;
  s.drho_d_dsigma_sign = s.drho_d_dsigma < 0.0 ? -1 : (s.drho_d_dsigma > 0.0 ? 1 : 0);
  s.dvdn_dsigma = 1.0 - s.dzdn_dzun;
  s.dvdn_dsigma_lower_bound = 2.0 / gp1;
  return s;
}

ShockSolution resolve_oblique(const GasModel& model, const FlowState& upstream, Vec2 xi, Vec2 n) {
  const Vec2 nn = unit(n);
  const Vec2 t = perp(nn);
  const Vec2 zu = upstream.v - xi;
  const double zun = dot(zu, nn);
  if (!(zun > 0.0)) {
    throw WrongSideError("resolve_oblique: normal does not point downstream (z_u.n = " +
                         std::to_string(zun) + ")");
  }
  ShockSolution s;
  s.point = xi;
  s.n = nn;
  s.upstream = upstream;
  s.z_t = dot(zu, t);
  s.Lun = zun / upstream.c;
  s.admissible = s.Lun >= 1.0;
  s.Ldn = downstream_normal_mach(model.gamma(), s.Lun);
  const JumpState j = jump_state(model, upstream.rho, upstream.c, s.Lun, false);
  const Vec2 zd = s.z_t * t + (s.Ldn * j.c_d) * nn;
  s.downstream = FlowState{j.rho_d, zd + xi, j.c_d};
  s.beta = angle_between(zu, nn);
  s.sigma = dot(xi, nn);
  return s;
}

double polar_beta_max(const FlowState& upstream, Vec2 xi) {
  const double zu = norm(upstream.v - xi);
  if (!(zu > upstream.c)) {
    throw NoPolarError("shock_polar: |z_u| <= c_u, no admissible shock");
  }
  // L_u^n = |z_u| cos(beta) / c_u reaches 1 in closed form.
  return std::acos(upstream.c / zu);
}

Vec2 polar_normal(const FlowState& upstream, Vec2 xi, double beta) {
  return rotate(unit(upstream.v - xi), beta);
}

std::vector<PolarSample> shock_polar(const GasModel& model, const FlowState& upstream, Vec2 xi,
                                     std::span<const double> beta_grid) {
  const double bmax = polar_beta_max(upstream, xi);
  std::vector<PolarSample> out;
  out.reserve(beta_grid.size());
  for (const double beta : beta_grid) {
    const double b = std::clamp(beta, -bmax, bmax);
    PolarSample p;
    p.beta = beta;
    if (std::abs(b) >= bmax) {
      // Vanishing shock: downstream equals upstream.
      p.downstream_v = upstream.v;
      p.rho_d = upstream.rho;
      p.c_d = upstream.c;
    } else {
      const ShockSolution s = resolve_oblique(model, upstream, xi, polar_normal(upstream, xi, b));
      p.downstream_v = s.downstream.v;
      p.rho_d = s.downstream.rho;
      p.c_d = s.downstream.c;
    }
    p.z_d = norm(p.downstream_v - xi);
    p.L_d = p.z_d / p.c_d;
    out.push_back(p);
  }
  return out;
}

std::vector<double> polar_beta_grid(const FlowState& upstream, Vec2 xi, int n) {
  const double bmax = polar_beta_max(upstream, xi);
  std::vector<double> grid(static_cast<std::size_t>(std::max(n, 2)));
  const double step = 2.0 * bmax / static_cast<double>(grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = -bmax + step * static_cast<double>(i);
  }
  grid.back() = bmax;
  return grid;
}

namespace {

struct SteadyPolar {
  const GasModel& model;
  const FlowState& upstream;
  double bmax;

  // Counterclockwise turning of the flow for beta in [-bmax, 0].
  double deflection(double beta) const {
    if (beta <= -bmax || beta >= 0.0) {
      return 0.0;
    }
    const ShockSolution s = shock(beta);
    return angle_between(upstream.v, s.downstream.v);
  }

  ShockSolution shock(double beta) const {
    if (beta <= -bmax) {
      ShockSolution s = resolve_oblique(model, upstream, Vec2{},
                                        polar_normal(upstream, Vec2{}, -bmax * (1.0 - 1e-15)));
      s.downstream = upstream;
      s.Lun = 1.0;
      s.Ldn = 1.0;
      return s;
    }
    return resolve_oblique(model, upstream, Vec2{}, polar_normal(upstream, Vec2{}, beta));
  }

  double argmax() const {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -bmax;
    double b = 0.0;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = deflection(x1);
    double f2 = deflection(x2);
    while (b - a > 1e-14 * bmax) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = deflection(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = deflection(x1);
      }
    }
    return 0.5 * (a + b);
  }

  // Root of deflection(beta) = tau on [lo, hi] where the sign differs at the ends.
  double solve(double tau, double lo, double hi) const {
    double flo = deflection(lo) - tau;
    if (flo == 0.0) {
      return lo;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-16 * bmax; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = deflection(mid) - tau;
      if (fm == 0.0) {
        return mid;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

AttachedShock classify(const SteadyPolar& polar, double beta) {
  AttachedShock a;
  a.shock = polar.shock(beta);
  a.deflection = angle_between(polar.upstream.v, a.shock.downstream.v);
  a.mach_d = norm(a.shock.downstream.v) / a.shock.downstream.c;
  a.supersonic = a.mach_d > 1.0;
  return a;
}

}  // namespace

std::optional<DeflectionSolutions> deflection_solutions(const GasModel& model,
                                                        const FlowState& upstream, Radians tau) {
  const double mach = norm(upstream.v) / upstream.c;
  if (!(mach > 1.0)) {
    throw NoAttachedShock("deflection_solutions: upstream Mach " + std::to_string(mach) +
                          " is not supersonic");
  }
  if (tau.value < 0.0 || tau.value >= 0.5 * std::numbers::pi) {
    return std::nullopt;
  }
  const SteadyPolar polar{model, upstream, polar_beta_max(upstream, Vec2{})};
  const double bc = polar.argmax();
  const double tau_star = polar.deflection(bc);
  if (tau.value > tau_star) {
    return std::nullopt;
  }
  DeflectionSolutions out;
  out.weak = classify(polar, polar.solve(tau.value, -polar.bmax, bc));
  out.strong = classify(polar, tau.value == 0.0 ? 0.0 : polar.solve(tau.value, bc, 0.0));
  return out;
}

double critical_angle(const GasModel& model, const FlowState& upstream) {
  double lo = 0.0;
  double hi = 0.5 * std::numbers::pi;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (deflection_solutions(model, upstream, Radians{mid})) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

HorizontalShock horizontal_downstream_shock(const GasModel& model, double rho_u, double v_u_y,
                                            double beta) {
  if (!(v_u_y < 0.0)) {
    throw DomainError("horizontal_downstream_shock: v_u^y must be negative");
  }
  if (!(std::abs(beta) < 0.5 * std::numbers::pi)) {
    throw DomainError("horizontal_downstream_shock: beta out of (-pi/2, pi/2)");
  }
  const FlowState up = FlowState::make(model, rho_u, Vec2{0.0, v_u_y});
  const Vec2 n{std::sin(beta), -std::cos(beta)};
  auto vdy = [&](double eta) {
    return resolve_oblique(model, up, Vec2{0.0, eta}, n).downstream.v.y;
  };
  // L_u^n = 1 at eta_lo, where v_d^y = v_u^y < 0; v_d^y increases with eta.
  const double eta_lo = v_u_y + up.c / std::cos(beta);
  double lo = eta_lo;
  double step = up.c;
  double hi = eta_lo + step;
  while (vdy(hi) <= 0.0) {
    lo = hi;
    step *= 2.0;
    hi = eta_lo + step;
  }
  const double eta = detail::bracketed_root(vdy, lo, hi);
  HorizontalShock out;
  out.eta0 = eta;
  out.shock = resolve_oblique(model, up, Vec2{0.0, out.eta0}, n);
  return out;
}

Vec2 pseudo_normal_point(const ShockSolution& s) {
  const Vec2 t = s.tangent();
  return s.point + dot(t, s.downstream.v - s.point) * t;
}

std::pair<Vec2, Vec2> sonic_points(const ShockSolution& s, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw DomainError("sonic_points: epsilon must lie in [0, 1)");
  }
  const double room = 1.0 - epsilon - s.Ldn * s.Ldn;
  if (!(room > 0.0)) {
    throw NoSonicIntersection("sonic_points: L_d^n >= sqrt(1 - epsilon)");
  }
  const Vec2 m = pseudo_normal_point(s);
  const Vec2 d = (s.downstream.c * std::sqrt(room)) * s.tangent();
  return {m - d, m + d};
}

}  // namespace wedge
