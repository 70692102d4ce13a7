#include "wedge/wave_pattern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "root_find.hpp"
#include "wedge/errors.hpp"

namespace wedge {

void ProblemConfig::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(key, "must be positive and finite");
    }
  };
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma", "must be >= 1");
  }
  positive("rho_I", rho_I);
  positive("c_I", c_I);
  if (!(epsilon >= 0.0 && epsilon <= kEpsilonMax)) {
    throw ConfigError("epsilon", "must lie in [0, " + std::to_string(kEpsilonMax) + "]");
  }
  if (!(C_eta >= 0.0) || !std::isfinite(C_eta)) {
    throw ConfigError("C_eta", "must be nonnegative");
  }
  const bool original = M_I.has_value() || tau.has_value();
  if (original) {
    if (MIy) {
      throw ConfigError("M_I_y", "give either M_I_y or (M_I, tau), not both");
    }
    if (!M_I) {
      throw ConfigError("M_I", "required together with tau");
    }
    if (!tau) {
      throw ConfigError("tau", "required together with M_I");
    }
    positive("M_I", *M_I);
    if (!(*tau > 0.0 && *tau < 0.5 * std::numbers::pi)) {
      throw ConfigError("tau", "must lie in (0, pi/2)");
    }
    if (eta_L_star) {
      throw ConfigError("eta_L_star", "is determined by tau in the original form");
    }
  } else {
    if (!MIy) {
      throw ConfigError("M_I_y", "required (or give M_I and tau)");
    }
    if (!(*MIy < 0.0) || !std::isfinite(*MIy)) {
      throw ConfigError("M_I_y", "must be negative");
    }
  }
  if (eta_L_star && (!(*eta_L_star > 0.0) || !std::isfinite(*eta_L_star))) {
    throw ConfigError("eta_L_star", "must be positive");
  }
}

Vec2 Arc::point(double angle) const {
  return center + radius * Vec2{std::cos(angle), std::sin(angle)};
}

Vec2 Arc::tangent(double angle) const { return Vec2{-std::sin(angle), std::cos(angle)}; }

Vec2 PictureMap::direction(Vec2 d) const {
  Vec2 r = rotate(d, rotation);
  if (reflect) {
    r.x = -r.x;
  }
  return r;
}

Vec2 PictureMap::point(Vec2 xi) const { return direction(xi - shift); }

Vec2 PictureMap::inverse_direction(Vec2 d) const {
  if (reflect) {
    d.x = -d.x;
  }
  return rotate(d, -rotation);
}

Vec2 PictureMap::inverse_point(Vec2 p) const { return inverse_direction(p) + shift; }

double WavePattern::psi_I(Vec2 xi) const {
  return -pi_of_rho(model, I.rho) - 0.5 * norm_sq(I.v) + dot(I.v, xi);
}

double WavePattern::psi_L(Vec2 xi) const { return psi_I(xi_L_star) + dot(L.v, xi - xi_L_star); }

double WavePattern::psi_R(Vec2 xi) const { return psi_I(xi_R_star) + dot(R.v, xi - xi_R_star); }

double WavePattern::alpha() const { return std::tan(beta_L); }

namespace {

struct LFamilyMember {
  HorizontalShock hs;
  Vec2 corner;
};

LFamilyMember l_family(const GasModel& model, const FlowState& I, double beta, double epsilon) {
  LFamilyMember m;
  m.hs = horizontal_downstream_shock(model, I.rho, I.v.y, beta);
  m.corner = sonic_points(m.hs.shock, epsilon).first;
  return m;
}

// eta of the near-corner sonic point; strictly decreasing in beta >= 0.
double l_family_height(const GasModel& model, const FlowState& I, double beta, double epsilon) {
  const ShockSolution s = horizontal_downstream_shock(model, I.rho, I.v.y, beta).shock;
  const double room = 1.0 - epsilon - s.Ldn * s.Ldn;
  if (!(room > 0.0)) {
    throw NoSonicIntersection("L shock family: no sonic point at beta = " + std::to_string(beta));
  }
  return (s.Ldn * std::cos(beta) - std::sin(beta) * std::sqrt(room)) * s.downstream.c;
}

double find_l_beta(const GasModel& model, const FlowState& I, double eta_target, double eta_R,
                   double epsilon) {
  if (std::abs(eta_target - eta_R) <= 1e-14 * std::abs(eta_R)) {
    return 0.0;
  }
  if (eta_target > eta_R) {
    throw GeometryError("eta_L_star " + std::to_string(eta_target) + " exceeds eta_R_star " +
                        std::to_string(eta_R));
  }
  auto f = [&](double beta) { return l_family_height(model, I, beta, epsilon) - eta_target; };
  double lo = 0.0;
  double hi = 0.05;
  const double cap = 0.5 * std::numbers::pi;
  while (f(hi) > 0.0) {
    lo = hi;
    hi = std::min(2.0 * hi, 0.5 * (hi + cap));
    if (cap - hi < 1e-9) {
      throw GeometryError("no L shock reaches eta_L_star " + std::to_string(eta_target));
    }
  }
  return detail::bracketed_root(f, lo, hi);
}

void fill_original_frame(WavePattern& p) {
  if (std::abs(p.beta_L) < 1e-300 || std::abs(p.shock_L.n.x) < 1e-15) {
    const double inf = std::numeric_limits<double>::infinity();
    p.tip = Vec2{-inf, 0.0};
    p.tau = 0.0;
    p.M_I = inf;
    p.M_L = inf;
    p.M_R = inf;
    return;
  }
  const ShockSolution& s = p.shock_L;
  const Vec2 t = s.tangent();
  p.tip = s.point - (s.point.y / t.y) * t;
  p.tip.y = 0.0;
  const Vec2 vI = p.I.v - p.tip;
  const Vec2 vL = p.L.v - p.tip;
  const Vec2 vR = p.R.v - p.tip;
  p.tau = angle_between(vI, vL);
  p.M_I = norm(vI) / p.I.c;
  p.M_L = norm(vL) / p.L.c;
  p.M_R = norm(vR) / p.R.c;
}

}  // namespace

WavePattern build(const ProblemConfig& config, BuildOptions options) {
  config.validate();
  WavePattern p;
  p.model = config.model();
  p.epsilon = config.epsilon;

  double vIy = 0.0;
  std::optional<double> beta_from_tau;
  if (config.M_I) {
    // Steady weak shock at the tip, then rotate so the wall is horizontal.
    const FlowState up = FlowState::make(p.model, config.rho_I, Vec2{*config.M_I * config.c_I, 0.0});
    const auto sol = deflection_solutions(p.model, up, Radians{*config.tau});
    if (!sol) {
      throw NoAttachedShock("tau = " + std::to_string(*config.tau) +
                            " exceeds the critical angle for M_I = " + std::to_string(*config.M_I));
    }
    const Vec2 n_std = rotate(sol->weak.shock.n, -*config.tau);
    beta_from_tau = std::atan2(n_std.x, -n_std.y);
    vIy = -*config.M_I * config.c_I * std::sin(*config.tau);
  } else {
    vIy = *config.MIy * config.c_I;
  }
  p.I = FlowState::make(p.model, config.rho_I, Vec2{0.0, vIy});

  const HorizontalShock hr = horizontal_downstream_shock(p.model, p.I.rho, vIy, 0.0);
  p.shock_R = hr.shock;
  p.eta_R_star = hr.eta0;
  p.R = p.shock_R.downstream;
  p.R.v = Vec2{0.0, 0.0};
  try {
    p.xi_R_star = sonic_points(p.shock_R, p.epsilon).second;
  } catch (const NoSonicIntersection&) {
    throw GeometryError("R shock has no sqrt(1-eps) point; epsilon too large");
  }

  if (beta_from_tau) {
    p.beta_L = *beta_from_tau;
  } else {
    const double target = config.eta_L_star.value_or(p.eta_R_star);
    p.beta_L = find_l_beta(p.model, p.I, target, p.eta_R_star, p.epsilon);
  }
  if (p.beta_L == 0.0) {
    p.shock_L = p.shock_R;
    p.xi_L_star = sonic_points(p.shock_L, p.epsilon).first;
    p.L = p.R;
  } else {
    const LFamilyMember m = l_family(p.model, p.I, p.beta_L, p.epsilon);
    p.shock_L = m.hs.shock;
    p.xi_L_star = m.corner;
    p.L = p.shock_L.downstream;
    p.L.v = Vec2{vIy * std::tan(p.beta_L), 0.0};
  }
  p.eta_L_star = p.xi_L_star.y;

  const double root = std::sqrt(1.0 - p.epsilon);
  p.arc_R = Arc{Vec2{}, root * p.R.c, 0.0, std::atan2(p.xi_R_star.y, p.xi_R_star.x)};
  const Vec2 dl = p.xi_L_star - p.L.v;
  p.arc_L = Arc{p.L.v, root * p.L.c, std::atan2(dl.y, dl.x), std::numbers::pi};
  p.xi_BR = Vec2{p.R.c, 0.0};
  p.xi_BL = Vec2{p.L.v.x - p.L.c, 0.0};

  fill_original_frame(p);
  p.eta_margin_ok = p.model.isothermal() ||
                    p.eta_L_star <= p.eta_R_star - config.C_eta * std::sqrt(p.epsilon) * p.R.c;

  if (options.enforce_supersonic && !(p.M_L > 1.0)) {
    throw SupersonicityViolation("L shock downstream Mach " + std::to_string(p.M_L) + " <= 1");
  }
  return p;
}

double separation_check(const WavePattern& pattern) {
  return distance_to_segment(pattern.I.v, pattern.xi_L_star, pattern.xi_R_star) - pattern.I.c;
}

CrossResult eta_L_cross(const ProblemConfig& config) {
  ProblemConfig cfg = config;
  cfg.eta_L_star.reset();
  const WavePattern ref = build(cfg, BuildOptions{false});
  const double eta_R = ref.eta_R_star;
  auto sep = [&](double eta) {
    cfg.eta_L_star = eta;
    return separation_check(build(cfg, BuildOptions{false}));
  };
  CrossResult out;
  const double eta_min = 1e-9 * eta_R;
  const double s_min = sep(eta_min);
  out.trace.emplace_back(eta_min, s_min);
  if (s_min > 0.0) {
    out.eta_L_x = 0.0;
    return out;
  }
  double lo = eta_min;
  double hi = eta_R;
  out.trace.emplace_back(hi, separation_check(ref));
  while (hi - lo > 1e-13 * eta_R) {
    const double mid = 0.5 * (lo + hi);
    const double s = sep(mid);
    out.trace.emplace_back(mid, s);
    if (s > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.eta_L_x = 0.5 * (lo + hi);
  auto sorted = out.trace;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].second < sorted[i - 1].second) {
      out.monotone = false;
    }
  }
  return out;
}

PictureMap picture_map(const WavePattern& standard, Picture target) {
  PictureMap m;
  switch (target) {
    case Picture::standard:
      break;
    case Picture::L_picture:
      m.shift = standard.L.v;
      m.rotation = -standard.beta_L;
      m.reflect = true;
      break;
    case Picture::original:
      m.shift = standard.tip;
      m.rotation = standard.tau > 0.0 ? standard.tau : 0.0;
      if (!std::isfinite(m.shift.x)) {
        throw GeometryError("original picture undefined for a straight horizontal L shock");
      }
      break;
  }
  return m;
}

namespace {

struct Mapper {
  const PictureMap& m;
  bool inverse;

  Vec2 pt(Vec2 p) const { return inverse ? m.inverse_point(p) : m.point(p); }
  Vec2 dir(Vec2 d) const { return inverse ? m.inverse_direction(d) : m.direction(d); }

  FlowState state(FlowState s) const {
    s.v = pt(s.v);
    return s;
  }

  ShockSolution shock(ShockSolution s) const {
    s.point = pt(s.point);
    s.n = dir(s.n);
    s.upstream = state(s.upstream);
    s.downstream = state(s.downstream);
    s.z_t = dot(s.z_u(), s.tangent());
    s.beta = angle_between(s.z_u(), s.n);
    s.sigma = dot(s.point, s.n);
    return s;
  }

  Arc arc(const Arc& a) const {
    const double span = a.angle_end - a.angle_begin;
    Arc r;
    r.center = pt(a.center);
    r.radius = a.radius;
    const Vec2 first = pt(a.point(a.angle_begin)) - r.center;
    const Vec2 last = pt(a.point(a.angle_end)) - r.center;
    // A reflection reverses the counterclockwise order.
    const Vec2 start = m.reflect ? last : first;
    r.angle_begin = std::atan2(start.y, start.x);
    r.angle_end = r.angle_begin + span;
    return r;
  }

  WavePattern apply(const WavePattern& p) const {
    WavePattern q = p;
    q.I = state(p.I);
    q.L = state(p.L);
    q.R = state(p.R);
    q.shock_L = shock(p.shock_L);
    q.shock_R = shock(p.shock_R);
    q.xi_L_star = pt(p.xi_L_star);
    q.xi_R_star = pt(p.xi_R_star);
    q.xi_BL = pt(p.xi_BL);
    q.xi_BR = pt(p.xi_BR);
    q.arc_L = arc(p.arc_L);
    q.arc_R = arc(p.arc_R);
    if (std::isfinite(p.tip.x)) {
      q.tip = pt(p.tip);
    }
    return q;
  }
};

}  // namespace

WavePattern picture_transform(const WavePattern& pattern, Picture target) {
  WavePattern standard = pattern;
  if (pattern.picture != Picture::standard) {
    standard = Mapper{pattern.frame, true}.apply(pattern);
    standard.picture = Picture::standard;
    standard.frame = PictureMap{};
  }
  if (target == Picture::standard) {
    return standard;
  }
  const PictureMap m = picture_map(standard, target);
  WavePattern out = Mapper{m, false}.apply(standard);
  out.picture = target;
  out.frame = m;
  return out;
}

void write_pattern_csv(const WavePattern& p, std::ostream& out) {
  out.precision(17);
  out << "entity,x,y,radius,angle_begin,angle_end,rho,c\n";
  auto row = [&](const char* name, Vec2 v, double radius, double a0, double a1, double rho,
                 double c) {
    out << name << ',' << v.x << ',' << v.y << ',' << radius << ',' << a0 << ',' << a1 << ','
        << rho << ',' << c << '\n';
  };
  auto state = [&](const char* name, const FlowState& s) { row(name, s.v, s.c, 0, 0, s.rho, s.c); };
  auto shock = [&](const char* name, const ShockSolution& s) {
    const double a = std::atan2(s.n.y, s.n.x);
    row(name, s.point, 0, a, a, s.downstream.rho, s.downstream.c);
  };
  auto arc = [&](const char* name, const Arc& a, const FlowState& s) {
    row(name, a.center, a.radius, a.angle_begin, a.angle_end, s.rho, s.c);
  };
  state("state_I", p.I);
  state("state_L", p.L);
  state("state_R", p.R);
  shock("shock_L", p.shock_L);
  shock("shock_R", p.shock_R);
  row("corner_L", p.xi_L_star, 0, 0, 0, p.L.rho, p.L.c);
  row("corner_R", p.xi_R_star, 0, 0, 0, p.R.rho, p.R.c);
  row("wall_BL", p.xi_BL, 0, 0, 0, p.L.rho, p.L.c);
  row("wall_BR", p.xi_BR, 0, 0, 0, p.R.rho, p.R.c);
  arc("arc_L", p.arc_L, p.L);
  arc("arc_R", p.arc_R, p.R);
  if (std::isfinite(p.tip.x)) {
    row("tip", p.tip, 0, 0, 0, p.L.rho, p.L.c);
  }
}

}  // namespace wedge
