#include "wedge/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "root_find.hpp"
#include "wedge/errors.hpp"

namespace wedge {

namespace {

constexpr double kPi = std::numbers::pi;

std::string where(Vec2 p) {
  std::ostringstream s;
  s.precision(6);
  s << '(' << p.x << ' ' << p.y << ')';
  return s.str();
}

Check make_check(std::string name, bool pass, double value, double tol, std::string loc = {}) {
  return Check{std::move(name), pass, value, tol, std::move(loc)};
}

Extremum named(std::string quantity) {
  Extremum e;
  e.quantity = std::move(quantity);
  return e;
}

NodeLocation classify(const GridMapping& m, int i, int j) {
  const bool side = i == 0 || i == m.n_sigma() - 1;
  const bool end = j == 0 || j == m.n_zeta() - 1;
  if (side && end) return NodeLocation::corner;
  if (side) return NodeLocation::arc;
  if (j == 0) return NodeLocation::wall;
  if (j == m.n_zeta() - 1) return NodeLocation::shock;
  return NodeLocation::interior;
}

// Unit tangent of the shock row at node i, pointing towards increasing sigma.
Vec2 shock_tangent(const GridMapping& m, int i) {
  const int top = m.n_zeta() - 1;
  const int a = std::max(i - 1, 0);
  const int b = std::min(i + 1, m.n_sigma() - 1);
  return unit(m.node(b, top).xi - m.node(a, top).xi);
}

// Signed curvature of the shock row at node i; positive when the region
// below is locally convex.
double shock_curvature(const GridMapping& m, int i) {
  const int top = m.n_zeta() - 1;
  const int c = std::clamp(i, 1, m.n_sigma() - 2);
  const Vec2 p0 = m.node(c - 1, top).xi;
  const Vec2 p1 = m.node(c, top).xi;
  const Vec2 p2 = m.node(c + 1, top).xi;
  const Vec2 d1 = 0.5 * (p2 - p0);
  const Vec2 d2 = p2 - 2.0 * p1 + p0;
  return -cross(d1, d2) / std::pow(norm_sq(d1), 1.5);
}

// Derivative of y with respect to x at sample k from three neighbors.
double nonuniform_derivative(std::span<const double> x, std::span<const double> y, std::size_t k) {
  const std::size_t n = x.size();
  std::size_t a = k == 0 ? 0 : (k == n - 1 ? n - 3 : k - 1);
  const double x0 = x[a], x1 = x[a + 1], x2 = x[a + 2];
  const double t = x[k];
  // Derivative of the Lagrange interpolant through the three samples.
  const double l0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2));
  const double l1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2));
  const double l2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
  return l0 * y[a] + l1 * y[a + 1] + l2 * y[a + 2];
}

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

// Distance of angle a from the closed arc [lo, hi] (hi - lo < 2 pi).
double angular_gap(double a, double lo, double hi) {
  const double from_lo = wrap_2pi(a - lo);
  if (from_lo <= hi - lo) return 0.0;
  return std::min(from_lo - (hi - lo), 2.0 * kPi - from_lo);
}

}  // namespace

bool all_pass(const Report& report) {
  return std::all_of(report.begin(), report.end(), [](const Check& c) { return c.pass; });
}

void write_report_text(const Report& report, std::ostream& out) {
  for (const auto& c : report) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
        << " tol=" << c.tolerance;
    if (!c.location.empty()) out << " at " << c.location;
    out << '\n';
  }
}

void write_report_csv(const Report& report, std::ostream& out) {
  out.precision(12);
  out << "name,pass,value,tolerance,location\n";
  for (const auto& c : report) {
    out << c.name << ',' << (c.pass ? 1 : 0) << ',' << c.value << ',' << c.tolerance << ",\""
        << c.location << "\"\n";
  }
}

const char* to_string(NodeLocation loc) {
  switch (loc) {
    case NodeLocation::interior: return "interior";
    case NodeLocation::wall: return "wall";
    case NodeLocation::shock: return "shock";
    case NodeLocation::arc: return "arc";
    case NodeLocation::corner: return "corner";
  }
  return "unknown";
}

double lattice_spacing(const GridMapping& m) {
  double h = 0.0;
  for (int i = 0; i < m.n_sigma(); ++i) {
    for (int j = 0; j < m.n_zeta(); ++j) {
      const Vec2 p = m.node(i, j).xi;
      if (i + 1 < m.n_sigma()) h = std::max(h, distance(p, m.node(i + 1, j).xi));
      if (j + 1 < m.n_zeta()) h = std::max(h, distance(p, m.node(i, j + 1).xi));
    }
  }
  return h;
}

ExtremumReport ellipticity_report(const WavePattern& pattern, const EllipticSolution& sol,
                                  double grid_C) {
  const GridMapping& m = sol.mapping;
  const double tol = 1.0 - pattern.epsilon + grid_C * lattice_spacing(m);
  Extremum best = named("L2");
  best.value = -1.0;
  best.is_min = false;
  double overall = -1.0;
  for (int i = 0; i < m.n_sigma(); ++i) {
    for (int j = 0; j < m.n_zeta(); ++j) {
      const double L2 = sol.states[m.index(i, j)].L2;
      overall = std::max(overall, L2);
      if (i == 0 || i == m.n_sigma() - 1) continue;
      if (L2 > best.value) {
        best.value = L2;
        best.point = m.node(i, j).xi;
        best.location = classify(m, i, j);
      }
    }
  }
  // Largest L^2 on the shock away from the corners: located, not judged.
  Extremum shock_max = named("L2_shock");
  shock_max.value = -1.0;
  shock_max.is_min = false;
  shock_max.location = NodeLocation::shock;
  for (int i = 1; i + 1 < m.n_sigma(); ++i) {
    const int top = m.n_zeta() - 1;
    if (sol.states[m.index(i, top)].L2 > shock_max.value) {
      shock_max.value = sol.states[m.index(i, top)].L2;
      shock_max.point = m.node(i, top).xi;
    }
  }
  ExtremumReport r;
  r.extrema.push_back(best);
  r.extrema.push_back(shock_max);
  r.checks.push_back(make_check("shock_L2_max_located", true, shock_max.value, 1.0,
                                where(shock_max.point)));
  r.checks.push_back(make_check("ellipticity_off_arcs", best.value < tol, best.value, tol,
                                std::string(to_string(best.location)) + ' ' + where(best.point)));
  // Reported: the arcs carry L^2 = 1 - eps by construction.
  r.checks.push_back(make_check("ellipticity_closure", overall < 1.0 + grid_C * lattice_spacing(m),
                                overall, 1.0 + grid_C * lattice_spacing(m)));
  return r;
}

ExtremumReport density_extrema(const WavePattern& pattern, const EllipticSolution& sol,
                               double grid_C) {
  const GridMapping& m = sol.mapping;
  const int ns = m.n_sigma();
  const int nz = m.n_zeta();
  const double h = lattice_spacing(m);
  const double cR = pattern.R.c;
  const double depth_tol = grid_C * h * h * pattern.I.rho / (cR * cR);
  auto rho = [&](int i, int j) { return sol.states[m.index(i, j)].rho; };

  // Plateau components of equal density, each judged against its rim.
  std::vector<int> label(m.size(), -1);
  ExtremumReport r;
  int worst_interior = 0;
  double worst_depth = 0.0;
  std::string worst_where;
  bool shock_minima_ok = true;
  std::string shock_where;
  for (int i0 = 0; i0 < ns; ++i0) {
    for (int j0 = 0; j0 < nz; ++j0) {
      if (label[m.index(i0, j0)] >= 0) continue;
      const double v0 = rho(i0, j0);
      const double same = 1e-12 * std::max(std::abs(v0), 1.0);
      const int id = static_cast<int>(m.index(i0, j0));
      std::vector<std::pair<int, int>> stack{{i0, j0}}, members;
      label[m.index(i0, j0)] = id;
      double rim_min = std::numeric_limits<double>::infinity();
      double rim_max = -std::numeric_limits<double>::infinity();
      while (!stack.empty()) {
        auto [i, j] = stack.back();
        stack.pop_back();
        members.emplace_back(i, j);
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            const int a = i + di, b = j + dj;
            if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= ns || b >= nz) continue;
            const double v = rho(a, b);
            if (std::abs(v - v0) <= same) {
              if (label[m.index(a, b)] != id) {
                label[m.index(a, b)] = id;
                stack.emplace_back(a, b);
              }
            } else {
              rim_min = std::min(rim_min, v);
              rim_max = std::max(rim_max, v);
            }
          }
        }
      }
      if (!std::isfinite(rim_min)) continue;  // constant field
      const bool is_min = rim_min > v0;
      const bool is_max = rim_max < v0;
      if (!is_min && !is_max) continue;
      // Representative: the member with the most restrictive location.
      auto [ri, rj] = members.front();
      for (auto [i, j] : members) {
        if (classify(m, i, j) == NodeLocation::interior || classify(m, i, j) == NodeLocation::wall) {
          ri = i;
          rj = j;
          break;
        }
      }
      Extremum e = named("rho");
      e.location = classify(m, ri, rj);
      e.point = m.node(ri, rj).xi;
      e.value = v0;
      e.is_min = is_min;
      e.depth = is_min ? rim_min - v0 : v0 - rim_max;
      if (e.location == NodeLocation::shock) {
        const Vec2 z = sol.states[m.index(ri, rj)].v - e.point;
        e.chi_t = std::abs(dot(z, shock_tangent(m, ri)));
        e.pseudo_normal = e.chi_t < 5.0 * h * norm(z);
        e.curvature = shock_curvature(m, ri);
      }
      if (is_min) {
        const bool bad_place =
            e.location == NodeLocation::interior || e.location == NodeLocation::wall;
        if (bad_place && e.depth > depth_tol) {
          ++worst_interior;
          if (e.depth > worst_depth) {
            worst_depth = e.depth;
            worst_where = std::string(to_string(e.location)) + ' ' + where(e.point);
          }
        }
        if (e.location == NodeLocation::shock && e.depth > depth_tol &&
            (!e.pseudo_normal || e.curvature < -grid_C * h / (cR * cR))) {
          shock_minima_ok = false;
          shock_where = where(e.point);
        }
      }
      r.extrema.push_back(e);
    }
  }
  r.checks.push_back(make_check("no_interior_or_wall_minima", worst_interior == 0, worst_depth,
                                depth_tol, worst_where));
  r.checks.push_back(
      make_check("shock_minima_pseudo_normal", shock_minima_ok, 0.0, 5.0 * h, shock_where));

  // Global minimum over the closed lattice.
  int gi = 0, gj = 0;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nz; ++j) {
      if (rho(i, j) < rho(gi, gj)) {
        gi = i;
        gj = j;
      }
    }
  }
  const NodeLocation gloc = classify(m, gi, gj);
  r.checks.push_back(make_check("global_min_above_rho_I", rho(gi, gj) > pattern.I.rho,
                                rho(gi, gj), pattern.I.rho,
                                std::string(to_string(gloc)) + ' ' + where(m.node(gi, gj).xi)));
  return r;
}

ExtremumReport velocity_and_normal_ranges(const WavePattern& pattern, const EllipticSolution& sol,
                                          double C) {
  const GridMapping& m = sol.mapping;
  const double se = std::sqrt(pattern.epsilon);
  const double cR = pattern.R.c;
  const double lo = pattern.L.v.x - C * se * cR;
  const double hi = C * se * cR;
  ExtremumReport r;
  Extremum vmin = named("vx"), vmax = named("vx");
  vmin.value = std::numeric_limits<double>::infinity();
  vmax.value = -vmin.value;
  vmax.is_min = false;
  for (int i = 0; i < m.n_sigma(); ++i) {
    for (int j = 0; j < m.n_zeta(); ++j) {
      const double vx = sol.states[m.index(i, j)].v.x;
      if (vx < vmin.value) {
        vmin.value = vx;
        vmin.point = m.node(i, j).xi;
        vmin.location = classify(m, i, j);
      }
      if (vx > vmax.value) {
        vmax.value = vx;
        vmax.point = m.node(i, j).xi;
        vmax.location = classify(m, i, j);
      }
    }
  }
  r.extrema = {vmin, vmax};
  r.checks.push_back(make_check("vx_lower", vmin.value >= lo, vmin.value, lo, where(vmin.point)));
  r.checks.push_back(make_check("vx_upper", vmax.value <= hi, vmax.value, hi, where(vmax.point)));

  // Horizontal velocity of the L picture, v^x + alpha v^y up to scale and
  // shift, between the images of v_L and v_R.
  {
    const PictureMap to_L = picture_map(pattern, Picture::L_picture);
    const double wL = to_L.velocity(pattern.L.v).x;
    const double wR = to_L.velocity(pattern.R.v).x;
    const double wlo = std::min(wL, wR) - C * se * cR;
    const double whi = std::max(wL, wR) + C * se * cR;
    double wmin = std::numeric_limits<double>::infinity(), wmax = -wmin;
    for (const NodeState& st : sol.states) {
      const double w = to_L.velocity(st.v).x;
      wmin = std::min(wmin, w);
      wmax = std::max(wmax, w);
    }
    std::ostringstream alpha;
    alpha << "alpha=" << pattern.alpha();
    r.checks.push_back(make_check("vx_L_picture_lower", wmin >= wlo, wmin, wlo, alpha.str()));
    r.checks.push_back(make_check("vx_L_picture_upper", wmax <= whi, wmax, whi, alpha.str()));
  }

  // Normals between n_R = (0, -1) and n_L = (sin beta, -cos beta).
  const double a_R = -0.5 * kPi;
  const double a_L = -0.5 * kPi + pattern.beta_L;
  const double a_lo = std::min(a_R, a_L), a_hi = std::max(a_R, a_L);
  const int top = m.n_zeta() - 1;
  double gap = 0.0;
  double rho_gap = std::numeric_limits<double>::infinity();
  double chord_gap = std::numeric_limits<double>::infinity();
  std::string gap_where, rho_where, chord_where;
  const Vec2 a = sol.corner_L(), b = sol.corner_R();
  for (int i = 0; i < m.n_sigma(); ++i) {
    const NodeState& s = sol.states[m.index(i, top)];
    const Vec2 p = m.node(i, top).xi;
    const Vec2 n = unit(pattern.I.v - s.v);
    const double g = angular_gap(std::atan2(n.y, n.x), a_lo, a_hi);
    if (g > gap) {
      gap = g;
      gap_where = where(p);
    }
    if (s.rho - pattern.I.rho < rho_gap) {
      rho_gap = s.rho - pattern.I.rho;
      rho_where = where(p);
    }
    const double chord_y = a.y + (b.y - a.y) * (p.x - a.x) / (b.x - a.x);
    if (p.y - chord_y < chord_gap) {
      chord_gap = p.y - chord_y;
      chord_where = where(p);
    }
  }
  r.checks.push_back(make_check("shock_normal_window", gap <= C * se, gap, C * se, gap_where));
  r.checks.push_back(make_check("shock_admissible", rho_gap > 0.0, rho_gap, 0.0, rho_where));
  r.checks.push_back(
      make_check("shock_above_corner_chord", chord_gap >= -1e-12 * cR, chord_gap, 0.0, chord_where));
  return r;
}

ArcConstants arc_constants(double gamma, double epsilon, double c_region) {
  const double D = gamma + 1.0 - epsilon * (gamma - 1.0);
  ArcConstants k;
  k.r = std::sqrt(1.0 - epsilon) * c_region;
  k.sigma_g = -2.0 * (gamma - 1.0) / D;
  k.sigma_f = (1.0 - epsilon) / (2.0 * (1.0 + 2.0 * epsilon / D));
  k.sigma_theta = std::sqrt(-k.sigma_f * k.sigma_g);
  const double lift = 1.0 + 2.0 * epsilon / D;
  k.h0 = lift * lift * k.r * k.r / (1.0 - epsilon);
  return k;
}

double arc_f(const ArcConstants& k, double gamma, double epsilon, double h, double p) {
  const double D = gamma + 1.0 - epsilon * (gamma - 1.0);
  const double r2 = k.r * k.r;
  const double inner = std::max(r2 * h * (1.0 - epsilon) - p * p, 0.0);
  return (2.0 / D) * ((1.0 + epsilon) / (1.0 - epsilon) * p * p / h - epsilon * r2) - r2 +
         std::sqrt(inner);
}

ArcProfile arc_profile(const WavePattern& pattern, const EllipticSolution& sol, ArcSide side,
                       double grid_C) {
  const GridMapping& m = sol.mapping;
  const double gamma = pattern.model.gamma();
  const double eps = pattern.epsilon;
  const bool right = side == ArcSide::R;
  const int i = right ? m.n_sigma() - 1 : 0;
  const Vec2 center = right ? pattern.arc_R.center : pattern.arc_L.center;
  const double c_region = right ? pattern.R.c : pattern.L.c;
  const int top = m.n_zeta() - 1;

  // Off the corner the arc row enforces L^2 = 1 - eps exactly.
  double worst = 0.0;
  for (int j = 0; j < top; ++j) {
    worst = std::max(worst, std::abs(sol.states[m.index(i, j)].L2 - (1.0 - eps)));
  }
  if (worst > 1e-5) {
    throw DomainError("arc condition violated by " + std::to_string(worst) +
                      "; arc profile refused");
  }

  ArcProfile a;
  a.side = side;
  a.constants = arc_constants(gamma, eps, c_region);
  const ArcConstants& K = a.constants;
  const bool has_k = K.sigma_g < 0.0;
  // The L arc is read in its mirror image: phi from the wall, p = chi_phi.
  for (int j = 0; j <= top; ++j) {
    const NodeState& s = sol.states[m.index(i, j)];
    const Vec2 rel = m.node(i, j).xi - center;
    const Vec2 z = s.v - m.node(i, j).xi;
    const double p_std = dot(perp(rel), z);
    const double phi_std = std::atan2(rel.y, rel.x);
    a.phi.push_back(right ? phi_std : kPi - phi_std);
    a.p.push_back(right ? p_std : -p_std);
    const double c = sound_speed(pattern.model, s.rho);
    a.h.push_back(c * c);
    const double kk = has_k ? std::sqrt(-K.sigma_f / K.sigma_g) * (c * c - K.h0) : 0.0;
    a.k.push_back(kk);
    a.q.push_back(std::hypot(a.p.back(), kk));
    a.theta.push_back(std::atan2(kk, a.p.back()));
    a.max_chi_t_over_c = std::max(a.max_chi_t_over_c, std::abs(p_std) / (norm(rel) * c));
  }
  a.phi_bar = a.phi.back();

  const double h = lattice_spacing(m);
  const double cR = pattern.R.c;
  const std::string tag = right ? "arc_R_" : "arc_L_";
  double ode = 0.0, ineq = std::numeric_limits<double>::infinity();
  Vec2 ineq_at;
  for (std::size_t k = 0; k < a.phi.size(); ++k) {
    const double h_phi = nonuniform_derivative(a.phi, a.h, k);
    ode = std::max(ode, std::abs(h_phi - K.sigma_g * a.p[k]));
    if (k == 0 || k + 1 == a.phi.size()) continue;
    const double p_phi = nonuniform_derivative(a.phi, a.p, k);
    const double slack = p_phi - arc_f(K, gamma, eps, a.h[k], a.p[k]);
    if (slack < ineq) {
      ineq = slack;
      ineq_at = m.node(i, static_cast<int>(k)).xi;
    }
  }
  const double tol = grid_C * h * cR;
  a.checks.push_back(make_check(tag + "ode_identity", ode <= tol, ode, tol));
  a.checks.push_back(make_check(tag + "chi_phiphi_bound", ineq >= -tol, ineq, -tol, where(ineq_at)));
  a.checks.push_back(make_check(tag + "wall_p_zero", std::abs(a.p.front()) <= tol,
                                std::abs(a.p.front()), tol));
  if (has_k) {
    const double lo = 0.5 * kPi;
    const double hi = 1.5 * kPi - K.sigma_theta * a.phi_bar;
    int inside = 0;
    for (double th : a.theta) {
      const double t = wrap_2pi(th);
      if (t > lo && t < hi) ++inside;
    }
    a.checks.push_back(make_check(tag + "sector_exclusion", inside == 0, inside, 0.0));
  }
  a.checks.push_back(make_check(tag + "chi_t_over_c", true, a.max_chi_t_over_c,
                                std::sqrt(eps)));
  return a;
}

CornerState corner_state(const WavePattern& pattern, double eta, double epsilon) {
  const double cR = pattern.R.c;
  const double xi2 = (1.0 - epsilon) * cR * cR - eta * eta;
  if (!(xi2 > 0.0)) {
    throw DomainError("corner height beyond the arc radius");
  }
  const Vec2 point{std::sqrt(xi2), eta};
  auto mismatch = [&](double alpha) {
    const Vec2 n{std::sin(alpha), -std::cos(alpha)};
    const ShockSolution s = resolve_oblique(pattern.model, pattern.I, point, n);
    return norm_sq(s.downstream.v - point) - (1.0 - epsilon) * s.downstream.c * s.downstream.c;
  };
  double lo = -1e-3, hi = 1e-3;
  while (mismatch(lo) * mismatch(hi) > 0.0) {
    lo *= 2.0;
    hi *= 2.0;
    if (hi > 0.5) throw DomainError("no corner shock near the R normal");
  }
  const double alpha = detail::bracketed_root(mismatch, lo, hi);
  const Vec2 n{std::sin(alpha), -std::cos(alpha)};
  const ShockSolution s = resolve_oblique(pattern.model, pattern.I, point, n);
  return CornerState{point, n, s.downstream.rho, s.downstream.c, s.downstream.v};
}

CornerSensitivity corner_sensitivity(const WavePattern& pattern, double fd_epsilon,
                                     double fd_step) {
  const double gamma = pattern.model.gamma();
  const double gp = gamma + 1.0, gm = gamma - 1.0;
  const double cR = pattern.R.c;
  const double cu = pattern.I.c;
  const double vu = pattern.I.v.y;
  const double eta = pattern.eta_R_star;
  CornerSensitivity s;
  s.eta = eta;
  s.xi = std::sqrt(cR * cR - eta * eta);
  const double sigma = eta / cu;
  const double Lun = (eta - vu) / cu;
  const double cd2 = cR * cR;
  const double den = gp * (2.0 * eta - vu);
  s.dzdy_domega = (gm * vu - 2.0 * gp * eta - 2.0 * vu * eta * (eta - vu) / cd2) / den;
  s.dvdy_domega = 2.0 * vu * (eta * (vu - eta) / cd2 - 1.0) / den;
  s.p_omega = (2.0 + Lun * (gp * sigma + gm * Lun)) / (Lun + sigma) * (-vu * cu) / (gp * s.xi);
  s.k_omega = std::sqrt(gm / gp) * (-vu);
  s.bound_lhs = std::hypot(s.p_omega, s.k_omega);
  s.bound_rhs = -cR * vu / s.xi;

  const double phi_bar = std::atan2(eta, s.xi);
  const ArcConstants K = arc_constants(gamma, 0.0, cR);
  s.sigma_theta_phi_bar = K.sigma_theta * phi_bar;
  s.theta_plus = 0.5 * kPi - std::atan2(s.p_omega, s.k_omega);
  s.theta_minus = s.theta_plus + kPi;

  // Central differences of the exact corner family at small epsilon.
  const ArcConstants Ke = arc_constants(gamma, fd_epsilon, cR);
  const double dh = fd_step * cR;
  auto pk = [&](double e) {
    const CornerState c = corner_state(pattern, e, fd_epsilon);
    const Vec2 z = c.v_d - c.point;
    const double p = c.point.x * z.y - c.point.y * z.x;
    const double k = Ke.sigma_g < 0.0
                         ? std::sqrt(-Ke.sigma_f / Ke.sigma_g) * (c.c_d * c.c_d - Ke.h0)
                         : 0.0;
    return std::array<double, 3>{c.v_d.y, p, k};
  };
  const auto plus = pk(eta + dh);
  const auto minus = pk(eta - dh);
  s.fd_dvdy = (plus[0] - minus[0]) / (2.0 * dh);
  s.fd_p = (plus[1] - minus[1]) / (2.0 * dh);
  s.fd_k = (plus[2] - minus[2]) / (2.0 * dh);

  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  constexpr double kFdTol = 1e-5;
  s.checks.push_back(make_check("corner_dvdy_positive", s.dvdy_domega > 0.0, s.dvdy_domega, 0.0));
  s.checks.push_back(make_check("corner_dvdy_fd", rel(s.dvdy_domega, s.fd_dvdy) < kFdTol,
                                rel(s.dvdy_domega, s.fd_dvdy), kFdTol));
  s.checks.push_back(
      make_check("corner_p_fd", rel(s.p_omega, s.fd_p) < kFdTol, rel(s.p_omega, s.fd_p), kFdTol));
  if (gm > kIsothermalThreshold) {
    s.checks.push_back(make_check("corner_k_fd", rel(s.k_omega, s.fd_k) < kFdTol,
                                  rel(s.k_omega, s.fd_k), kFdTol));
  }
  s.checks.push_back(make_check("corner_q_bound", s.bound_lhs < s.bound_rhs, s.bound_lhs,
                                s.bound_rhs));
  if (gm <= kIsothermalThreshold) {
    return s;  // k vanishes identically; no corner windows
  }
  const double up = 0.5 * kPi - s.sigma_theta_phi_bar;
  s.checks.push_back(make_check("corner_theta_plus_window",
                                s.theta_plus > 0.0 && s.theta_plus < up, s.theta_plus, up));
  s.checks.push_back(make_check("corner_theta_minus_window",
                                s.theta_minus > kPi && s.theta_minus < kPi + up, s.theta_minus,
                                kPi + up));
  return s;
}

namespace {

FieldSample constant_field(Region r, const FlowState& s) { return FieldSample{r, s.rho, s.v}; }

bool below_L(const WavePattern& p, Vec2 x) {
  return x.x < p.xi_L_star.x && dot(x - p.shock_L.point, p.shock_L.n) > 0.0;
}

bool below_R(const WavePattern& p, Vec2 x) { return dot(x - p.shock_R.point, p.shock_R.n) > 0.0; }

}  // namespace

CompositeField pattern_field(const WavePattern& pattern) {
  return [&pattern](Vec2 x) {
    if (below_L(pattern, x)) return constant_field(Region::L, pattern.L);
    if (below_R(pattern, x)) return constant_field(Region::R, pattern.R);
    return constant_field(Region::I, pattern.I);
  };
}

CompositeField composite_field(const WavePattern& pattern, const EllipticSolution& sol) {
  return [&pattern, &sol](Vec2 x) {
    const GridMapping& m = sol.mapping;
    const int ns = m.n_sigma();
    const int top = m.n_zeta() - 1;
    const auto& s = m.shock().s;
    const double smax = *std::max_element(s.begin(), s.end());
    if (x.y >= 0.0 && x.y <= smax && x.x >= m.level_x(0.0, x.y) && x.x <= m.level_x(1.0, x.y)) {
      const double sg = detail::bracketed_root(
          [&](double t) { return m.level_x(t, x.y) - x.x; }, 0.0, 1.0, 44);
      const double fi = sg * (ns - 1);
      const int i = std::min(static_cast<int>(fi), ns - 2);
      const double ti = fi - i;
      const double height = (1.0 - ti) * s[i] + ti * s[i + 1];
      if (x.y <= height) {
        const double fj = x.y / height * top;
        const int j = std::min(static_cast<int>(fj), top - 1);
        const double tj = fj - j;
        const NodeState& a = sol.states[m.index(i, j)];
        const NodeState& b = sol.states[m.index(i + 1, j)];
        const NodeState& c = sol.states[m.index(i, j + 1)];
        const NodeState& d = sol.states[m.index(i + 1, j + 1)];
        const double w00 = (1 - ti) * (1 - tj), w10 = ti * (1 - tj);
        const double w01 = (1 - ti) * tj, w11 = ti * tj;
        return FieldSample{Region::elliptic, w00 * a.rho + w10 * b.rho + w01 * c.rho + w11 * d.rho,
                           w00 * a.v + w10 * b.v + w01 * c.v + w11 * d.v};
      }
    }
    if (below_L(pattern, x)) return constant_field(Region::L, pattern.L);
    if (x.x > pattern.xi_R_star.x && below_R(pattern, x)) return constant_field(Region::R, pattern.R);
    return constant_field(Region::I, pattern.I);
  };
}

double Bump::value(Vec2 x) const {
  const double s = norm_sq(x - center) / (radius * radius);
  return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
}

Vec2 Bump::gradient(Vec2 x) const {
  const double s = norm_sq(x - center) / (radius * radius);
  if (!(s < 1.0)) return {};
  const double u = 1.0 - s;
  return (-2.0 * std::exp(1.0 - 1.0 / u) / (radius * radius * u * u)) * (x - center);
}

std::vector<Bump> bump_battery(Vec2 lo, Vec2 hi, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double H = hi.y - lo.y;
  std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y), ur(0.2 * H, 0.5 * H);
  std::vector<Bump> out;
  for (int k = 0; k < count; ++k) {
    Bump b;
    b.center = {ux(rng), uy(rng)};
    b.radius = ur(rng);
    out.push_back(b);
  }
  return out;
}

std::pair<Vec2, Vec2> battery_box(const WavePattern& pattern) {
  return {Vec2{pattern.L.v.x - pattern.L.c, 0.0},
          Vec2{pattern.R.c, std::max(pattern.eta_R_star, pattern.eta_L_star)}};
}

namespace {

struct CellSum {
  double integral = 0.0;
  double grad_norm = 0.0;
};

class BumpQuadrature {
 public:
  BumpQuadrature(const CompositeField& field, const Bump& bump, int depth)
      : field_(field), bump_(bump), depth_(depth) {}

  void cell(Vec2 lo, Vec2 size, int level, CellSum& sum) const {
    const std::array<Vec2, 4> corner{lo, lo + Vec2{size.x, 0.0}, lo + size, lo + Vec2{0.0, size.y}};
    std::array<Region, 4> label{};
    for (int k = 0; k < 4; ++k) label[k] = field_(corner[k]).region;
    const bool cut = std::any_of(label.begin(), label.end(), [&](Region r) { return r != label[0]; });
    if (!cut) {
      sample(lo + 0.5 * size, size.x * size.y, sum);
      return;
    }
    if (level < depth_) {
      const Vec2 half = 0.5 * size;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          cell(lo + Vec2{a * half.x, b * half.y}, half, level + 1, sum);
        }
      }
      return;
    }
    if (!split(corner, label, sum)) {
      sample(lo + 0.5 * size, size.x * size.y, sum);
    }
  }

 private:
  void sample(Vec2 x, double area, CellSum& sum) const {
    const double th = bump_.value(x);
    if (th == 0.0) return;
    const Vec2 g = bump_.gradient(x);
    const FieldSample f = field_(x);
    sum.integral += area * f.rho * (dot(f.v - x, g) - 2.0 * th);
    sum.grad_norm += area * norm(g);
  }

  // Two-region cell: locate the interface on the edges, split the cell along
  // the chord and sample each part at its centroid. Second order in the cell
  // size where one midpoint sample is first order.
  bool split(const std::array<Vec2, 4>& corner, const std::array<Region, 4>& label,
             CellSum& sum) const {
    std::array<std::vector<Vec2>, 2> poly;
    std::array<Region, 2> side{label[0], label[0]};
    int current = 0, crossings = 0;
    for (int k = 0; k < 4; ++k) {
      poly[current].push_back(corner[k]);
      const int n = (k + 1) % 4;
      if (label[n] == label[k]) continue;
      if (++crossings > 2) return false;
      Vec2 a = corner[k], b = corner[n];
      for (int it = 0; it < 40; ++it) {
        const Vec2 mid = 0.5 * (a + b);
        (field_(mid).region == label[k] ? a : b) = mid;
      }
      const Vec2 x = 0.5 * (a + b);
      poly[current].push_back(x);
      current ^= 1;
      poly[current].push_back(x);
      side[current] = label[n];
    }
    if (crossings != 2 || side[0] == side[1]) return false;
    std::array<std::pair<Vec2, double>, 2> part;
    for (int q = 0; q < 2; ++q) {
      double area = 0.0;
      Vec2 c;
      const auto& P = poly[q];
      for (std::size_t k = 0; k < P.size(); ++k) {
        const Vec2 u = P[k], w = P[(k + 1) % P.size()];
        const double cr = cross(u, w);
        area += 0.5 * cr;
        c += (cr / 6.0) * (u + w);
      }
      if (!(area > 0.0)) return false;
      part[q] = {c / area, area};
      if (field_(part[q].first).region != side[q]) return false;
    }
    for (const auto& [c, area] : part) sample(c, area, sum);
    return true;
  }

  const CompositeField& field_;
  const Bump& bump_;
  int depth_;
};

}  // namespace

WeakResidual weak_residual(const CompositeField& field, const std::vector<Bump>& bumps,
                           double rho_scale, double c_scale, int quadrature, int refine_depth) {
  WeakResidual out;
  for (const Bump& b : bumps) {
    const double x0 = b.center.x - b.radius;
    const double y0 = std::max(b.center.y - b.radius, 0.0);
    const double y1 = b.center.y + b.radius;
    if (!(y1 > y0)) {
      out.per_bump.push_back(0.0);
      continue;
    }
    const Vec2 size{2.0 * b.radius / quadrature, (y1 - y0) / quadrature};
    const BumpQuadrature q(field, b, refine_depth);
    CellSum sum;
    for (int a = 0; a < quadrature; ++a) {
      for (int c = 0; c < quadrature; ++c) {
        q.cell(Vec2{x0 + a * size.x, y0 + c * size.y}, size, 0, sum);
      }
    }
    const double r = std::abs(sum.integral) / (rho_scale * c_scale * sum.grad_norm);
    out.per_bump.push_back(r);
    out.max_normalized = std::max(out.max_normalized, r);
  }
  return out;
}

VerifySummary verify_solution(const WavePattern& pattern, const EllipticSolution& sol,
                              const DiagnosticOptions& options) {
  VerifySummary out;
  Report& r = out.report;
  auto add = [&r](const Report& more) { r.insert(r.end(), more.begin(), more.end()); };
  const double combined = sol.residual.combined();
  r.push_back(make_check("converged", sol.converged && combined < 1e-6, combined, 1e-6,
                         sol.failure));
  const double window = options.corner_C * std::sqrt(pattern.epsilon) * pattern.R.c;
  const double off_L = distance(sol.corner_L(), pattern.xi_L_star);
  const double off_R = distance(sol.corner_R(), pattern.xi_R_star);
  r.push_back(make_check("corner_L_offset", off_L < window, off_L, window, where(sol.corner_L())));
  r.push_back(make_check("corner_R_offset", off_R < window, off_R, window, where(sol.corner_R())));
  r.push_back(make_check("separation", separation_check(pattern) > 0.0, separation_check(pattern),
                         0.0));

  const ExtremumReport ell = ellipticity_report(pattern, sol, options.grid_C);
  out.max_L2_off_arcs = ell.extrema.front().value;
  add(ell.checks);
  add(density_extrema(pattern, sol).checks);
  out.min_rho = std::numeric_limits<double>::infinity();
  for (const NodeState& st : sol.states) out.min_rho = std::min(out.min_rho, st.rho);
  add(velocity_and_normal_ranges(pattern, sol, options.window_C).checks);
  for (ArcSide side : {ArcSide::L, ArcSide::R}) {
    const char* tag = side == ArcSide::L ? "arc_L_profile" : "arc_R_profile";
    try {
      const ArcProfile a = arc_profile(pattern, sol, side, options.arc_grid_C);
      (side == ArcSide::L ? out.chi_t_L : out.chi_t_R) = a.max_chi_t_over_c;
      add(a.checks);
    } catch (const DomainError& e) {
      r.push_back(make_check(tag, false, 0.0, 0.0, e.what()));
    }
  }
  try {
    add(corner_sensitivity(pattern).checks);
  } catch (const Error& e) {
    r.push_back(make_check("corner_sensitivity", false, 0.0, 0.0, e.what()));
  }
  if (options.weak_residual) {
    const auto [lo, hi] = battery_box(pattern);
    const auto bumps = bump_battery(lo, hi, options.bumps, options.seed);
    out.weak = weak_residual(composite_field(pattern, sol), bumps, pattern.I.rho, pattern.R.c,
                             options.quadrature)
                   .max_normalized;
    r.push_back(make_check("weak_residual", true, out.weak, std::sqrt(pattern.epsilon)));
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("slope needs at least two matching samples");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace wedge
