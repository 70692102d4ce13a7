#include "wedge/unsteady_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <ostream>

#include "wedge/errors.hpp"

namespace wedge {

static_assert(std::endian::native == std::endian::little, "raw dump assumes little-endian host");

Grid Grid::box(Vec2 origin, double spacing, int nx, int ny, std::array<BoundaryKind, 4> sides) {
  if (!(spacing > 0.0) || nx <= 0 || ny <= 0) {
    throw DomainError("grid needs positive spacing and cell counts");
  }
  Grid g;
  g.origin = origin;
  g.spacing = spacing;
  g.nx = nx;
  g.ny = ny;
  g.sides = sides;
  return g;
}

Grid Grid::wedge(double x0, double spacing, int nx, int ny, double tau) {
  if (!(tau >= 0.0 && tau < 0.5 * std::numbers::pi)) {
    throw DomainError("wedge half-angle must lie in [0, pi/2)");
  }
  const double snapped = std::floor(x0 / spacing) * spacing;
  Grid g = box(Vec2{snapped, 0.0}, spacing, nx, ny,
               {BoundaryKind::inflow, BoundaryKind::outflow, BoundaryKind::wall,
                BoundaryKind::inflow});
  g.tau = tau;
  g.solid.assign(static_cast<std::size_t>(nx) * ny, 0);
  const double slope = std::tan(tau);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 c = g.center(i, j);
      if (c.x < 0.0 && c.y < -c.x * slope) {
        g.solid[g.index(i, j)] = 1;
      }
    }
  }
  return g;
}

double Grid::fluid_area() const {
  const double cell = spacing * spacing;
  if (solid.empty()) {
    return cell * nx * ny;
  }
  return cell * static_cast<double>(std::count(solid.begin(), solid.end(), std::uint8_t{0}));
}

Vec2 Grid::wall_normal(Side side, Vec2 p) const {
  switch (side) {
    case Side::left:
      return {1.0, 0.0};
    case Side::right:
      return {-1.0, 0.0};
    case Side::top:
      return {0.0, -1.0};
    case Side::bottom:
      break;
  }
  if (tau > 0.0 && p.x < 0.0) {
    return {std::sin(tau), std::cos(tau)};
  }
  return {0.0, 1.0};
}

double SimState::total_mass(const Grid& grid) const {
  double m = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (grid.fluid(i, j)) {
        m += rho[grid.index(i, j)];
      }
    }
  }
  return m * grid.spacing * grid.spacing;
}

UnsteadySolver::UnsteadySolver(GasModel model, Grid grid, FlowState inflow, SimConfig config)
    : model_(model), grid_(std::move(grid)), inflow_(inflow), config_(config) {
  if (!(config_.cfl > 0.0 && config_.cfl <= 1.0)) {
    throw ConfigError("cfl", "must lie in (0, 1]");
  }
}

SimState UnsteadySolver::init() const {
  const std::size_t n = static_cast<std::size_t>(grid_.nx) * grid_.ny;
  SimState s;
  s.rho.assign(n, inflow_.rho);
  s.vx.assign(n, inflow_.v.x);
  s.vy.assign(n, inflow_.v.y);
  return s;
}

double UnsteadySolver::max_dt(const SimState& state) const {
  double amax = 0.0;
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      if (!grid_.fluid(i, j)) {
        continue;
      }
      const std::size_t k = grid_.index(i, j);
      const double c = sound_speed(model_, state.rho[k]);
      amax = std::max(amax, std::hypot(state.vx[k], state.vy[k]) + c);
    }
  }
  return config_.cfl * grid_.spacing / amax;
}

namespace {

struct Cell {
  double rho;
  Vec2 v;
};

Cell reflect(Cell u, Vec2 n) {
  u.v = u.v - 2.0 * dot(u.v, n) * n;
  return u;
}

struct FaceFlux {
  double mass;
  double vn;  // flux of the normal velocity component
  double vt;  // flux of the tangential component (dissipation only)
};

}  // namespace

SimState UnsteadySolver::step(const SimState& state, double dt, double* boundary_mass_inflow) const {
  const double limit = max_dt(state);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw CflError("dt = " + std::to_string(dt) + " exceeds the CFL bound " + std::to_string(limit));
  }
  const Grid& g = grid_;
  const double h = g.spacing;
  const double lambda = dt / h;
  SimState next = state;
  next.t = state.t + dt;
  double inflow_mass = 0.0;

  auto at = [&](int i, int j) {
    const std::size_t k = g.index(i, j);
    return Cell{state.rho[k], Vec2{state.vx[k], state.vy[k]}};
  };
  auto ghost = [&](Cell inner, Side side, Vec2 p, BoundaryKind kind) {
    switch (kind) {
      case BoundaryKind::inflow:
        return Cell{inflow_.rho, inflow_.v};
      case BoundaryKind::outflow:
        return inner;
      case BoundaryKind::wall:
      case BoundaryKind::periodic:
        break;
    }
    return reflect(inner, g.wall_normal(side, p));
  };
  // Flux in direction e (unit axis) between a (left/below) and b (right/above).
  auto flux = [&](const Cell& a, const Cell& b, bool xdir) {
    const double van = xdir ? a.v.x : a.v.y;
    const double vbn = xdir ? b.v.x : b.v.y;
    const double vat = xdir ? a.v.y : a.v.x;
    const double vbt = xdir ? b.v.y : b.v.x;
    const double ca = sound_speed(model_, a.rho);
    const double cb = sound_speed(model_, b.rho);
    const double Ba = 0.5 * norm_sq(a.v) + pi_of_rho(model_, a.rho);
    const double Bb = 0.5 * norm_sq(b.v) + pi_of_rho(model_, b.rho);
    const double s = std::max(std::abs(van) + ca, std::abs(vbn) + cb);
    return FaceFlux{0.5 * (a.rho * van + b.rho * vbn) - 0.5 * s * (b.rho - a.rho),
                    0.5 * (Ba + Bb) - 0.5 * s * (vbn - van), -0.5 * s * (vbt - vat)};
  };
  auto apply = [&](int i, int j, const FaceFlux& f, bool xdir, double sign) {
    const std::size_t k = g.index(i, j);
    next.rho[k] += sign * lambda * f.mass;
    if (xdir) {
      next.vx[k] += sign * lambda * f.vn;
      next.vy[k] += sign * lambda * f.vt;
    } else {
      next.vy[k] += sign * lambda * f.vn;
      next.vx[k] += sign * lambda * f.vt;
    }
  };

  // x-faces: face i sits between cells i-1 and i.
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      const Vec2 p = g.origin + Vec2{i * h, (j + 0.5) * h};
      const bool has_a = i > 0 && g.fluid(i - 1, j);
      const bool has_b = i < g.nx && g.fluid(i, j);
      if (!has_a && !has_b) {
        continue;
      }
      Cell a{};
      Cell b{};
      if (has_a && has_b) {
        a = at(i - 1, j);
        b = at(i, j);
      } else if (has_b) {
        b = at(i, j);
        if (i == 0) {
          if (g.sides[0] == BoundaryKind::periodic) {
            continue;  // handled from the right edge
          }
          a = ghost(b, Side::left, p, g.sides[0]);
        } else {
          a = reflect(b, g.wall_normal(Side::bottom, p));
        }
      } else {
        a = at(i - 1, j);
        if (i == g.nx) {
          if (g.sides[1] == BoundaryKind::periodic) {
            b = at(0, j);
          } else {
            b = ghost(a, Side::right, p, g.sides[1]);
          }
        } else {
          b = reflect(a, g.wall_normal(Side::bottom, p));
        }
      }
      const FaceFlux f = flux(a, b, true);
      const bool periodic_edge = i == g.nx && g.sides[1] == BoundaryKind::periodic;
      if (has_a) {
        apply(i - 1, j, f, true, -1.0);
      } else {
        inflow_mass += f.mass;
      }
      if (has_b) {
        apply(i, j, f, true, +1.0);
      } else if (periodic_edge) {
        apply(0, j, f, true, +1.0);
      } else {
        inflow_mass -= f.mass;
      }
    }
  }
  // y-faces: face j sits between cells j-1 and j.
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 p = g.origin + Vec2{(i + 0.5) * h, j * h};
      const bool has_a = j > 0 && g.fluid(i, j - 1);
      const bool has_b = j < g.ny && g.fluid(i, j);
      if (!has_a && !has_b) {
        continue;
      }
      Cell a{};
      Cell b{};
      if (has_a && has_b) {
        a = at(i, j - 1);
        b = at(i, j);
      } else if (has_b) {
        b = at(i, j);
        if (j == 0) {
          if (g.sides[2] == BoundaryKind::periodic) {
            continue;
          }
          a = ghost(b, Side::bottom, p, g.sides[2]);
        } else {
          a = reflect(b, g.wall_normal(Side::bottom, p));
        }
      } else {
        a = at(i, j - 1);
        if (j == g.ny) {
          if (g.sides[3] == BoundaryKind::periodic) {
            b = at(i, 0);
          } else {
            b = ghost(a, Side::top, p, g.sides[3]);
          }
        } else {
          b = reflect(a, g.wall_normal(Side::bottom, p));
        }
      }
      const FaceFlux f = flux(a, b, false);
      const bool periodic_edge = j == g.ny && g.sides[3] == BoundaryKind::periodic;
      if (has_a) {
        apply(i, j - 1, f, false, -1.0);
      } else {
        inflow_mass += f.mass;
      }
      if (has_b) {
        apply(i, j, f, false, +1.0);
      } else if (periodic_edge) {
        apply(i, 0, f, false, +1.0);
      } else {
        inflow_mass -= f.mass;
      }
    }
  }

  const double floor = config_.rho_floor_factor * model_.rho0();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.fluid(i, j) && !(next.rho[g.index(i, j)] > floor)) {
        const Vec2 c = g.center(i, j);
        throw VacuumError("density floor reached at cell (" + std::to_string(i) + ", " +
                          std::to_string(j) + "), x = (" + std::to_string(c.x) + ", " +
                          std::to_string(c.y) + "), t = " + std::to_string(next.t));
      }
    }
  }
  if (boundary_mass_inflow) {
    *boundary_mass_inflow = inflow_mass * dt * h;
  }
  return next;
}

SimState UnsteadySolver::advance(SimState state, double t_final,
                                 const std::function<void(const SimState&, int)>& on_snapshot) const {
  int steps = 0;
  while (state.t < t_final) {
    const double dt = std::min(max_dt(state), t_final - state.t);
    state = step(state, dt);
    if (t_final - state.t < 1e-14 * t_final) {
      state.t = t_final;
    }
    ++steps;
    if (on_snapshot && config_.snapshot_every > 0 && steps % config_.snapshot_every == 0) {
      on_snapshot(state, steps);
    }
  }
  // The final state is reported once, even when it falls on the cadence.
  const bool emitted = config_.snapshot_every > 0 && steps > 0 && steps % config_.snapshot_every == 0;
  if (on_snapshot && !emitted) {
    on_snapshot(state, steps);
  }
  return state;
}

SelfSimilarField sample_self_similar(const GasModel& model, const Grid& grid, const SimState& state,
                                     Vec2 xi_origin, double xi_spacing, int nx, int ny) {
  if (!(state.t > 0.0)) {
    throw DomainError("self-similar sampling needs t > 0");
  }
  SelfSimilarField f;
  f.origin = xi_origin;
  f.spacing = xi_spacing;
  f.nx = nx;
  f.ny = ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  f.rho.assign(n, 0.0);
  f.vx.assign(n, 0.0);
  f.vy.assign(n, 0.0);
  f.L.assign(n, 0.0);
  f.valid.assign(n, 0);
  const double h = grid.spacing;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 xi = f.point(i, j);
      const Vec2 x = state.t * xi;
      const double gx = (x.x - grid.origin.x) / h - 0.5;
      const double gy = (x.y - grid.origin.y) / h - 0.5;
      const int i0 = static_cast<int>(std::floor(gx));
      const int j0 = static_cast<int>(std::floor(gy));
      if (i0 < 0 || j0 < 0 || i0 + 1 >= grid.nx || j0 + 1 >= grid.ny) {
        continue;
      }
      if (!grid.fluid(i0, j0) || !grid.fluid(i0 + 1, j0) || !grid.fluid(i0, j0 + 1) ||
          !grid.fluid(i0 + 1, j0 + 1)) {
        continue;
      }
      const double fx = gx - i0;
      const double fy = gy - j0;
      auto lerp = [&](const std::vector<double>& q) {
        const double q00 = q[grid.index(i0, j0)];
        const double q10 = q[grid.index(i0 + 1, j0)];
        const double q01 = q[grid.index(i0, j0 + 1)];
        const double q11 = q[grid.index(i0 + 1, j0 + 1)];
        return (1 - fy) * ((1 - fx) * q00 + fx * q10) + fy * ((1 - fx) * q01 + fx * q11);
      };
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      f.rho[k] = lerp(state.rho);
      f.vx[k] = lerp(state.vx);
      f.vy[k] = lerp(state.vy);
      const Vec2 z = Vec2{f.vx[k], f.vy[k]} - xi;
      f.L[k] = norm(z) / sound_speed(model, f.rho[k]);
      f.valid[k] = 1;
    }
  }
  return f;
}

double self_similarity_defect(const GasModel& model, const Grid& grid, const SimState& s1,
                              const SimState& s2, Vec2 xi_lo, Vec2 xi_hi, double xi_spacing) {
  const int nx = std::max(1, static_cast<int>(std::floor((xi_hi.x - xi_lo.x) / xi_spacing)) + 1);
  const int ny = std::max(1, static_cast<int>(std::floor((xi_hi.y - xi_lo.y) / xi_spacing)) + 1);
  const SelfSimilarField a = sample_self_similar(model, grid, s1, xi_lo, xi_spacing, nx, ny);
  const SelfSimilarField b = sample_self_similar(model, grid, s2, xi_lo, xi_spacing, nx, ny);
  double drho = 0.0;
  double rho = 0.0;
  double dv = 0.0;
  double v = 0.0;
  for (std::size_t k = 0; k < a.rho.size(); ++k) {
    if (!a.valid[k] || !b.valid[k]) {
      continue;
    }
    drho += std::abs(a.rho[k] - b.rho[k]);
    rho += std::abs(b.rho[k]);
    dv += std::hypot(a.vx[k] - b.vx[k], a.vy[k] - b.vy[k]);
    v += std::hypot(b.vx[k], b.vy[k]);
  }
  if (rho == 0.0) {
    return 0.0;
  }
  const double rel_rho = drho / rho;
  const double rel_v = v > 0.0 ? dv / v : dv;
  return std::max(rel_rho, rel_v);
}

ProbeStats probe(const SelfSimilarField& field, const GasModel& model, std::string name,
                 Vec2 center, double half) {
  ProbeStats s;
  s.name = std::move(name);
  s.center = center;
  s.half = half;
  s.L_min = s.M_min = std::numeric_limits<double>::infinity();
  s.L_max = -std::numeric_limits<double>::infinity();
  double r1 = 0.0;
  double r2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  for (int j = 0; j < field.ny; ++j) {
    for (int i = 0; i < field.nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * field.nx + i;
      const Vec2 p = field.point(i, j);
      if (!field.valid[k] || std::abs(p.x - center.x) > half || std::abs(p.y - center.y) > half) {
        continue;
      }
      const double speed = std::hypot(field.vx[k], field.vy[k]);
      ++s.samples;
      r1 += field.rho[k];
      r2 += field.rho[k] * field.rho[k];
      q1 += speed;
      q2 += speed * speed;
      s.L_min = std::min(s.L_min, field.L[k]);
      s.L_max = std::max(s.L_max, field.L[k]);
      s.M_min = std::min(s.M_min, speed / sound_speed(model, field.rho[k]));
    }
  }
  if (s.samples == 0) {
    throw GeometryError("probe '" + s.name + "' contains no valid samples");
  }
  const double n = s.samples;
  s.rho_mean = r1 / n;
  s.speed_mean = q1 / n;
  s.rho_rel_std = std::sqrt(std::max(0.0, r2 / n - s.rho_mean * s.rho_mean)) / s.rho_mean;
  s.speed_rel_std =
      s.speed_mean > 0.0
          ? std::sqrt(std::max(0.0, q2 / n - s.speed_mean * s.speed_mean)) / s.speed_mean
          : 0.0;
  return s;
}

ShockAngleFit fit_tip_shock(const SelfSimilarField& field, double rho_mid, double tau, double x_lo,
                            double x_hi) {
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  int n = 0;
  for (int i = 0; i < field.nx; ++i) {
    const double x = field.point(i, 0).x;
    if (x < x_lo || x > x_hi) {
      continue;
    }
    // Scan downward from the free stream to the first upward density crossing.
    for (int j = field.ny - 2; j >= 0; --j) {
      const std::size_t hi = static_cast<std::size_t>(j + 1) * field.nx + i;
      const std::size_t lo = static_cast<std::size_t>(j) * field.nx + i;
      if (!field.valid[hi] || !field.valid[lo]) {
        continue;
      }
      if (field.rho[hi] < rho_mid && field.rho[lo] >= rho_mid) {
        const double f = (rho_mid - field.rho[hi]) / (field.rho[lo] - field.rho[hi]);
        const double y = field.point(i, j + 1).y - f * field.spacing;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
        break;
      }
    }
  }
  ShockAngleFit fit;
  fit.points = n;
  if (n < 2) {
    fit.angle = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - slope * sx) / n;
  fit.angle = std::atan(slope) + tau;
  return fit;
}

double max_curl_smooth(const Grid& grid, const SimState& state, double rel_tol) {
  double worst = 0.0;
  const double h = grid.spacing;
  for (int j = 1; j + 1 < grid.ny; ++j) {
    for (int i = 1; i + 1 < grid.nx; ++i) {
      bool smooth = true;
      const double r0 = state.rho[grid.index(i, j)];
      for (int dj = -1; dj <= 1 && smooth; ++dj) {
        for (int di = -1; di <= 1 && smooth; ++di) {
          smooth = grid.fluid(i + di, j + dj) &&
                   std::abs(state.rho[grid.index(i + di, j + dj)] - r0) <= rel_tol * r0;
        }
      }
      if (!smooth) {
        continue;
      }
      const double dvy = state.vy[grid.index(i + 1, j)] - state.vy[grid.index(i - 1, j)];
      const double dvx = state.vx[grid.index(i, j + 1)] - state.vx[grid.index(i, j - 1)];
      worst = std::max(worst, std::abs(dvy - dvx) / (2.0 * h));
    }
  }
  return worst;
}

WedgeRunResult run_wedge(const ProblemConfig& problem, const SimConfig& sim,
                         const WedgeSnapshot& on_snapshot) {
  if (sim.nx < 8 || sim.ny < 8) {
    throw ConfigError("nx", "grid must have at least 8 cells per direction");
  }
  if (!(sim.t_final > 0.0)) {
    throw ConfigError("t_final", "must be positive");
  }
  WedgeRunResult out;
  out.pattern = build(problem, BuildOptions{false});
  const WavePattern& p = out.pattern;
  if (!std::isfinite(p.tip.x) || !(p.tau > 0.0)) {
    throw GeometryError("wedge run needs a positive wedge angle");
  }
  const Vec2 tip = p.tip;
  const double cR = p.R.c;
  const double width = std::abs(tip.x) + 2.0 * cR + 0.5 * p.I.c;
  const double h = width * sim.t_final / sim.nx;
  out.grid = Grid::wedge(-0.1 * width * sim.t_final, h, sim.nx, sim.ny, p.tau);
  const FlowState inflow{p.I.rho, p.I.v - tip, p.I.c};
  const UnsteadySolver solver(p.model, out.grid, inflow, sim);

  SimState s = solver.init();
  int steps = 0;
  auto counting = [&](const SimState& st, int n) {
    if (on_snapshot) {
      on_snapshot(out.grid, st, steps + n);
    }
  };
  int half_steps = 0;
  s = solver.advance(std::move(s), 0.5 * sim.t_final, [&](const SimState& st, int n) {
    half_steps = n;
    if (sim.snapshot_every > 0 && n % sim.snapshot_every == 0) {
      counting(st, n);
    }
  });
  steps = half_steps;
  out.half_state = s;
  int rest = 0;
  out.final_state = solver.advance(std::move(s), sim.t_final, [&](const SimState& st, int n) {
    rest = n;
    counting(st, n);
  });
  out.steps = half_steps + rest;

  const Grid& g = out.grid;
  const double t = sim.t_final;
  const double dxi = h / t;
  out.field = sample_self_similar(p.model, g, out.final_state,
                                  (1.0 / t) * (g.origin + Vec2{0.5 * h, 0.5 * h}), dxi, g.nx, g.ny);

  auto sim_xi = [&](Vec2 std_xi) { return std_xi - tip; };
  const Vec2 tL = p.shock_L.tangent();
  const double slope_L = std::abs(tL.y / tL.x);
  {
    const Vec2 c{tip.x + 0.5 * (p.xi_L_star.x - tip.x), p.xi_L_star.y + 0.25 * p.I.c};
    out.probe_I = probe(out.field, p.model, "I", sim_xi(c), 0.1 * p.I.c);
  }
  {
    // Deep inside the L wedge: clear of the smeared shock and of the tip.
    const double xm = tip.x + 0.65 * (p.xi_BL.x - tip.x);
    const double ys = (xm - tip.x) * slope_L;
    out.probe_L = probe(out.field, p.model, "L", sim_xi(Vec2{xm, 0.35 * ys}), 0.2 * ys);
  }
  out.probe_R = probe(out.field, p.model, "R", sim_xi(Vec2{1.35 * cR, 0.4 * p.eta_R_star}),
                      0.2 * p.eta_R_star);
  {
    const double eta = std::min(p.eta_L_star, p.eta_R_star);
    const Vec2 c{0.5 * (p.xi_L_star.x + p.xi_R_star.x), 0.3 * eta};
    out.probe_elliptic = probe(out.field, p.model, "elliptic", sim_xi(c), 0.05 * eta);
  }

  const double reach = p.xi_L_star.x - tip.x;
  const double rho_mid = 0.5 * (p.I.rho + p.L.rho);
  out.tip_fit = fit_tip_shock(out.field, rho_mid, p.tau, 0.15 * reach, 0.75 * reach);
  out.predicted_angle = p.tau + p.beta_L;

  const Vec2 lo = (1.0 / t) * g.origin;
  const Vec2 hi = (1.0 / t) * (g.origin + Vec2{g.nx * h, g.ny * h});
  out.defect = self_similarity_defect(p.model, g, out.half_state, out.final_state,
                                      Vec2{0.8 * lo.x, 0.0}, Vec2{0.9 * hi.x, 0.9 * hi.y}, dxi);
  out.max_curl_smooth = max_curl_smooth(g, out.final_state);
  return out;
}

void write_state_csv(const Grid& grid, const SimState& state, std::ostream& out) {
  out.precision(17);
  out << "i,j,x,y,rho,vx,vy\n";
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (!grid.fluid(i, j)) {
        continue;
      }
      const std::size_t k = grid.index(i, j);
      const Vec2 c = grid.center(i, j);
      out << i << ',' << j << ',' << c.x << ',' << c.y << ',' << state.rho[k] << ','
          << state.vx[k] << ',' << state.vy[k] << '\n';
    }
  }
}

void write_state_raw(const Grid& grid, const SimState& state, std::ostream& out) {
  out.precision(17);
  out << "WEDGE1 " << grid.nx << ' ' << grid.ny << ' ' << state.t << '\n';
  for (const auto* field : {&state.rho, &state.vx, &state.vy}) {
    out.write(reinterpret_cast<const char*>(field->data()),
              static_cast<std::streamsize>(field->size() * sizeof(double)));
  }
}

}  // namespace wedge
