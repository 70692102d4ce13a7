#include "wedge/elliptic_fixer.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dual.hpp"
#include "root_find.hpp"
#include "wedge/errors.hpp"

namespace wedge {

using detail::Dual;
using D9 = Dual<9>;

namespace {

// Three-point stencil of node i within [0, n): first index and position of i.
struct Window {
  int base = 0;
  int pos = 1;
};

Window window(int i, int n) {
  const int base = std::clamp(i - 1, 0, n - 3);
  return {base, i - base};
}

constexpr double kFirst[3][3] = {{-1.5, 2.0, -0.5}, {-0.5, 0.0, 0.5}, {0.5, -2.0, 1.5}};
constexpr double kSecond[3] = {1.0, -2.0, 1.0};

template <class T>
struct ParamDerivs {
  T s, z, ss, sz, zz;
};

// Derivatives at window position (ps, pz) from 3x3 values V[a][b].
template <class T>
ParamDerivs<T> param_derivs(const T (&V)[3][3], int ps, int pz, double hs, double hz) {
  ParamDerivs<T> d{T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)};
  for (int a = 0; a < 3; ++a) {
    d.s += kFirst[ps][a] * V[a][pz];
    d.ss += kSecond[a] * V[a][pz];
    d.z += kFirst[pz][a] * V[ps][a];
    d.zz += kSecond[a] * V[ps][a];
    for (int b = 0; b < 3; ++b) {
      d.sz += (kFirst[ps][a] * kFirst[pz][b]) * V[a][b];
    }
  }
  d.s = d.s / hs;
  d.z = d.z / hz;
  d.ss = d.ss / (hs * hs);
  d.zz = d.zz / (hz * hz);
  d.sz = d.sz / (hs * hz);
  return d;
}

template <class T>
struct PhysDerivs {
  T gx, gy, hxx, hxy, hyy;
};

// Discrete chain rule: exact for psi affine in xi.
template <class T>
PhysDerivs<T> physical(const NodeGeometry& g, const ParamDerivs<T>& d) {
  const double det = g.det();
  const double Asx = g.yz / det, Asy = -g.xz / det;
  const double Azx = -g.ys / det, Azy = g.xs / det;
  PhysDerivs<T> p{T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)};
  p.gx = Asx * d.s + Azx * d.z;
  p.gy = Asy * d.s + Azy * d.z;
  const T Mss = d.ss - p.gx * g.xpp[0] - p.gy * g.ypp[0];
  const T Msz = d.sz - p.gx * g.xpp[1] - p.gy * g.ypp[1];
  const T Mzz = d.zz - p.gx * g.xpp[2] - p.gy * g.ypp[2];
  auto form = [&](double As_a, double Az_a, double As_b, double Az_b) {
    return (As_a * As_b) * Mss + (As_a * Az_b + Az_a * As_b) * Msz + (Az_a * Az_b) * Mzz;
  };
  p.hxx = form(Asx, Azx, Asx, Azx);
  p.hxy = form(Asx, Azx, Asy, Azy);
  p.hyy = form(Asy, Azy, Asy, Azy);
  return p;
}

template <class T>
T pi_inverse_t(const GasModel& m, const T& a) {
  const double c0sq = m.c0() * m.c0();
  if (m.isothermal()) {
    return m.rho0() * detail::exp(a / c0sq);
  }
  const double gm1 = m.gamma() - 1.0;
  const T base = 1.0 + gm1 * a / c0sq;
  if (!(detail::value(base) > 0.0)) {
    throw VacuumError("vacuum in the elliptic region");
  }
  return m.rho0() * detail::pow(base, 1.0 / gm1);
}

enum class RowKind { interior, arc_L, arc_R, wall, shock };

struct Scales {
  double c2;
  double c;
  double flux;
};

Scales scales(const WavePattern& p) {
  return {p.R.c * p.R.c, p.R.c, p.I.rho * p.R.c};
}

// Problem data shared by every row evaluation.
struct RowContext {
  const WavePattern& pattern;
  const GridMapping& mapping;
  std::span<const double> chi_old;
  Scales sc;
  double arc_coeff;  // (1 - eps) / (2 + (gamma - 1)(1 - eps))
};

RowContext make_context(const WavePattern& p, const GridMapping& m, std::span<const double> chi_old) {
  const double eps = p.epsilon;
  const double gm1 = p.model.gamma() - 1.0;
  return {p, m, chi_old, scales(p), (1.0 - eps) / (2.0 + gm1 * (1.0 - eps))};
}

template <class T>
T condition(const RowContext& ctx, RowKind kind, int i, int j, const T& psi_here,
            const PhysDerivs<T>& d) {
  const NodeGeometry& g = ctx.mapping.node(i, j);
  const GasModel& m = ctx.pattern.model;
  const double c0sq = m.c0() * m.c0();
  const double gm1 = m.gamma() - 1.0;
  const double chi_old = ctx.chi_old[ctx.mapping.index(i, j)];
  const T zx = d.gx - g.xi.x;
  const T zy = d.gy - g.xi.y;
  const T zsq = zx * zx + zy * zy;
  switch (kind) {
    case RowKind::interior: {
      const T c2 = c0sq - gm1 * (chi_old + 0.5 * zsq);
      return ((c2 - zx * zx) * d.hxx - 2.0 * zx * zy * d.hxy + (c2 - zy * zy) * d.hyy) / ctx.sc.c2;
    }
    case RowKind::arc_L:
    case RowKind::arc_R:
      return (0.5 * zsq + ctx.arc_coeff * (gm1 * chi_old - c0sq)) / ctx.sc.c2;
    case RowKind::wall:
      return d.gy / ctx.sc.c;
    case RowKind::shock: {
      const FlowState& I = ctx.pattern.I;
      const T chi = psi_here - 0.5 * norm_sq(g.xi);
      const T rho = pi_inverse_t(m, -chi - 0.5 * zsq);
      const double zIx = I.v.x - g.xi.x;
      const double zIy = I.v.y - g.xi.y;
      const T nx = I.v.x - d.gx;
      const T ny = I.v.y - d.gy;
      const T nn = detail::sqrt(nx * nx + ny * ny);
      return ((rho * zx - I.rho * zIx) * nx + (rho * zy - I.rho * zIy) * ny) / nn / ctx.sc.flux;
    }
  }
  return T(0.0);
}

// Boundary conditions that apply at node (i, j); corners carry two.
int kinds_at(const GridMapping& m, int i, int j, RowKind (&out)[2]) {
  const int ns = m.n_sigma();
  const int nz = m.n_zeta();
  int n = 0;
  const bool left = i == 0, right = i == ns - 1, bottom = j == 0, top = j == nz - 1;
  if (left) out[n++] = RowKind::arc_L;
  if (right) out[n++] = RowKind::arc_R;
  if (bottom && n < 2) out[n++] = RowKind::wall;
  if (top && n < 2) out[n++] = RowKind::shock;
  if (n == 0) out[n++] = RowKind::interior;
  return n;
}

struct RowEval {
  D9 value;
  std::size_t cols[9];
  int center_slot;
  RowKind kinds[2];
  int n_kinds;
  double parts[2];
};

RowEval evaluate_row(const RowContext& ctx, std::span<const double> psi, int i, int j) {
  const GridMapping& m = ctx.mapping;
  const Window ws = window(i, m.n_sigma());
  const Window wz = window(j, m.n_zeta());
  RowEval r{};
  D9 V[3][3];
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const std::size_t col = m.index(ws.base + a, wz.base + b);
      r.cols[a * 3 + b] = col;
      V[a][b] = D9::seed(psi[col], a * 3 + b);
    }
  }
  r.center_slot = ws.pos * 3 + wz.pos;
  const double hs = 1.0 / (m.n_sigma() - 1);
  const double hz = 1.0 / (m.n_zeta() - 1);
  const PhysDerivs<D9> d = physical(m.node(i, j), param_derivs(V, ws.pos, wz.pos, hs, hz));
  r.n_kinds = kinds_at(m, i, j, r.kinds);
  const D9& here = V[ws.pos][wz.pos];
  if (r.n_kinds == 1) {
    r.value = condition(ctx, r.kinds[0], i, j, here, d);
    r.parts[0] = r.value.v;
    return r;
  }
  // Corner: stationarity of the squared residuals in the corner unknown,
  // with the weights frozen at the current iterate.
  const D9 a = condition(ctx, r.kinds[0], i, j, here, d);
  const D9 b = condition(ctx, r.kinds[1], i, j, here, d);
  r.parts[0] = a.v;
  r.parts[1] = b.v;
  const double wa = a.d[r.center_slot];
  const double wb = b.d[r.center_slot];
  const double norm = std::hypot(wa, wb);
  r.value = norm > 0.0 ? (wa / norm) * a + (wb / norm) * b : a;
  return r;
}

void check_lattice(int n_sigma, int n_zeta) {
  if (n_sigma < 5) {
    throw ConfigError("sigma_nodes", "needs at least 5 nodes");
  }
  if (n_zeta < 5) {
    throw ConfigError("zeta_nodes", "needs at least 5 nodes");
  }
}

}  // namespace

GridMapping::GridMapping(const WavePattern& pattern, ShockCurve shock, int n_sigma, int n_zeta)
    : vLx_(pattern.L.v.x),
      rL_(pattern.arc_L.radius),
      rR_(pattern.arc_R.radius),
      etaL_(pattern.eta_L_star),
      etaR_(pattern.eta_R_star),
      n_sigma_(n_sigma),
      n_zeta_(n_zeta),
      shock_(std::move(shock)) {
  check_lattice(n_sigma, n_zeta);
  if (static_cast<int>(shock_.s.size()) != n_sigma) {
    throw MappingError("shock curve has " + std::to_string(shock_.s.size()) + " heights for " +
                       std::to_string(n_sigma) + " sigma nodes");
  }
  nodes_.resize(static_cast<std::size_t>(n_sigma) * n_zeta);
  for (int i = 0; i < n_sigma; ++i) {
    if (!(shock_.s[i] > 0.0)) {
      throw MappingError("shock touches the wall at sigma node " + std::to_string(i));
    }
    for (int j = 0; j < n_zeta; ++j) {
      const double eta = zeta(j) * shock_.s[i];
      nodes_[index(i, j)].xi = Vec2{level_x(sigma(i), eta), eta};
    }
  }
  const double hs = 1.0 / (n_sigma - 1);
  const double hz = 1.0 / (n_zeta - 1);
  for (int i = 0; i < n_sigma; ++i) {
    const Window ws = window(i, n_sigma);
    for (int j = 0; j < n_zeta; ++j) {
      const Window wz = window(j, n_zeta);
      double X[3][3];
      double Y[3][3];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const Vec2 p = nodes_[index(ws.base + a, wz.base + b)].xi;
          X[a][b] = p.x;
          Y[a][b] = p.y;
        }
      }
      const auto dx = param_derivs(X, ws.pos, wz.pos, hs, hz);
      const auto dy = param_derivs(Y, ws.pos, wz.pos, hs, hz);
      NodeGeometry& g = nodes_[index(i, j)];
      g.xs = dx.s;
      g.xz = dx.z;
      g.ys = dy.s;
      g.yz = dy.z;
      g.xpp = {dx.ss, dx.sz, dx.zz};
      g.ypp = {dy.ss, dy.sz, dy.zz};
      if (!(g.det() > 0.0)) {
        throw MappingError("degenerate Jacobian " + std::to_string(g.det()) + " at node (" +
                           std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

double GridMapping::arc_x_L(double eta) const {
  // Circle up to the target corner height, tangent line beyond.
  if (eta <= etaL_) {
    return vLx_ - std::sqrt(rL_ * rL_ - eta * eta);
  }
  const double root = std::sqrt(rL_ * rL_ - etaL_ * etaL_);
  return vLx_ - root + (etaL_ / root) * (eta - etaL_);
}

double GridMapping::arc_x_R(double eta) const {
  if (eta <= etaR_) {
    return std::sqrt(rR_ * rR_ - eta * eta);
  }
  const double root = std::sqrt(rR_ * rR_ - etaR_ * etaR_);
  return root - (etaR_ / root) * (eta - etaR_);
}

double GridMapping::level_x(double sigma, double eta) const {
  const double xL0 = vLx_ - rL_;
  const double xR0 = rR_;
  const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * sigma));
  return (1.0 - sigma) * xL0 + sigma * xR0 + (1.0 - w) * (arc_x_L(eta) - xL0) +
         w * (arc_x_R(eta) - xR0);
}

double GridMapping::min_det() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& n : nodes_) {
    m = std::min(m, n.det());
  }
  return m;
}

void EllipticConfig::validate() const {
  check_lattice(sigma_nodes, zeta_nodes);
  if (!(tol_inner > 0.0)) throw ConfigError("tol_inner", "must be positive");
  if (!(tol_outer > 0.0)) throw ConfigError("tol_outer", "must be positive");
  if (!(omega_relax > 0.0 && omega_relax <= 1.0)) {
    throw ConfigError("omega_relax", "must lie in (0, 1]");
  }
  if (max_outer < 1) throw ConfigError("max_outer", "must be at least 1");
  if (max_inner < 1) throw ConfigError("max_inner", "must be at least 1");
  if (!(corner_escape > 0.0)) throw ConfigError("corner_escape", "must be positive");
}

double ResidualReport::combined() const {
  return interior + arc_L + arc_R + wall + shock_flux + shock_match + corner;
}

std::vector<double> chi_of_psi(const GridMapping& mapping, std::span<const double> psi) {
  std::vector<double> chi(psi.begin(), psi.end());
  for (int i = 0; i < mapping.n_sigma(); ++i) {
    for (int j = 0; j < mapping.n_zeta(); ++j) {
      chi[mapping.index(i, j)] -= 0.5 * norm_sq(mapping.node(i, j).xi);
    }
  }
  return chi;
}

ResidualReport residuals(const WavePattern& pattern, const GridMapping& mapping,
                         std::span<const double> psi, std::span<const double> chi_old) {
  const RowContext ctx = make_context(pattern, mapping, chi_old);
  ResidualReport r;
  for (int i = 0; i < mapping.n_sigma(); ++i) {
    for (int j = 0; j < mapping.n_zeta(); ++j) {
      const RowEval e = evaluate_row(ctx, psi, i, j);
      if (e.n_kinds == 2) {
        r.corner = std::max(r.corner, std::abs(e.value.v));
        r.corner_mismatch =
            std::max({r.corner_mismatch, std::abs(e.parts[0]), std::abs(e.parts[1])});
        continue;
      }
      for (int k = 0; k < e.n_kinds; ++k) {
        const double v = std::abs(e.parts[k]);
        switch (e.kinds[k]) {
          case RowKind::interior: r.interior = std::max(r.interior, v); break;
          case RowKind::arc_L: r.arc_L = std::max(r.arc_L, v); break;
          case RowKind::arc_R: r.arc_R = std::max(r.arc_R, v); break;
          case RowKind::wall: r.wall = std::max(r.wall, v); break;
          case RowKind::shock: r.shock_flux = std::max(r.shock_flux, v); break;
        }
      }
    }
  }
  const int top = mapping.n_zeta() - 1;
  for (int i = 0; i < mapping.n_sigma(); ++i) {
    const Vec2 x = mapping.node(i, top).xi;
    const double mismatch = psi[mapping.index(i, top)] - pattern.psi_I(x);
    r.shock_match = std::max(r.shock_match, std::abs(mismatch) / ctx.sc.c2);
  }
  return r;
}

namespace {

struct BandSystem {
  int n = 0;
  int kl = 0;
  int ku = 0;
  int ldab = 0;
  std::vector<double> ab;

  BandSystem(int size, int band) : n(size), kl(band), ku(band), ldab(2 * band + band + 1) {
    ab.assign(static_cast<std::size_t>(ldab) * n, 0.0);
  }
  void add(int row, int col, double v) {
    ab[static_cast<std::size_t>(kl + ku + row - col) + static_cast<std::size_t>(col) * ldab] += v;
  }
  // Solves in place; returns false when the matrix is singular.
  bool solve(std::vector<double>& rhs) {
    std::vector<lapack_int> ipiv(n);
    const lapack_int info =
        LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, kl, ku, 1, ab.data(), ldab, ipiv.data(), rhs.data(), n);
    return info == 0;
  }
};

double assemble(const RowContext& ctx, std::span<const double> psi, BandSystem* sys,
                std::vector<double>& residual) {
  const GridMapping& m = ctx.mapping;
  double worst = 0.0;
  for (int i = 0; i < m.n_sigma(); ++i) {
    for (int j = 0; j < m.n_zeta(); ++j) {
      const RowEval e = evaluate_row(ctx, psi, i, j);
      const auto row = static_cast<int>(m.index(i, j));
      residual[row] = e.value.v;
      worst = std::max(worst, std::abs(e.value.v));
      if (sys) {
        for (int k = 0; k < 9; ++k) {
          sys->add(row, static_cast<int>(e.cols[k]), e.value.d[k]);
        }
      }
    }
  }
  return worst;
}

}  // namespace

FixedBoundaryResult solve_fixed_boundary(const WavePattern& pattern, const GridMapping& mapping,
                                         std::span<const double> chi_old,
                                         std::vector<double> psi_start,
                                         const EllipticConfig& config) {
  if (psi_start.size() != mapping.size() || chi_old.size() != mapping.size()) {
    throw DomainError("field size does not match the lattice");
  }
  const RowContext ctx = make_context(pattern, mapping, chi_old);
  FixedBoundaryResult out;
  out.psi = std::move(psi_start);

  // Frozen-coefficient ellipticity at the starting field.
  {
    const auto states = node_states(pattern, mapping, out.psi);
    const GasModel& mdl = pattern.model;
    for (int i = 1; i + 1 < mapping.n_sigma() && !out.ellipticity_lost; ++i) {
      for (int j = 1; j + 1 < mapping.n_zeta(); ++j) {
        const NodeGeometry& g = mapping.node(i, j);
        const Vec2 z = states[mapping.index(i, j)].v - g.xi;
        const double c2 = mdl.c0() * mdl.c0() -
                          (mdl.gamma() - 1.0) * (chi_old[mapping.index(i, j)] + 0.5 * norm_sq(z));
        if (!(norm_sq(z) < c2)) {
          out.ellipticity_lost = true;
          out.lost_i = i;
          out.lost_j = j;
          break;
        }
      }
    }
  }

  const int n = static_cast<int>(mapping.size());
  const int band = 2 * mapping.n_zeta() + 2;
  std::vector<double> res(n);
  std::vector<double> trial_res(n);
  double previous_update = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int it = 0; it < config.max_inner; ++it) {
    BandSystem sys(n, band);
    const double r0 = assemble(ctx, out.psi, &sys, res);
    out.newton_steps = it;
    if (r0 < 1e-15) {
      out.last_update = 0.0;
      return out;
    }
    std::vector<double> delta(res);
    if (!sys.solve(delta)) {
      throw InnerSolveError("singular Newton matrix at step " + std::to_string(it));
    }
    // Backtrack on the max-norm residual.
    double lambda = 1.0;
    std::vector<double> trial(n);
    for (int k = 0; k < 7; ++k) {
      for (int q = 0; q < n; ++q) trial[q] = out.psi[q] - lambda * delta[q];
      double r1 = std::numeric_limits<double>::infinity();
      try {
        r1 = assemble(ctx, trial, nullptr, trial_res);
      } catch (const VacuumError&) {
      }
      if (r1 < r0 || k == 6) {
        break;
      }
      lambda *= 0.5;
    }
    double update = 0.0;
    for (int q = 0; q < n; ++q) update = std::max(update, std::abs(lambda * delta[q]));
    update /= ctx.sc.c2;
    out.psi.swap(trial);
    out.newton_steps = it + 1;
    out.last_update = update;
    if (!std::isfinite(update)) {
      throw InnerSolveError("non-finite Newton update");
    }
    if (update < config.tol_inner) {
      return out;
    }
    growth = update > previous_update ? growth + 1 : 0;
    if (growth >= 5) {
      throw InnerSolveError("Newton updates grew for five consecutive steps (last " +
                            std::to_string(update) + ")");
    }
    previous_update = update;
  }
  if (out.last_update > std::sqrt(config.tol_inner)) {
    throw InnerSolveError("Newton did not converge in " + std::to_string(config.max_inner) +
                          " steps (last update " + std::to_string(out.last_update) + ")");
  }
  return out;
}

ShockCurve update_shock(const WavePattern& pattern, const GridMapping& mapping,
                        std::span<const double> psi, double omega, double corner_escape) {
  const int top = mapping.n_zeta() - 1;
  const double psi0 = pattern.psi_I(Vec2{0.0, 0.0});
  const double vIy = pattern.I.v.y;
  ShockCurve next;
  next.s.resize(mapping.n_sigma());
  for (int i = 0; i < mapping.n_sigma(); ++i) {
    const double target = (psi[mapping.index(i, top)] - psi0) / vIy;
    next.s[i] = (1.0 - omega) * mapping.shock().s[i] + omega * target;
    if (!(next.s[i] > 0.0)) {
      throw CornerEscapeError("shock reaches the wall at sigma node " + std::to_string(i));
    }
  }
  const double window = corner_escape * std::sqrt(std::max(pattern.epsilon, 1e-6)) * pattern.R.c;
  auto check = [&](const char* name, Vec2 corner, Vec2 target) {
    const double dist = distance(corner, target);
    if (dist > window) {
      throw CornerEscapeError(std::string(name) + " corner left its arc window: distance " +
                              std::to_string(dist) + " > " + std::to_string(window));
    }
  };
  const int last = mapping.n_sigma() - 1;
  check("L", Vec2{mapping.level_x(0.0, next.s[0]), next.s[0]}, pattern.xi_L_star);
  check("R", Vec2{mapping.level_x(1.0, next.s[last]), next.s[last]}, pattern.xi_R_star);
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= last; ++i) {
    const double x = mapping.level_x(mapping.sigma(i), next.s[i]);
    if (!(x > prev)) {
      throw MappingError("shock is no longer a graph over the wall at sigma node " +
                         std::to_string(i));
    }
    prev = x;
  }
  return next;
}

std::vector<double> blended_psi(const WavePattern& pattern, const GridMapping& mapping) {
  std::vector<double> psi(mapping.size());
  const int top = mapping.n_zeta() - 1;
  for (int i = 0; i < mapping.n_sigma(); ++i) {
    const double sg = mapping.sigma(i);
    auto blend = [&](Vec2 x) { return (1.0 - sg) * pattern.psi_L(x) + sg * pattern.psi_R(x); };
    const Vec2 xs = mapping.node(i, top).xi;
    const double lift = pattern.psi_I(xs) - blend(xs);
    for (int j = 0; j <= top; ++j) {
      const double zt = mapping.zeta(j);
      psi[mapping.index(i, j)] = blend(mapping.node(i, j).xi) + zt * zt * lift;
    }
  }
  return psi;
}

InitialGuess initial_guess(const WavePattern& pattern, int n_sigma, int n_zeta) {
  check_lattice(n_sigma, n_zeta);
  const Vec2 a = pattern.xi_L_star;
  const Vec2 b = pattern.xi_R_star;
  ShockCurve linear;
  linear.s.resize(n_sigma);
  for (int i = 0; i < n_sigma; ++i) {
    const double sg = static_cast<double>(i) / (n_sigma - 1);
    linear.s[i] = (1.0 - sg) * a.y + sg * b.y;
  }
  const GridMapping provisional(pattern, linear, n_sigma, n_zeta);
  ShockCurve chord = linear;
  const double slope = (b.y - a.y) / (b.x - a.x);
  const double lo = std::min(a.y, b.y);
  const double hi = std::max(a.y, b.y);
  for (int i = 1; i + 1 < n_sigma && hi > lo; ++i) {
    const double sg = provisional.sigma(i);
    auto gap = [&](double s) { return s - a.y - slope * (provisional.level_x(sg, s) - a.x); };
    if (gap(lo) * gap(hi) <= 0.0) {
      chord.s[i] = detail::bracketed_root(gap, lo, hi);
    }
  }
  InitialGuess g;
  g.shock = chord;
  g.psi = blended_psi(pattern, GridMapping(pattern, chord, n_sigma, n_zeta));
  return g;
}

std::vector<NodeState> node_states(const WavePattern& pattern, const GridMapping& mapping,
                                   std::span<const double> psi) {
  std::vector<NodeState> out(mapping.size());
  const GasModel& m = pattern.model;
  const double hs = 1.0 / (mapping.n_sigma() - 1);
  const double hz = 1.0 / (mapping.n_zeta() - 1);
  for (int i = 0; i < mapping.n_sigma(); ++i) {
    const Window ws = window(i, mapping.n_sigma());
    for (int j = 0; j < mapping.n_zeta(); ++j) {
      const Window wz = window(j, mapping.n_zeta());
      double V[3][3];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          V[a][b] = psi[mapping.index(ws.base + a, wz.base + b)];
        }
      }
      const NodeGeometry& g = mapping.node(i, j);
      const auto d = physical(g, param_derivs(V, ws.pos, wz.pos, hs, hz));
      NodeState& s = out[mapping.index(i, j)];
      s.v = Vec2{d.gx, d.gy};
      const Vec2 z = s.v - g.xi;
      const double chi = psi[mapping.index(i, j)] - 0.5 * norm_sq(g.xi);
      const double a = -chi - 0.5 * norm_sq(z);
      const double c2 = sound_speed_sq_of_pi(m, a);
      try {
        s.rho = pi_inverse(m, a);
      } catch (const VacuumError&) {
        s.rho = 0.0;
      }
      s.L2 = c2 > 0.0 ? norm_sq(z) / c2 : std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

EllipticSolution iterate(const WavePattern& pattern, const EllipticConfig& config,
                         std::optional<InitialGuess> start) {
  config.validate();
  if (!(pattern.epsilon > 0.0)) {
    throw ConfigError("epsilon", "the elliptic iteration needs epsilon > 0");
  }
  InitialGuess guess = initial_guess(pattern, config.sigma_nodes, config.zeta_nodes);
  std::optional<GridMapping> mapping;
  std::vector<double> psi;
  if (start) {
    mapping.emplace(pattern, start->shock, config.sigma_nodes, config.zeta_nodes);
    psi = start->psi.empty() ? blended_psi(pattern, *mapping) : start->psi;
    if (psi.size() != mapping->size()) {
      throw DomainError("starting field does not match the lattice");
    }
  } else {
    mapping.emplace(pattern, guess.shock, config.sigma_nodes, config.zeta_nodes);
    psi = std::move(guess.psi);
  }

  EllipticSolution best{*mapping, psi, {}, {}, {}, false, false, separation_check(pattern) <= 0.0, {}};
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> history;
  bool converged = false;
  std::string failure;
  try {
    for (int k = 1; k <= config.max_outer; ++k) {
      const std::vector<double> chi_old = chi_of_psi(*mapping, psi);
      FixedBoundaryResult fb = solve_fixed_boundary(pattern, *mapping, chi_old, psi, config);
      const std::vector<double> chi_new = chi_of_psi(*mapping, fb.psi);
      IterationRecord rec;
      rec.iter = k;
      rec.residual = residuals(pattern, *mapping, fb.psi, chi_new);
      const auto states = node_states(pattern, *mapping, fb.psi);
      for (int i = 1; i + 1 < mapping->n_sigma(); ++i) {
        for (int j = 1; j + 1 < mapping->n_zeta(); ++j) {
          rec.max_L2_interior = std::max(rec.max_L2_interior, states[mapping->index(i, j)].L2);
        }
      }
      const bool done = rec.residual.combined() < config.tol_outer;
      std::optional<ShockCurve> next;
      if (!done) {
        next = update_shock(pattern, *mapping, fb.psi, config.omega_relax, config.corner_escape);
        for (std::size_t i = 0; i < next->s.size(); ++i) {
          rec.shock_change =
              std::max(rec.shock_change, std::abs(next->s[i] - mapping->shock().s[i]) / pattern.R.c);
        }
      }
      history.push_back(rec);
      if (rec.residual.combined() < best_score) {
        best_score = rec.residual.combined();
        best.mapping = *mapping;
        best.psi = fb.psi;
        best.residual = rec.residual;
      }
      if (done) {
        converged = true;
        break;
      }
      mapping.emplace(pattern, std::move(*next), config.sigma_nodes, config.zeta_nodes);
      psi = std::move(fb.psi);
    }
    if (!converged) {
      failure = "no convergence in " + std::to_string(config.max_outer) + " outer iterations";
    }
  } catch (const Error& e) {
    failure = e.what();
  }
  best.history = std::move(history);
  best.converged = converged;
  best.diverged = !converged;
  best.failure = failure;
  best.states = node_states(pattern, best.mapping, best.psi);
  return best;
}

ContinuationResult solve_with_continuation(const ProblemConfig& problem,
                                           const EllipticConfig& config, double eps_start) {
  WavePattern pattern = build(problem);
  EllipticSolution direct = iterate(pattern, config);
  if (direct.converged || !(problem.epsilon < eps_start)) {
    return {std::move(pattern), std::move(direct), {problem.epsilon}};
  }
  std::vector<double> steps;
  for (double e = eps_start; e > 1.5 * problem.epsilon; e *= 0.5) steps.push_back(e);
  steps.push_back(problem.epsilon);
  std::vector<double> path;
  std::optional<InitialGuess> start;
  for (std::size_t k = 0;; ++k) {
    ProblemConfig step = problem;
    step.epsilon = steps[k];
    WavePattern p = build(step);
    EllipticSolution sol = iterate(p, config, start);
    path.push_back(steps[k]);
    if (!sol.converged || k + 1 == steps.size()) {
      return {std::move(p), std::move(sol), std::move(path)};
    }
    start = InitialGuess{sol.mapping.shock(), sol.psi};
  }
}

double coarse_interior_residual(const WavePattern& pattern, const GridMapping& mapping,
                                std::span<const double> psi) {
  const std::vector<double> chi = chi_of_psi(mapping, psi);
  const RowContext ctx = make_context(pattern, mapping, chi);
  const double hs = 2.0 / (mapping.n_sigma() - 1);
  const double hz = 2.0 / (mapping.n_zeta() - 1);
  double worst = 0.0;
  for (int i = 2; i + 2 < mapping.n_sigma(); ++i) {
    for (int j = 2; j + 2 < mapping.n_zeta(); ++j) {
      double V[3][3];
      double X[3][3];
      double Y[3][3];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const int ii = i + 2 * (a - 1);
          const int jj = j + 2 * (b - 1);
          V[a][b] = psi[mapping.index(ii, jj)];
          X[a][b] = mapping.node(ii, jj).xi.x;
          Y[a][b] = mapping.node(ii, jj).xi.y;
        }
      }
      const auto dx = param_derivs(X, 1, 1, hs, hz);
      const auto dy = param_derivs(Y, 1, 1, hs, hz);
      NodeGeometry g = mapping.node(i, j);
      g.xs = dx.s;
      g.xz = dx.z;
      g.ys = dy.s;
      g.yz = dy.z;
      g.xpp = {dx.ss, dx.sz, dx.zz};
      g.ypp = {dy.ss, dy.sz, dy.zz};
      const auto d = physical(g, param_derivs(V, 1, 1, hs, hz));
      const double r = condition(ctx, RowKind::interior, i, j, psi[mapping.index(i, j)], d);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

void write_solution_csv(const EllipticSolution& sol, std::ostream& out) {
  out.precision(17);
  out << "sigma,zeta,xi,eta,psi,rho,vx,vy,L2\n";
  const GridMapping& m = sol.mapping;
  for (int i = 0; i < m.n_sigma(); ++i) {
    for (int j = 0; j < m.n_zeta(); ++j) {
      const std::size_t k = m.index(i, j);
      const Vec2 x = m.node(i, j).xi;
      const NodeState& s = sol.states[k];
      out << m.sigma(i) << ',' << m.zeta(j) << ',' << x.x << ',' << x.y << ',' << sol.psi[k] << ','
          << s.rho << ',' << s.v.x << ',' << s.v.y << ',' << s.L2 << '\n';
    }
  }
}

void write_shock_csv(const WavePattern& pattern, const EllipticSolution& sol, std::ostream& out) {
  out.precision(17);
  out << "xi,s,normal_angle\n";
  const GridMapping& m = sol.mapping;
  const int top = m.n_zeta() - 1;
  for (int i = 0; i < m.n_sigma(); ++i) {
    const Vec2 n = unit(pattern.I.v - sol.states[m.index(i, top)].v);
    out << m.node(i, top).xi.x << ',' << m.shock().s[i] << ',' << std::atan2(n.y, n.x) << '\n';
  }
}

void write_history_csv(const EllipticSolution& sol, std::ostream& out) {
  out.precision(10);
  out << "iter,r_interior,r_arcL,r_arcR,r_wall,r_shock\n";
  for (const auto& h : sol.history) {
    out << h.iter << ',' << h.residual.interior << ',' << h.residual.arc_L << ','
        << h.residual.arc_R << ',' << h.residual.wall << ',' << h.residual.shock() << '\n';
  }
}

EllipticSolution read_solution_csv(const WavePattern& pattern, std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("sigma,zeta", 0) != 0) {
    throw DomainError("not an elliptic node CSV");
  }
  std::map<double, int> sigmas;
  std::map<double, int> zetas;
  struct Row {
    double sigma, zeta, eta, psi;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double v[9];
    for (int k = 0; k < 9; ++k) {
      if (!std::getline(ss, cell, ',')) {
        throw DomainError("short row in elliptic node CSV");
      }
      v[k] = std::stod(cell);
    }
    rows.push_back({v[0], v[1], v[3], v[4]});
    sigmas[v[0]] = 0;
    zetas[v[1]] = 0;
  }
  const int ns = static_cast<int>(sigmas.size());
  const int nz = static_cast<int>(zetas.size());
  if (static_cast<std::size_t>(ns) * nz != rows.size()) {
    throw DomainError("elliptic node CSV is not a full lattice");
  }
  ShockCurve shock;
  shock.s.resize(ns);
  std::vector<double> psi(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int i = static_cast<int>(k) / nz;
    const int j = static_cast<int>(k) % nz;
    psi[k] = rows[k].psi;
    if (j == nz - 1) shock.s[i] = rows[k].eta;
  }
  GridMapping mapping(pattern, shock, ns, nz);
  EllipticSolution sol{mapping, psi, {}, {}, {}, false, false, false, {}};
  sol.residual = residuals(pattern, mapping, psi, chi_of_psi(mapping, psi));
  sol.converged = sol.residual.combined() < 1e-6;
  sol.diverged = !sol.converged;
  sol.states = node_states(pattern, mapping, psi);
  return sol;
}

}  // namespace wedge
