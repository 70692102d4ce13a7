// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status
// is the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "wedge/diagnostics.hpp"
#include "wedge/elliptic_fixer.hpp"
#include "wedge/errors.hpp"
#include "wedge/shock_algebra.hpp"
#include "wedge/unsteady_solver.hpp"
#include "wedge/wave_pattern.hpp"

using namespace wedge;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kGammas[] = {1.0, 1.4, 5.0 / 3.0, 3.0};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void run(const char* name, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = Clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  if (!v.pass) ++failures;
  std::printf("%s %s:%s (%.1f s)\n", v.pass ? "PASS" : "FAIL", name, v.detail.str().c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

ProblemConfig wedge_case(double epsilon) {
  ProblemConfig c;
  c.gamma = 1.4;
  c.M_I = 2.94;
  c.tau = 10.0 * kDeg;
  c.epsilon = epsilon;
  return c;
}

ProblemConfig standard_case(double gamma, double MIy, double epsilon = 0.04) {
  ProblemConfig c;
  c.gamma = gamma;
  c.MIy = MIy;
  c.epsilon = epsilon;
  return c;
}

// ---------------------------------------------------------------------------
// Shock algebra

void shock_algebra_exactness(Verdict& v) {
  std::mt19937_64 rng(20261014);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> lun(1.0001, 10.0);
  double g_res = 0.0, inverse = 0.0, flux = 0.0;
  const auto t0 = Clock::now();
  for (int k = 0; k < 200; ++k) {
    const double gamma = kGammas[pick(rng)];
    const double Lun = lun(rng);
    const double Ldn = downstream_normal_mach(gamma, Lun);
    g_res = std::max(g_res, oracle::rel_err(oracle::g(gamma, Ldn), oracle::g(gamma, Lun)));
    inverse = std::max(inverse, oracle::rel_err(downstream_normal_mach(gamma, Ldn), Lun));
    const GasModel m(gamma, 1.0, 1.0);
    const JumpState j = jump_state(m, 1.0, 1.0, Lun);
    flux = std::max(flux, oracle::rel_err(j.rho_d * Ldn * j.c_d, Lun));
  }
  const double elapsed = seconds_since(t0);
  v.detail << " g_residual=" << g_res << " self_inverse=" << inverse << " mass_flux=" << flux
           << " runtime=" << elapsed << "s";
  v.require(g_res < 1e-10, "g residual < 1e-10");
  v.require(inverse < 1e-8, "self-inverse < 1e-8");
  v.require(flux < 1e-10, "mass flux < 1e-10");
  v.require(elapsed < 1.0, "runtime < 1 s");
}

// Relative error, absolute below 1e-3: at gamma = 3 the normal derivative
// vanishes identically.
double floored_rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-3); }

// Normal shock at fixed rho_u = c_u = 1 parameterized by z_u^n, solved from
// mass and Bernoulli balance.
struct NormalJump {
  double rho_d, c_d, z_d;
};

NormalJump normal_jump(double gamma, double rho_u, double c_u, double z_u) {
  const double r = oracle::density_ratio(gamma, c_u, z_u);
  return {rho_u * r, c_u * std::pow(r, 0.5 * (gamma - 1.0)), z_u / r};
}

// Shock through the R arc at height eta with upstream I and downstream
// pseudo-Mach sqrt(1 - eps); the normal angle is found by bisection.
struct CornerPoint {
  Vec2 xi;
  Vec2 v_d;
  double c_d;
};

CornerPoint corner_family(const WavePattern& p, double eta, double eps) {
  const double gamma = p.model.gamma();
  const Vec2 xi{std::sqrt((1.0 - eps) * p.R.c * p.R.c - eta * eta), eta};
  const auto downstream = [&](double alpha, double* c_d) {
    const Vec2 n{std::sin(alpha), -std::cos(alpha)};
    const Vec2 t = perp(n);
    const Vec2 z_u = p.I.v - xi;
    const NormalJump j = normal_jump(gamma, p.I.rho, p.I.c, dot(z_u, n));
    *c_d = j.c_d;
    return dot(z_u, t) * t + j.z_d * n;
  };
  const auto mismatch = [&](double alpha) {
    double c_d = 0.0;
    const Vec2 z = downstream(alpha, &c_d);
    return norm_sq(z) - (1.0 - eps) * c_d * c_d;
  };
  double lo = -1e-3, hi = 1e-3;
  while ((mismatch(lo) < 0.0) == (mismatch(hi) < 0.0)) {
    lo *= 2.0;
    hi *= 2.0;
  }
  const double alpha = oracle::bisect(mismatch, lo, hi, 1e-16);
  double c_d = 0.0;
  const Vec2 z = downstream(alpha, &c_d);
  return {xi, z + xi, c_d};
}

void sensitivity_formulas(Verdict& v) {
  const auto t0 = Clock::now();
  constexpr double kTol = 1e-5;
  double worst_normal = 0.0, worst_corner = 0.0;

  // Normal-shock family at rho_u = c_u = 1.
  for (double gamma : {1.0, 1.2, 1.4, 5.0 / 3.0, 3.0}) {
    for (double Lun : {1.5, 4.0}) {
      const Sensitivities s = sensitivities(gamma, Lun);
      const double h = 1e-5 * Lun;
      const auto z_d = [&](double z) { return normal_jump(gamma, 1.0, 1.0, z).z_d; };
      const auto L_d = [&](double z) {
        const NormalJump j = normal_jump(gamma, 1.0, 1.0, z);
        return j.z_d / j.c_d;
      };
      // sigma lowers z_u^n one for one.
      const auto rho_d = [&](double sigma) { return normal_jump(gamma, 1.0, 1.0, Lun - sigma).rho_d; };
      const double fd_dz = oracle::central(z_d, Lun, h);
      const double fd_dL = oracle::central(L_d, Lun, h);
      const double fd_drho = oracle::central(rho_d, 0.0, h);
      worst_normal = std::max({worst_normal, floored_rel(s.dzdn_dzun, fd_dz),
                               floored_rel(s.dLdn_dLun, fd_dL), floored_rel(s.drho_d_dsigma, fd_drho)});
      const double bound = (gamma - 1.0) / (gamma + 1.0);
      v.require(s.scaled_dzdn_dzun < bound, "scaled normal derivative below (g-1)/(g+1)");
      v.require(s.dvdn_dsigma > s.dvdn_dsigma_lower_bound, "normal velocity derivative above 2/(g+1)");
      v.require(s.drho_d_dsigma < 0.0, "downstream density falls with sigma");
    }
  }

  // Corner family along the R arc.
  for (double gamma : {1.0, 1.2, 1.4, 5.0 / 3.0, 3.0}) {
    for (double MIy : {-1.5, -3.0}) {
      const WavePattern p = build(standard_case(gamma, MIy));
      const CornerSensitivity s = corner_sensitivity(p);
      // The closed forms drop O(eps) terms, which would swamp d(z^y) where it
      // nearly vanishes; a smaller eps keeps the comparison at truncation level.
      constexpr double eps = 1e-8;
      const double h = 1e-6 * p.R.c;
      const ArcConstants K = arc_constants(gamma, eps, p.R.c);
      const double k_scale = K.sigma_g < 0.0 ? std::sqrt(-K.sigma_f / K.sigma_g) : 0.0;
      const CornerPoint up = corner_family(p, s.eta + h, eps);
      const CornerPoint dn = corner_family(p, s.eta - h, eps);
      const auto p_of = [](const CornerPoint& c) { return cross(c.xi, c.v_d - c.xi); };
      const auto k_of = [&](const CornerPoint& c) { return k_scale * (c.c_d * c.c_d - K.h0); };
      const double fd_v = (up.v_d.y - dn.v_d.y) / (2.0 * h);
      const double fd_z = ((up.v_d.y - up.xi.y) - (dn.v_d.y - dn.xi.y)) / (2.0 * h);
      const double fd_p = (p_of(up) - p_of(dn)) / (2.0 * h);
      worst_corner = std::max({worst_corner, oracle::rel_err(s.dvdy_domega, fd_v),
                               oracle::rel_err(s.dzdy_domega, fd_z), oracle::rel_err(s.p_omega, fd_p)});
      if (gamma > 1.0) {
        const double fd_k = (k_of(up) - k_of(dn)) / (2.0 * h);
        worst_corner = std::max(worst_corner, oracle::rel_err(s.k_omega, fd_k));
      } else {
        v.require(s.k_omega == 0.0, "k vanishes for gamma = 1");
      }
      v.require(s.dvdy_domega > 0.0, "corner v^y derivative positive");
      v.require(s.bound_lhs < s.bound_rhs, "corner (p, k) derivative bound");
    }
  }
  const double elapsed = seconds_since(t0);
  v.detail << " normal_family_rel=" << worst_normal << " corner_family_rel=" << worst_corner
           << " tol=" << kTol << " runtime=" << elapsed << "s";
  v.require(worst_normal < kTol, "normal-shock sensitivities within 1e-5");
  v.require(worst_corner < kTol, "corner sensitivities within 1e-5");
  v.require(elapsed < 10.0, "runtime < 10 s");
}

void polar_structure(Verdict& v) {
  const GasModel m(1.4, 1.0, 1.0);
  const FlowState up = FlowState::make(m, 1.0, {2.94, 0.0});
  const std::vector<double> grid = polar_beta_grid(up, {}, 10000);
  const std::vector<PolarSample> polar = shock_polar(m, up, {}, grid);
  // Along each half of the polar rho_d falls while L_d, z_d and v_d^x rise.
  int breaks = 0;
  for (std::size_t i = 1; i < polar.size(); ++i) {
    const bool upper = polar[i].beta > 0.0 && polar[i - 1].beta >= 0.0;
    const bool lower = polar[i].beta <= 0.0;
    const PolarSample& a = upper ? polar[i - 1] : polar[i];
    const PolarSample& b = upper ? polar[i] : polar[i - 1];
    if (!upper && !lower) continue;
    if (!(b.rho_d <= a.rho_d + 1e-12 && b.L_d >= a.L_d - 1e-12 && b.z_d >= a.z_d - 1e-12 &&
          b.downstream_v.x >= a.downstream_v.x - 1e-12)) {
      ++breaks;
    }
  }
  const auto sol = deflection_solutions(m, up, Radians{10.0 * kDeg});
  const double tau_star = critical_angle(m, up);
  const bool below = deflection_solutions(m, up, Radians{tau_star - 1e-10}).has_value();
  const bool above = deflection_solutions(m, up, Radians{tau_star + 1e-10}).has_value();
  v.detail << " beta_points=" << polar.size() << " monotonicity_breaks=" << breaks;
  v.require(breaks == 0, "polar monotone on each branch");
  v.require(sol.has_value(), "attached shocks at 10 deg");
  if (sol) {
    v.detail << " weak_M_d=" << sol->weak.mach_d << " strong_M_d=" << sol->strong.mach_d;
    v.require(sol->weak.supersonic && !sol->strong.supersonic, "weak supersonic, strong subsonic");
  }
  v.detail << " tau_star_deg=" << tau_star / kDeg;
  v.require(below && !above, "solution count flips across tau* within 1e-10");
}

void horizontal_shock_solver(Verdict& v) {
  const GasModel m(1.4, 1.0, 1.0);
  double worst_vy = 0.0;
  bool monotone = true;
  double prev = -INFINITY;
  for (int i = 0; i <= 200; ++i) {
    const double beta = -0.7 * i / 200.0;
    const HorizontalShock h = horizontal_downstream_shock(m, 1.0, -2.0, beta);
    worst_vy = std::max(worst_vy, std::abs(h.shock.downstream.v.y));
    monotone = monotone && h.eta0 > prev;
    prev = h.eta0;
  }
  const ProblemConfig base = standard_case(1.4, -2.0, 0.01);
  const double eta_R = build(base).eta_R_star;
  // Supersonicity of L is a separate condition; the solver must reach every height.
  BuildOptions geometry_only;
  geometry_only.enforce_supersonic = false;
  int gaps = 0, subsonic = 0;
  double worst_eta = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    ProblemConfig c = base;
    c.eta_L_star = eta_R * k / 1000.0;
    try {
      const WavePattern p = build(c, geometry_only);
      worst_eta = std::max(worst_eta, std::abs(p.eta_L_star - *c.eta_L_star));
      if (std::abs(p.shock_L.downstream.v.y) > 1e-10 * p.I.c) ++gaps;
      if (!(p.M_L > 1.0)) ++subsonic;
    } catch (const Error&) {
      ++gaps;
    }
  }
  v.detail << " max|v_d^y|=" << worst_vy << " eta0_monotone=" << monotone
           << " sweep_failures=" << gaps << "/1000 eta_L_error=" << worst_eta
           << " subsonic_L_samples=" << subsonic;
  v.require(worst_vy < 1e-10, "|v_d^y| < 1e-10 c_I");
  v.require(monotone, "eta0 monotone in beta");
  v.require(gaps == 0, "eta_L sweep without gaps");
}

// ---------------------------------------------------------------------------
// Unsteady run

void unsteady_run(Verdict& v) {
  std::map<int, WedgeRunResult> runs;
  for (int n : {100, 200, 400}) {
    SimConfig sim;
    sim.nx = n;
    sim.ny = n;
    runs.emplace(n, run_wedge(wedge_case(kDefaultEpsilon), sim));
  }
  const WedgeRunResult& r = runs.at(400);
  const double angle_err = std::abs(r.tip_fit.angle - r.predicted_angle) / kDeg;
  const double variation = std::max({r.probe_I.rho_rel_std, r.probe_I.speed_rel_std,
                                     r.probe_L.rho_rel_std, r.probe_L.speed_rel_std,
                                     r.probe_R.rho_rel_std, r.probe_R.speed_rel_std});
  const double d100 = runs.at(100).defect, d200 = runs.at(200).defect, d400 = r.defect;
  v.detail << " tip_angle_deg=" << r.tip_fit.angle / kDeg << " predicted=" << r.predicted_angle / kDeg
           << " probe_M_min=" << r.probe_L.M_min << " probe_L_min=" << r.probe_L.L_min
           << " region_variation=" << variation << " defect(100,200,400)=" << d100 << "," << d200
           << "," << d400 << " curl=" << r.max_curl_smooth;
  v.require(angle_err < 2.0, "tip angle within 2 deg");
  v.require(r.probe_L.M_min > 1.0 && r.probe_L.L_min > 1.0, "downstream of tip supersonic");
  v.require(variation < 0.01, "constant regions within 1%");
  v.require(d400 < 0.05, "self-similarity defect < 5%");
  v.require(d100 > d200 && d200 > d400, "defect decreases under refinement");
}

// ---------------------------------------------------------------------------
// Elliptic problem

EllipticConfig lattice(int n_sigma) {
  EllipticConfig e;
  e.sigma_nodes = n_sigma;
  e.zeta_nodes = (n_sigma + 1) / 2;
  return e;
}

bool passed(const Report& r, const std::string& name) {
  const auto it = std::find_if(r.begin(), r.end(), [&](const Check& c) { return c.name == name; });
  return it != r.end() && it->pass;
}

struct EpsilonRun {
  double epsilon;
  ContinuationResult result;
  VerifySummary summary;
};

std::vector<EpsilonRun> elliptic_runs;

const std::vector<EpsilonRun>& epsilon_runs() {
  if (elliptic_runs.empty()) {
    for (double eps : {0.04, 0.01, 0.0025}) {
      ContinuationResult r = solve_with_continuation(wedge_case(eps), lattice(129));
      VerifySummary s = verify_solution(r.pattern, r.solution);
      elliptic_runs.push_back({eps, std::move(r), std::move(s)});
    }
  }
  return elliptic_runs;
}

void elliptic_fixed_point(Verdict& v) {
  // Straight shock from a 1% bulge.
  const WavePattern flat = build(standard_case(1.0, -2.0, 0.04));
  const int n = 65;
  InitialGuess start;
  start.shock.s.assign(n, flat.eta_R_star);
  for (int i = 0; i < n; ++i) {
    start.shock.s[i] += 0.01 * flat.R.c * std::sin(std::numbers::pi * i / (n - 1));
  }
  const EllipticSolution back = iterate(flat, lattice(n), start);
  double drift = 0.0;
  for (double s : back.mapping.shock().s) drift = std::max(drift, std::abs(s - flat.eta_R_star));
  drift /= flat.R.c;
  v.detail << " unperturbed_drift=" << drift;
  v.require(back.converged && drift < 1e-6, "straight shock recovered within 1e-6");

  const EpsilonRun& run = epsilon_runs()[1];
  const EllipticSolution& sol = run.result.solution;
  const Report& rep = run.summary.report;
  v.detail << " eps=" << run.epsilon << " residual=" << sol.residual.combined()
           << " max_L2=" << run.summary.max_L2_off_arcs << " min_rho=" << run.summary.min_rho;
  v.require(sol.converged && sol.residual.combined() < 1e-6, "combined residual < 1e-6");
  v.require(passed(rep, "ellipticity_off_arcs"), "interior L^2 < 1 - eps + grid tol");
  v.require(passed(rep, "global_min_above_rho_I"), "min rho > rho_I");
  v.require(passed(rep, "corner_L_offset") && passed(rep, "corner_R_offset"), "corner offsets");
  for (const char* w : {"vx_lower", "vx_upper", "vx_L_picture_lower", "vx_L_picture_upper",
                        "shock_normal_window"}) {
    v.require(passed(rep, w), w);
  }
  v.require(passed(rep, "no_interior_or_wall_minima") && passed(rep, "shock_minima_pseudo_normal"),
            "density minimum pseudo-normal on the shock");
}

void weak_residual_scaling(Verdict& v) {
  std::vector<double> eps, weak;
  for (const EpsilonRun& r : epsilon_runs()) {
    v.require(r.result.solution.converged, "elliptic solve at every epsilon");
    eps.push_back(r.epsilon);
    weak.push_back(r.summary.weak);
  }
  const double slope = loglog_slope(eps, weak);
  v.detail << " weak(0.04,0.01,0.0025)=" << weak[0] << "," << weak[1] << "," << weak[2]
           << " slope=" << slope << " window=[0.3,0.7]";
  v.require(slope >= 0.3 && slope <= 0.7, "slope in [0.3, 0.7]");
}

void arc_ode_suite(Verdict& v) {
  // Stationary point of the (p, h) system: f(h0, 0) = 0.
  double analytic = 0.0, numeric = 0.0;
  for (double gamma : kGammas) {
    const ArcConstants k0 = arc_constants(gamma, 0.0, 1.1);
    analytic = std::max(analytic, std::abs(k0.h0 - k0.r * k0.r) / (k0.r * k0.r));
    constexpr double eps = 0.01;
    const ArcConstants k = arc_constants(gamma, eps, 1.1);
    const auto f = [&](double h) { return arc_f(k, gamma, eps, h, 0.0); };
    const double root = oracle::bisect(f, 0.9 * k.h0, 1.1 * k.h0, 1e-16);
    numeric = std::max(numeric, std::abs(root - k.h0) / k.h0);
  }
  v.detail << " stationary_eps0=" << analytic << " stationary_eps0.01=" << numeric;
  v.require(analytic < 1e-12, "h0 = r^2 at eps = 0");
  v.require(numeric < 1e-12, "numerical root at eps = 0.01");

  std::vector<double> root_eps, chi;
  for (const EpsilonRun& r : epsilon_runs()) {
    for (const char* side : {"arc_L_sector_exclusion", "arc_R_sector_exclusion"}) {
      v.require(passed(r.summary.report, side), std::string(side) + " at eps " + std::to_string(r.epsilon));
    }
    root_eps.push_back(std::sqrt(r.epsilon));
    chi.push_back(std::max(r.summary.chi_t_L, r.summary.chi_t_R));
  }
  const double slope = std::log(chi.front() / chi.back()) / std::log(root_eps.front() / root_eps.back());
  v.detail << " chi_t/c(0.04,0.0025)=" << chi.front() << "," << chi.back() << " slope=" << slope
           << " window=[0.3,3]";
  v.require(slope >= 0.3 && slope <= 3.0, "chi_t slope in [0.3, 3]");
}

}  // namespace

int main() {
  run("shock_algebra_exactness", shock_algebra_exactness);
  run("sensitivity_formulas", sensitivity_formulas);
  run("polar_structure", polar_structure);
  run("horizontal_shock_solver", horizontal_shock_solver);
  run("unsteady_wedge_run", unsteady_run);
  run("elliptic_fixed_point", elliptic_fixed_point);
  run("weak_residual_scaling", weak_residual_scaling);
  run("arc_ode_suite", arc_ode_suite);
  return failures;
}
