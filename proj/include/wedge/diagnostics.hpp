#pragma once

// Pure checks over computed fields. Every tolerance that depends on the
// lattice is C * spacing and is reported next to its verdict.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wedge/elliptic_fixer.hpp"
#include "wedge/wave_pattern.hpp"

namespace wedge {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string location;
};

using Report = std::vector<Check>;

bool all_pass(const Report& report);
void write_report_text(const Report& report, std::ostream& out);
void write_report_csv(const Report& report, std::ostream& out);

enum class NodeLocation { interior, wall, shock, arc, corner };
const char* to_string(NodeLocation loc);

struct Extremum {
  std::string quantity;
  NodeLocation location = NodeLocation::interior;
  Vec2 point;
  double value = 0.0;
  bool is_min = true;
  // Depth below (above) the lowest (highest) neighbor.
  double depth = 0.0;
  bool pseudo_normal = false;
  double chi_t = 0.0;
  double curvature = 0.0;
};

struct ExtremumReport {
  std::vector<Extremum> extrema;
  Report checks;
};

// Largest physical distance between lattice neighbors.
double lattice_spacing(const GridMapping& mapping);

ExtremumReport ellipticity_report(const WavePattern& pattern, const EllipticSolution& sol,
                                  double grid_C = 10.0);

ExtremumReport density_extrema(const WavePattern& pattern, const EllipticSolution& sol,
                               double grid_C = 1.0);

// Checks with windows C sqrt(eps) c_R for v^x and C sqrt(eps) for normal angles.
ExtremumReport velocity_and_normal_ranges(const WavePattern& pattern, const EllipticSolution& sol,
                                          double C = 3.0);

enum class ArcSide { L, R };

struct ArcConstants {
  double sigma_f = 0.0;
  double sigma_g = 0.0;
  double sigma_theta = 0.0;
  double h0 = 0.0;
  double r = 0.0;
};

// Linearization constants of the arc ODE for radius r = sqrt(1 - eps) c.
ArcConstants arc_constants(double gamma, double epsilon, double c_region);
// Lower bound for chi_phiphi on the arc.
double arc_f(const ArcConstants& k, double gamma, double epsilon, double h, double p);

struct ArcProfile {
  ArcSide side = ArcSide::R;
  ArcConstants constants;
  double phi_bar = 0.0;
  std::vector<double> phi;
  std::vector<double> p;
  std::vector<double> h;
  std::vector<double> k;
  std::vector<double> q;
  std::vector<double> theta;
  double max_chi_t_over_c = 0.0;
  Report checks;
};

// Throws DomainError when L^2 = 1 - eps is violated on the arc beyond 1e-6.
ArcProfile arc_profile(const WavePattern& pattern, const EllipticSolution& sol, ArcSide side,
                       double grid_C = 1.0);

struct CornerSensitivity {
  double eta = 0.0;
  double xi = 0.0;
  double dzdy_domega = 0.0;
  double dvdy_domega = 0.0;
  double p_omega = 0.0;
  double k_omega = 0.0;
  // sqrt(p_w^2 + k_w^2) against -c_R v_I^y / xi.
  double bound_lhs = 0.0;
  double bound_rhs = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  double sigma_theta_phi_bar = 0.0;
  // Central differences of the exact corner family.
  double fd_dvdy = 0.0;
  double fd_p = 0.0;
  double fd_k = 0.0;
  Report checks;
};

// Closed forms at the R corner eta = eta_R^* with O(eps) terms dropped,
// cross-validated by central differences of corner_state with the given
// epsilon and a step of fd_step * c_R in eta.
CornerSensitivity corner_sensitivity(const WavePattern& pattern, double fd_epsilon = 1e-6,
                                     double fd_step = 1e-6);

// Exact corner family: shock through (sqrt((1-eps) c_R^2 - eta^2), eta) with
// upstream I and downstream L_d^2 = 1 - eps.
struct CornerState {
  Vec2 point;
  Vec2 n;
  double rho_d = 0.0;
  double c_d = 0.0;
  Vec2 v_d;
};
CornerState corner_state(const WavePattern& pattern, double eta, double epsilon);

enum class Region { I, L, R, elliptic };

struct FieldSample {
  Region region = Region::I;
  double rho = 0.0;
  Vec2 v;
};

// Field over the upper half plane in standard coordinates.
using CompositeField = std::function<FieldSample(Vec2)>;

// Elliptic solution inside Omega, constant states I, L, R elsewhere.
CompositeField composite_field(const WavePattern& pattern, const EllipticSolution& sol);
// Constant states only, with the straight R shock continued between the corners.
CompositeField pattern_field(const WavePattern& pattern);

struct Bump {
  Vec2 center;
  double radius = 0.0;
  double value(Vec2 x) const;
  Vec2 gradient(Vec2 x) const;
};

// Seeded battery of bumps with centers in the box; identical for identical inputs.
std::vector<Bump> bump_battery(Vec2 lo, Vec2 hi, int count, std::uint64_t seed);
// Box independent of epsilon covering the elliptic region of the pattern.
std::pair<Vec2, Vec2> battery_box(const WavePattern& pattern);

struct WeakResidual {
  double max_normalized = 0.0;
  std::vector<double> per_bump;
};

// Midpoint quadrature of int (rho grad chi . grad theta - 2 rho theta) over
// eta >= 0, normalized by rho_I c_R ||grad theta||_1. Cells whose corners lie
// in different regions are split up to refine_depth times.
WeakResidual weak_residual(const CompositeField& field, const std::vector<Bump>& bumps,
                           double rho_scale, double c_scale, int quadrature = 256,
                           int refine_depth = 2);

struct DiagnosticOptions {
  double grid_C = 10.0;
  double arc_grid_C = 1.0;
  // Window constant for v^x and shock normals.
  double window_C = 3.0;
  // Corner offsets from their targets below corner_C sqrt(eps) c_R.
  double corner_C = 3.0;
  int bumps = 12;
  std::uint64_t seed = 1;
  int quadrature = 256;
  bool weak_residual = true;
};

struct VerifySummary {
  Report report;
  double weak = 0.0;
  double chi_t_L = 0.0;
  double chi_t_R = 0.0;
  double max_L2_off_arcs = 0.0;
  double min_rho = 0.0;
};

// Every check above on one solution. The weak residual is reported without a
// verdict since only its scaling in eps is meaningful.
VerifySummary verify_solution(const WavePattern& pattern, const EllipticSolution& sol,
                              const DiagnosticOptions& options = {});

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace wedge
