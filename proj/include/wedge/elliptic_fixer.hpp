#pragma once

// Free-boundary solve of the elliptic region between the two arcs, the wall
// and the curved shock, on a (sigma, zeta) lattice:
//   sigma = 0 : arc P_L,  sigma = 1 : arc P_R,  zeta = 0 : wall,  zeta = 1 : shock.
// Each outer step freezes chi in the sound speed and the arc condition, solves
// for psi by Newton, then moves the shock to where psi = psi^I.

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wedge/vec2.hpp"
#include "wedge/wave_pattern.hpp"

namespace wedge {

// Shock heights at the sigma nodes; the shock point is (xi(sigma, s), s).
struct ShockCurve {
  std::vector<double> s;
};

struct NodeGeometry {
  Vec2 xi;
  // d(xi, eta)/d(sigma, zeta): columns are the sigma and zeta derivatives.
  double xs = 0.0, xz = 0.0, ys = 0.0, yz = 0.0;
  // Second parameter derivatives of xi and eta: (ss, sz, zz).
  std::array<double, 3> xpp{};
  std::array<double, 3> ypp{};

  double det() const { return xs * yz - xz * ys; }
};

class GridMapping {
 public:
  // Throws MappingError when the discrete Jacobian is not positive.
  GridMapping(const WavePattern& pattern, ShockCurve shock, int n_sigma, int n_zeta);

  int n_sigma() const noexcept { return n_sigma_; }
  int n_zeta() const noexcept { return n_zeta_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  // zeta runs fastest so the lattice matrix is narrow-banded.
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_zeta_ + j; }
  const NodeGeometry& node(int i, int j) const { return nodes_[index(i, j)]; }
  const ShockCurve& shock() const noexcept { return shock_; }
  double sigma(int i) const { return static_cast<double>(i) / (n_sigma_ - 1); }
  double zeta(int j) const { return static_cast<double>(j) / (n_zeta_ - 1); }
  Vec2 corner_L() const { return node(0, n_zeta_ - 1).xi; }
  Vec2 corner_R() const { return node(n_sigma_ - 1, n_zeta_ - 1).xi; }
  double min_det() const;

  // xi coordinate of the sigma level set at height eta.
  double level_x(double sigma, double eta) const;

 private:
  double arc_x_L(double eta) const;
  double arc_x_R(double eta) const;

  double vLx_ = 0.0;
  double rL_ = 0.0;
  double rR_ = 0.0;
  double etaL_ = 0.0;
  double etaR_ = 0.0;
  int n_sigma_ = 0;
  int n_zeta_ = 0;
  ShockCurve shock_;
  std::vector<NodeGeometry> nodes_;
};

struct EllipticConfig {
  int sigma_nodes = 65;
  int zeta_nodes = 33;
  double tol_inner = 1e-10;
  double tol_outer = 1e-6;
  double omega_relax = 0.5;
  int max_outer = 400;
  int max_inner = 30;
  // Corners farther than this many sqrt(eps) c_R from their targets escape.
  double corner_escape = 10.0;

  void validate() const;
};

// Normalized residual maxima: c_R^2 for the interior, arc and psi = psi^I
// rows, c_R for the wall, rho_I c_R for the shock flux.
struct ResidualReport {
  double interior = 0.0;
  double arc_L = 0.0;
  double arc_R = 0.0;
  double wall = 0.0;
  double shock_flux = 0.0;
  double shock_match = 0.0;
  // Least-squares corner rows, and the largest single condition there
  // (incompatible in general; reported, not part of the combined residual).
  double corner = 0.0;
  double corner_mismatch = 0.0;

  double shock() const { return std::max(shock_flux, shock_match); }
  double combined() const;
};

// Nodal pseudo-potential chi = psi - |xi|^2 / 2.
std::vector<double> chi_of_psi(const GridMapping& mapping, std::span<const double> psi);

ResidualReport residuals(const WavePattern& pattern, const GridMapping& mapping,
                         std::span<const double> psi, std::span<const double> chi_old);

struct FixedBoundaryResult {
  std::vector<double> psi;
  int newton_steps = 0;
  double last_update = 0.0;
  // First interior node where the frozen operator is not elliptic.
  bool ellipticity_lost = false;
  int lost_i = -1;
  int lost_j = -1;
};

// Throws InnerSolveError when Newton updates grow for five consecutive steps.
FixedBoundaryResult solve_fixed_boundary(const WavePattern& pattern, const GridMapping& mapping,
                                         std::span<const double> chi_old,
                                         std::vector<double> psi_start,
                                         const EllipticConfig& config);

// s = (1 - omega) s_old + omega (psi(sigma, 1) - psi^I(0)) / v_I^y. Throws
// CornerEscapeError when a corner leaves its window and MappingError when the
// shock stops being a graph over the wall.
ShockCurve update_shock(const WavePattern& pattern, const GridMapping& mapping,
                        std::span<const double> psi, double omega, double corner_escape);

struct InitialGuess {
  ShockCurve shock;
  std::vector<double> psi;
};

// Straight chord from xi_L^* to xi_R^* with psi blended between psi_L and psi_R.
InitialGuess initial_guess(const WavePattern& pattern, int n_sigma, int n_zeta);
// Blended psi for a prescribed shock.
std::vector<double> blended_psi(const WavePattern& pattern, const GridMapping& mapping);

struct NodeState {
  double rho = 0.0;
  Vec2 v;
  double L2 = 0.0;
};

std::vector<NodeState> node_states(const WavePattern& pattern, const GridMapping& mapping,
                                   std::span<const double> psi);

struct IterationRecord {
  int iter = 0;
  ResidualReport residual;
  double shock_change = 0.0;
  double max_L2_interior = 0.0;
};

struct EllipticSolution {
  GridMapping mapping;
  std::vector<double> psi;
  std::vector<NodeState> states;
  ResidualReport residual;
  std::vector<IterationRecord> history;
  bool converged = false;
  bool diverged = false;
  // (1.3.1)-type separation fails; the solver still runs.
  bool unsupported = false;
  std::string failure;

  Vec2 corner_L() const { return mapping.corner_L(); }
  Vec2 corner_R() const { return mapping.corner_R(); }
};

// Alternates fixed-boundary solves and relaxed shock updates. Never throws on
// non-convergence: the best iterate is returned with diverged set.
// A start with an empty psi uses the blended field over its shock.
EllipticSolution iterate(const WavePattern& pattern, const EllipticConfig& config,
                         std::optional<InitialGuess> start = std::nullopt);

struct ContinuationResult {
  WavePattern pattern;
  EllipticSolution solution;
  // Epsilon values solved in order; the last one is the requested epsilon.
  std::vector<double> path;
};

// Direct iteration first; on failure, halves epsilon from eps_start down to
// the requested value, starting each solve from the previous solution.
ContinuationResult solve_with_continuation(const ProblemConfig& problem,
                                           const EllipticConfig& config,
                                           double eps_start = kDefaultEpsilon);

// Interior residual of the nondivergence form evaluated with stride-2
// stencils; measures truncation error of a converged discrete field.
double coarse_interior_residual(const WavePattern& pattern, const GridMapping& mapping,
                                std::span<const double> psi);

void write_solution_csv(const EllipticSolution& sol, std::ostream& out);
// Normal angle of unit(v_I - grad psi) at each shock node.
void write_shock_csv(const WavePattern& pattern, const EllipticSolution& sol, std::ostream& out);
void write_history_csv(const EllipticSolution& sol, std::ostream& out);

// Rebuilds a solution from a node CSV written by write_solution_csv.
EllipticSolution read_solution_csv(const WavePattern& pattern, std::istream& in);

}  // namespace wedge
