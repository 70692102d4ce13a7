#pragma once

// First-order finite-volume march of the irrotational gas system
//   rho_t + div(rho v) = 0,   v_t + grad(|v|^2/2 + pi(rho)) = 0
// from uniform upstream data, sampled afterwards in xi = x / t.
//
// Solver frame: the upper half of a symmetric wedge, rotated so that the wedge
// face is the grid line y = 0, x >= 0, with the tip at the origin. The
// upstream symmetry line y = -x tan(tau), x < 0, is the staircase boundary.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wedge/gas_core.hpp"
#include "wedge/vec2.hpp"
#include "wedge/wave_pattern.hpp"

namespace wedge {

enum class Side { left = 0, right = 1, bottom = 2, top = 3 };
enum class BoundaryKind { inflow, outflow, wall, periodic };

struct Grid {
  Vec2 origin;
  double spacing = 0.0;
  int nx = 0;
  int ny = 0;
  // Slope angle of the staircase symmetry line for x < 0; 0 means none.
  double tau = 0.0;
  std::array<BoundaryKind, 4> sides{BoundaryKind::inflow, BoundaryKind::outflow,
                                    BoundaryKind::wall, BoundaryKind::inflow};
  std::vector<std::uint8_t> solid;

  // Box without staircase; every cell is fluid.
  static Grid box(Vec2 origin, double spacing, int nx, int ny, std::array<BoundaryKind, 4> sides);
  // Wedge grid covering [x0, x0 + nx h] x [0, ny h]; x0 is snapped to a cell edge.
  static Grid wedge(double x0, double spacing, int nx, int ny, double tau);

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec2 center(int i, int j) const {
    return origin + Vec2{(i + 0.5) * spacing, (j + 0.5) * spacing};
  }
  bool fluid(int i, int j) const { return solid.empty() || solid[index(i, j)] == 0; }
  double fluid_area() const;
  // Outward-into-fluid unit normal of the wall a ghost cell at p mirrors across.
  Vec2 wall_normal(Side side, Vec2 p) const;
};

struct SimState {
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> vx;
  std::vector<double> vy;

  double total_mass(const Grid& grid) const;
};

struct SimConfig {
  int nx = 400;
  int ny = 400;
  double cfl = 0.45;
  double t_final = 1.0;
  // Steps between snapshot callbacks; 0 disables.
  int snapshot_every = 0;
  double rho_floor_factor = 1e-10;
};

class UnsteadySolver {
 public:
  UnsteadySolver(GasModel model, Grid grid, FlowState inflow, SimConfig config = {});

  const Grid& grid() const noexcept { return grid_; }
  const GasModel& model() const noexcept { return model_; }

  SimState init() const;
  // Largest stable step for the given state.
  double max_dt(const SimState& state) const;
  // Throws CflError when dt exceeds the CFL bound and VacuumError at the density floor.
  // boundary_mass_inflow receives the mass entering through non-fluid faces.
  SimState step(const SimState& state, double dt, double* boundary_mass_inflow = nullptr) const;
  // Advances to t_final, invoking the callback at the configured cadence and at t_final.
  SimState advance(SimState state, double t_final,
                   const std::function<void(const SimState&, int)>& on_snapshot = {}) const;

 private:
  GasModel model_;
  Grid grid_;
  FlowState inflow_;
  SimConfig config_;
};

// Cell-centered data resampled in xi = x / t.
struct SelfSimilarField {
  Vec2 origin;
  double spacing = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> rho;
  std::vector<double> vx;
  std::vector<double> vy;
  std::vector<double> L;
  std::vector<std::uint8_t> valid;

  Vec2 point(int i, int j) const { return origin + Vec2{i * spacing, j * spacing}; }
};

// Bilinear sample of the state on an xi lattice; points touching solid cells are invalid.
SelfSimilarField sample_self_similar(const GasModel& model, const Grid& grid, const SimState& state,
                                     Vec2 xi_origin, double xi_spacing, int nx, int ny);

// Relative L1 difference of (rho, v) between two times over the lattice
// covering the given xi window.
double self_similarity_defect(const GasModel& model, const Grid& grid, const SimState& s1,
                              const SimState& s2, Vec2 xi_lo, Vec2 xi_hi, double xi_spacing);

struct ProbeStats {
  std::string name;
  Vec2 center;
  double half = 0.0;
  int samples = 0;
  double rho_mean = 0.0;
  double rho_rel_std = 0.0;
  double speed_mean = 0.0;
  double speed_rel_std = 0.0;
  double L_min = 0.0;
  double L_max = 0.0;
  double M_min = 0.0;
};

ProbeStats probe(const SelfSimilarField& field, const GasModel& model, std::string name,
                 Vec2 center, double half);

struct ShockAngleFit {
  // Wave angle in the wedge-fixed frame, measured from the wedge axis.
  double angle = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// Least-squares fit of the rho = (rho_I + rho_L)/2 level set over x in [x_lo, x_hi].
ShockAngleFit fit_tip_shock(const SelfSimilarField& field, double rho_mid, double tau, double x_lo,
                            double x_hi);

struct WedgeRunResult {
  WavePattern pattern;
  Grid grid;
  SimState half_state;
  SimState final_state;
  SelfSimilarField field;
  ShockAngleFit tip_fit;
  double predicted_angle = 0.0;
  ProbeStats probe_I;
  ProbeStats probe_L;
  ProbeStats probe_R;
  ProbeStats probe_elliptic;
  double defect = 0.0;
  double max_curl_smooth = 0.0;
  int steps = 0;
};

// Pattern-sized wedge run; also records the state at t_final / 2 for the
// self-similarity defect.
using WedgeSnapshot = std::function<void(const Grid&, const SimState&, int)>;
WedgeRunResult run_wedge(const ProblemConfig& problem, const SimConfig& sim,
                         const WedgeSnapshot& on_snapshot = {});

// Largest |curl v| over cells whose 3x3 neighborhood has density variation below rel_tol.
double max_curl_smooth(const Grid& grid, const SimState& state, double rel_tol = 1e-3);

void write_state_csv(const Grid& grid, const SimState& state, std::ostream& out);
// Header "WEDGE1 nx ny t\n", then rho, vx, vy, each nx*ny little-endian doubles, row-major.
void write_state_raw(const Grid& grid, const SimState& state, std::ostream& out);

}  // namespace wedge
