#pragma once

// Geometric scaffold of the wedge reflection pattern in standard coordinates:
// wall on eta = 0, v_R = 0, v_I = (0, M_I^y c_I), v_L = (v_L^x, 0).

#include <iosfwd>
#include <optional>
#include <vector>

#include "wedge/gas_core.hpp"
#include "wedge/shock_algebra.hpp"
#include "wedge/vec2.hpp"

namespace wedge {

inline constexpr double kEpsilonMax = 0.25;
inline constexpr double kDefaultEpsilon = 0.04;
inline constexpr double kDefaultCEta = 2.0;

struct ProblemConfig {
  double gamma = 1.4;
  double rho_I = 1.0;
  double c_I = 1.0;
  // Standard form: upstream Mach number normal to the wall.
  std::optional<double> MIy;
  // Original form: upstream Mach number and wedge half-angle.
  std::optional<double> M_I;
  std::optional<double> tau;
  // Defaults to eta_R^* (standard form) or follows from tau (original form).
  std::optional<double> eta_L_star;
  double epsilon = kDefaultEpsilon;
  // Heuristic margin eta_L^* <= eta_R^* - C_eta sqrt(eps) c_R for gamma > 1.
  double C_eta = kDefaultCEta;

  GasModel model() const { return GasModel(gamma, rho_I, c_I); }
  // Throws ConfigError naming the first offending field.
  void validate() const;
};

struct Arc {
  Vec2 center;
  double radius = 0.0;
  double angle_begin = 0.0;
  double angle_end = 0.0;

  Vec2 point(double angle) const;
  // Counterclockwise unit tangent at the given angle.
  Vec2 tangent(double angle) const;
};

enum class Picture { standard, L_picture, original };

// xi -> M (xi - shift), velocities alike; M = rotation, optionally followed
// by reflection across the vertical axis.
struct PictureMap {
  Vec2 shift;
  double rotation = 0.0;
  bool reflect = false;

  Vec2 point(Vec2 xi) const;
  Vec2 velocity(Vec2 v) const { return point(v); }
  Vec2 direction(Vec2 d) const;
  Vec2 inverse_point(Vec2 p) const;
  Vec2 inverse_direction(Vec2 d) const;
};

struct WavePattern {
  GasModel model{1.0, 1.0, 1.0};
  double epsilon = 0.0;
  Picture picture = Picture::standard;
  // Map from standard coordinates into this picture.
  PictureMap frame;

  FlowState I;
  FlowState L;
  FlowState R;
  ShockSolution shock_L;
  ShockSolution shock_R;
  double beta_L = 0.0;
  double eta_R_star = 0.0;
  double eta_L_star = 0.0;
  Vec2 xi_L_star;
  Vec2 xi_R_star;
  Vec2 xi_BL;
  Vec2 xi_BR;
  Arc arc_L;
  Arc arc_R;
  // Wedge corner: L shock meets the wall. Not finite when beta_L = 0.
  Vec2 tip;
  // Quantities of the original (wedge-fixed) frame.
  double tau = 0.0;
  double M_I = 0.0;
  double M_L = 0.0;
  double M_R = 0.0;
  bool eta_margin_ok = true;

  // Potentials of the constant states, continuous with psi^I on their shocks.
  // Meaningful in the standard picture.
  double psi_I(Vec2 xi) const;
  double psi_L(Vec2 xi) const;
  double psi_R(Vec2 xi) const;
  // Rotation angle tangent between the standard and L pictures.
  double alpha() const;
};

struct BuildOptions {
  bool enforce_supersonic = true;
};

// Throws GeometryError when no L shock reaches eta_L^*, SupersonicityViolation
// when M_L <= 1 (if enforced), NoAttachedShock in the original form when tau
// exceeds the critical angle.
WavePattern build(const ProblemConfig& config, BuildOptions options = {});

// Signed distance from the corner chord to the closed disk B_{c_I}(v_I).
double separation_check(const WavePattern& pattern);

struct CrossResult {
  double eta_L_x = 0.0;
  bool monotone = true;
  std::vector<std::pair<double, double>> trace;
};

// Smallest eta_L^* for which the chord clears the upstream sonic disk.
CrossResult eta_L_cross(const ProblemConfig& config);

PictureMap picture_map(const WavePattern& standard, Picture target);
WavePattern picture_transform(const WavePattern& pattern, Picture target);

// One CSV row per geometric entity.
void write_pattern_csv(const WavePattern& pattern, std::ostream& out);

}  // namespace wedge
