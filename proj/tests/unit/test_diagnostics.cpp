#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "wedge/diagnostics.hpp"
#include "wedge/errors.hpp"

using namespace wedge;

namespace {

ProblemConfig standard(double gamma, double MIy, double epsilon = 0.04) {
  ProblemConfig c;
  c.gamma = gamma;
  c.MIy = MIy;
  c.epsilon = epsilon;
  return c;
}

ProblemConfig wedge_config(double epsilon) {
  ProblemConfig c;
  c.M_I = 2.94;
  c.tau = 10.0 * std::numbers::pi / 180.0;
  c.epsilon = epsilon;
  return c;
}

EllipticConfig lattice(int n_sigma) {
  EllipticConfig e;
  e.sigma_nodes = n_sigma;
  e.zeta_nodes = (n_sigma + 1) / 2;
  return e;
}

const Check* find(const Report& r, const std::string& name) {
  for (const Check& c : r) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("weak residual of a constant state at rest is quadrature error") {
  const WavePattern p = build(wedge_config(0.04));
  const FlowState R = p.R;
  const CompositeField field = [R](Vec2) { return FieldSample{Region::R, R.rho, R.v}; };
  std::vector<Bump> bumps;
  for (double x : {-0.5, 0.0, 0.5}) bumps.push_back(Bump{Vec2{x * p.R.c, 0.4 * p.R.c}, 0.3 * p.R.c});
  const WeakResidual w = weak_residual(field, bumps, p.I.rho, p.R.c);
  REQUIRE(w.per_bump.size() == 3);
  CHECK(w.max_normalized < 1e-6);
}

TEST_CASE("weak residual vanishes across an admissible straight shock") {
  const WavePattern p = build(standard(1.4, -2.0));
  const CompositeField field = pattern_field(p);
  // Bumps centred on the shock so every support straddles it.
  std::vector<Bump> bumps;
  for (double x : {-0.3, 0.0, 0.4}) bumps.push_back(Bump{Vec2{x * p.R.c, p.eta_R_star}, 0.3});
  const WeakResidual w = weak_residual(field, bumps, p.I.rho, p.R.c, 512);
  CHECK(w.max_normalized < 1e-6);

  // A shock at the wrong height breaks the mass balance.
  const FlowState I = p.I, R = p.R;
  const double wrong = 1.1 * p.eta_R_star;
  const CompositeField off = [I, R, wrong](Vec2 x) {
    return x.y < wrong ? FieldSample{Region::R, R.rho, R.v} : FieldSample{Region::I, I.rho, I.v};
  };
  for (Bump& b : bumps) b.center.y = wrong;
  CHECK(weak_residual(off, bumps, p.I.rho, p.R.c, 512).max_normalized > 1e-3);
}

TEST_CASE("bump battery is reproducible and stays in its box") {
  const Vec2 lo{-1.0, 0.0}, hi{1.0, 0.5};
  const auto a = bump_battery(lo, hi, 20, 7);
  const auto b = bump_battery(lo, hi, 20, 7);
  const auto c = bump_battery(lo, hi, 20, 8);
  REQUIRE(a.size() == 20);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].center == b[k].center);
    CHECK(a[k].radius == b[k].radius);
    CHECK(a[k].center.x >= lo.x);
    CHECK(a[k].center.x <= hi.x);
    CHECK(a[k].center.y >= lo.y);
    CHECK(a[k].center.y <= hi.y);
    differs = differs || !(a[k].center == c[k].center);
  }
  CHECK(differs);

  const Bump bump{Vec2{0.1, 0.2}, 0.3};
  const Vec2 x{0.15, 0.1};
  const double h = 1e-6;
  const Vec2 g = bump.gradient(x);
  CHECK(g.x == doctest::Approx((bump.value(x + Vec2{h, 0}) - bump.value(x - Vec2{h, 0})) / (2 * h)).epsilon(1e-7));
  CHECK(g.y == doctest::Approx((bump.value(x + Vec2{0, h}) - bump.value(x - Vec2{0, h})) / (2 * h)).epsilon(1e-7));
  CHECK(bump.value(Vec2{0.5, 0.2}) == 0.0);
}

TEST_CASE("battery box does not move with epsilon") {
  const auto [lo1, hi1] = battery_box(build(wedge_config(0.04)));
  const auto [lo2, hi2] = battery_box(build(wedge_config(0.0025)));
  CHECK(lo1 == lo2);
  CHECK(hi1 == hi2);
}

TEST_CASE("arc linearization constants") {
  for (double gamma : {1.0, 1.4, 3.0}) {
    for (double eps : {0.0, 0.01, 0.04}) {
      const ArcConstants k = arc_constants(gamma, eps, 0.9);
      CHECK(k.r == doctest::Approx(std::sqrt(1.0 - eps) * 0.9).epsilon(1e-15));
      // The reference height h0 is a root of f on p = 0.
      CHECK(std::abs(arc_f(k, gamma, eps, k.h0, 0.0)) < 1e-12);
      CHECK(k.sigma_g <= 0.0);
      CHECK(k.sigma_f > 0.0);
      if (eps == 0.0) CHECK(k.h0 == doctest::Approx(k.r * k.r).epsilon(1e-15));
    }
  }
  CHECK(arc_constants(1.0, 0.01, 1.0).sigma_theta == 0.0);
}

TEST_CASE("corner sensitivities") {
  SUBCASE("closed forms agree with differences of the exact corner family") {
    for (double gamma : {1.0, 1.4, 3.0}) {
      for (double MIy : {-1.5, -3.0}) {
        CAPTURE(gamma);
        CAPTURE(MIy);
        const WavePattern p = build(standard(gamma, MIy));
        const CornerSensitivity s = corner_sensitivity(p);
        CHECK(s.dvdy_domega > 0.0);
        CHECK(std::abs(s.dvdy_domega - s.fd_dvdy) < 1e-5 * std::abs(s.dvdy_domega));
        CHECK(std::abs(s.p_omega - s.fd_p) < 1e-5 * std::abs(s.p_omega));
        CHECK(s.bound_lhs < s.bound_rhs);
        if (gamma > 1.0) {
          CHECK(std::abs(s.k_omega - s.fd_k) < 1e-5 * std::abs(s.k_omega));
          CHECK(s.theta_plus > 0.0);
          CHECK(s.theta_plus < 0.5 * std::numbers::pi - s.sigma_theta_phi_bar);
        }
        CHECK(all_pass(s.checks));
      }
    }
  }
  SUBCASE("k vanishes in the isothermal limit") {
    double prev = INFINITY;
    for (double gm : {1e-1, 1e-3, 1e-6}) {
      const CornerSensitivity s = corner_sensitivity(build(standard(1.0 + gm, -2.0)));
      CHECK(s.k_omega < prev);
      prev = s.k_omega;
    }
    CHECK(prev < 2e-3);
    CHECK(corner_sensitivity(build(standard(1.0, -2.0))).k_omega == 0.0);
  }
  SUBCASE("corner state sits on the arc with the sonic defect") {
    const WavePattern p = build(wedge_config(0.04));
    const CornerState c = corner_state(p, p.eta_R_star, 0.01);
    CHECK(norm(c.point) == doctest::Approx(std::sqrt(0.99) * p.R.c).epsilon(1e-14));
    CHECK(distance(c.v_d, c.point) == doctest::Approx(std::sqrt(0.99) * c.c_d).epsilon(1e-9));
    CHECK_THROWS_AS(corner_state(p, 2.0 * p.R.c, 0.01), DomainError);
  }
}

TEST_CASE("verification of the straight-shock solution") {
  const WavePattern p = build(standard(1.0, -2.0, 0.04));
  const EllipticSolution sol = iterate(p, lattice(33));
  REQUIRE(sol.converged);
  DiagnosticOptions opt;
  opt.quadrature = 64;
  const VerifySummary v = verify_solution(p, sol, opt);
  for (const Check& c : v.report) {
    CAPTURE(c.name);
    CAPTURE(c.location);
    CHECK(c.pass);
  }
  CHECK(density_extrema(p, sol).extrema.empty());
  CHECK(v.min_rho == doctest::Approx(p.R.rho).epsilon(1e-8));
}

TEST_CASE("verification of the wedge case") {
  const WavePattern p = build(wedge_config(0.04));
  const EllipticSolution sol = iterate(p, lattice(33));
  REQUIRE(sol.converged);
  DiagnosticOptions opt;
  opt.quadrature = 64;
  const VerifySummary a = verify_solution(p, sol, opt);
  const VerifySummary b = verify_solution(p, sol, opt);
  REQUIRE(a.report.size() == b.report.size());
  for (std::size_t k = 0; k < a.report.size(); ++k) {
    CHECK(a.report[k].name == b.report[k].name);
    CHECK(a.report[k].pass == b.report[k].pass);
    CHECK(a.report[k].value == b.report[k].value);
  }
  CHECK(a.weak == b.weak);
  REQUIRE(find(a.report, "converged"));
  CHECK(find(a.report, "converged")->pass);
  CHECK(find(a.report, "corner_R_offset")->pass);
  CHECK(find(a.report, "weak_residual"));
  CHECK(a.min_rho > p.I.rho);

  const ArcProfile arc = arc_profile(p, sol, ArcSide::R);
  CHECK(arc.phi.size() == static_cast<std::size_t>(sol.mapping.n_zeta()));
  CHECK(arc.max_chi_t_over_c < 1.0);
  CHECK(lattice_spacing(sol.mapping) > 0.0);

  std::ostringstream text, csv;
  write_report_text(a.report, text);
  write_report_csv(a.report, csv);
  CHECK(text.str().find("converged") != std::string::npos);
  CHECK(csv.str().rfind("name,", 0) == 0);
}

TEST_CASE("loglog slope") {
  std::vector<double> x{0.04, 0.01, 0.0025}, y;
  for (double e : x) y.push_back(3.0 * std::pow(e, 0.5));
  CHECK(loglog_slope(x, y) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), DomainError);
}
