#include "wedge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "wedge/errors.hpp"

namespace wedge::cli {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "malformed number '" + std::string(v) + "'");
  }
  return out;
}

long long to_integer(const std::string& key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key, "malformed integer '" + std::string(v) + "'");
  }
  return out;
}

int to_int(const std::string& key, std::string_view v) {
  const long long x = to_integer(key, v);
  if (x < -1'000'000'000LL || x > 1'000'000'000LL) throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(v) + "'");
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = v.find(',');
    out.push_back(trim(v.substr(0, c)));
    if (c == std::string_view::npos) break;
    v.remove_prefix(c + 1);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, std::string_view)>;

template <class F>
Setter number(F field) {
  return [field](RunConfig& c, const std::string& k, std::string_view v) {
    field(c) = to_double(k, v);
  };
}

template <class F>
Setter integer(F field) {
  return [field](RunConfig& c, const std::string& k, std::string_view v) {
    field(c) = to_int(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"command",
       [](RunConfig& c, const std::string&, std::string_view v) {
         c.command = parse_command(v);
       }},
      {"gamma", number([](RunConfig& c) -> double& { return c.problem.gamma; })},
      {"rho_I", number([](RunConfig& c) -> double& { return c.problem.rho_I; })},
      {"c_I", number([](RunConfig& c) -> double& { return c.problem.c_I; })},
      {"M_I_y", number([](RunConfig& c) -> std::optional<double>& { return c.problem.MIy; })},
      {"M_I", number([](RunConfig& c) -> std::optional<double>& { return c.problem.M_I; })},
      {"tau", number([](RunConfig& c) -> std::optional<double>& { return c.problem.tau; })},
      {"eta_L_star",
       number([](RunConfig& c) -> std::optional<double>& { return c.problem.eta_L_star; })},
      {"epsilon", number([](RunConfig& c) -> double& { return c.problem.epsilon; })},
      {"C_eta", number([](RunConfig& c) -> double& { return c.problem.C_eta; })},
      {"nx", integer([](RunConfig& c) -> int& { return c.numerics.sim.nx; })},
      {"ny", integer([](RunConfig& c) -> int& { return c.numerics.sim.ny; })},
      {"cfl", number([](RunConfig& c) -> double& { return c.numerics.sim.cfl; })},
      {"t_final", number([](RunConfig& c) -> double& { return c.numerics.sim.t_final; })},
      {"snapshot_every", integer([](RunConfig& c) -> int& { return c.numerics.sim.snapshot_every; })},
      {"sigma_nodes", integer([](RunConfig& c) -> int& { return c.numerics.elliptic.sigma_nodes; })},
      {"zeta_nodes", integer([](RunConfig& c) -> int& { return c.numerics.elliptic.zeta_nodes; })},
      {"tol_inner", number([](RunConfig& c) -> double& { return c.numerics.elliptic.tol_inner; })},
      {"tol_outer", number([](RunConfig& c) -> double& { return c.numerics.elliptic.tol_outer; })},
      {"omega_relax", number([](RunConfig& c) -> double& { return c.numerics.elliptic.omega_relax; })},
      {"max_outer", integer([](RunConfig& c) -> int& { return c.numerics.elliptic.max_outer; })},
      {"max_inner", integer([](RunConfig& c) -> int& { return c.numerics.elliptic.max_inner; })},
      {"corner_escape",
       number([](RunConfig& c) -> double& { return c.numerics.elliptic.corner_escape; })},
      {"eps_start", number([](RunConfig& c) -> double& { return c.numerics.eps_start; })},
      {"epsilons",
       [](RunConfig& c, const std::string& k, std::string_view v) {
         c.numerics.epsilons.clear();
         for (auto item : split_list(v)) c.numerics.epsilons.push_back(to_double(k, item));
       }},
      {"resolutions",
       [](RunConfig& c, const std::string& k, std::string_view v) {
         c.numerics.resolutions.clear();
         for (auto item : split_list(v)) c.numerics.resolutions.push_back(to_int(k, item));
       }},
      {"polar_points", integer([](RunConfig& c) -> int& { return c.numerics.polar_points; })},
      {"grid_C", number([](RunConfig& c) -> double& { return c.numerics.diagnostics.grid_C; })},
      {"arc_grid_C",
       number([](RunConfig& c) -> double& { return c.numerics.diagnostics.arc_grid_C; })},
      {"window_C", number([](RunConfig& c) -> double& { return c.numerics.diagnostics.window_C; })},
      {"corner_C", number([](RunConfig& c) -> double& { return c.numerics.diagnostics.corner_C; })},
      {"bumps", integer([](RunConfig& c) -> int& { return c.numerics.diagnostics.bumps; })},
      {"quadrature", integer([](RunConfig& c) -> int& { return c.numerics.diagnostics.quadrature; })},
      {"seed",
       [](RunConfig& c, const std::string& k, std::string_view v) {
         const long long s = to_integer(k, v);
         if (s < 0) throw ConfigError(k, "must be non-negative");
         c.numerics.diagnostics.seed = static_cast<std::uint64_t>(s);
       }},
      {"weak_residual",
       [](RunConfig& c, const std::string& k, std::string_view v) {
         c.numerics.diagnostics.weak_residual = to_bool(k, v);
       }},
      {"out_dir",
       [](RunConfig& c, const std::string&, std::string_view v) { c.output.dir = std::string(v); }},
      {"solution",
       [](RunConfig& c, const std::string&, std::string_view v) {
         c.output.solution = std::filesystem::path(std::string(v));
       }},
      {"format",
       [](RunConfig& c, const std::string& k, std::string_view v) {
         if (v == "csv") c.output.format = DumpFormat::csv;
         else if (v == "raw") c.output.format = DumpFormat::raw;
         else if (v == "both") c.output.format = DumpFormat::both;
         else throw ConfigError(k, "expected csv, raw or both");
       }},
      {"strict",
       [](RunConfig& c, const std::string& k, std::string_view v) { c.strict = to_bool(k, v); }},
  };
  return table;
}

// Keys accepting a _deg spelling, stored in radians.
const std::set<std::string, std::less<>> kAngleKeys = {"tau"};

void assign(RunConfig& c, std::set<std::string>& seen, std::string key, std::string_view value) {
  std::string canonical = key;
  bool degrees = false;
  if (key.size() > 4 && key.ends_with("_deg") && kAngleKeys.count(key.substr(0, key.size() - 4))) {
    canonical = key.substr(0, key.size() - 4);
    degrees = true;
  }
  const auto it = setters().find(canonical);
  if (it == setters().end()) {
    throw ConfigError(key, "unknown key");
  }
  if (!seen.insert(canonical).second) {
    throw ConfigError(key, "given more than once");
  }
  if (value.empty()) {
    throw ConfigError(key, "missing value");
  }
  if (degrees) {
    const double rad = to_double(key, value) * kDeg;
    std::ostringstream s;
    s << std::setprecision(17) << rad;
    it->second(c, canonical, s.str());
  } else {
    it->second(c, canonical, value);
  }
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("out_dir", "cannot create " + dir.string());
  }
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name,
                       std::ios::openmode mode = std::ios::out) {
  std::ofstream f(dir / name, mode | std::ios::trunc);
  if (!f) throw ConfigError("out_dir", "cannot write " + (dir / name).string());
  return f;
}

int verdict(const Report& report, bool strict, std::ostream& log) {
  write_report_text(report, log);
  return strict && !all_pass(report) ? kExitDiagnostic : kExitOk;
}

void write_quantities(std::ostream& out, const std::vector<std::pair<std::string, double>>& rows) {
  out << std::setprecision(12) << "quantity,value\n";
  for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
}

double wave_angle(const ShockSolution& s) {
  const Vec2 u = unit(s.upstream.v);
  return std::acos(std::min(1.0, std::abs(dot(u, s.tangent()))));
}

int run_polar(const RunConfig& c, std::ostream& log) {
  const ProblemConfig& p = c.problem;
  const GasModel model = p.model();
  const FlowState up = FlowState::make(model, p.rho_I, Vec2{*p.M_I * p.c_I, 0.0});
  const Vec2 origin{};
  const auto grid = polar_beta_grid(up, origin, c.numerics.polar_points);
  const auto samples = shock_polar(model, up, origin, grid);
  {
    auto f = open_out(c.output.dir, "polar.csv");
    f << std::setprecision(17) << "beta,deflection,vx,vy,rho_d,c_d,L_d,z_d\n";
    for (const auto& s : samples) {
      f << s.beta << ',' << std::atan2(s.downstream_v.y, s.downstream_v.x) << ','
        << s.downstream_v.x << ',' << s.downstream_v.y << ',' << s.rho_d << ',' << s.c_d << ','
        << s.L_d << ',' << s.z_d << '\n';
    }
  }
  const double tau_star = critical_angle(model, up);
  auto f = open_out(c.output.dir, "polar_summary.csv");
  f << std::setprecision(12) << "solution,wave_angle_deg,deflection_deg,mach_d,supersonic,rho_d\n";
  log << std::setprecision(8) << "tau_star_deg=" << tau_star / kDeg;
  if (!p.tau) {
    log << '\n';
    return kExitOk;
  }
  const auto sol = deflection_solutions(model, up, Radians{*p.tau});
  if (!sol) {
    log << " no attached shock at tau_deg=" << *p.tau / kDeg << '\n';
    return kExitSolver;
  }
  for (const auto& [name, a] : {std::pair{"weak", sol->weak}, std::pair{"strong", sol->strong}}) {
    f << name << ',' << wave_angle(a.shock) / kDeg << ',' << a.deflection / kDeg << ','
      << a.mach_d << ',' << a.supersonic << ',' << a.shock.downstream.rho << '\n';
    log << ' ' << name << ": wave_angle_deg=" << wave_angle(a.shock) / kDeg
        << " M_d=" << a.mach_d << " supersonic=" << (a.supersonic ? 1 : 0);
  }
  log << '\n';
  return kExitOk;
}

std::vector<std::pair<std::string, double>> pattern_rows(const WavePattern& w) {
  return {{"eta_R_star", w.eta_R_star},   {"eta_L_star", w.eta_L_star},
          {"beta_L", w.beta_L},           {"alpha", w.alpha()},
          {"v_L_x", w.L.v.x},             {"v_I_y", w.I.v.y},
          {"rho_L", w.L.rho},             {"rho_R", w.R.rho},
          {"c_L", w.L.c},                 {"c_R", w.R.c},
          {"xi_L_star_x", w.xi_L_star.x}, {"xi_L_star_y", w.xi_L_star.y},
          {"xi_R_star_x", w.xi_R_star.x}, {"xi_R_star_y", w.xi_R_star.y},
          {"tau_deg", w.tau / kDeg},      {"M_I", w.M_I},
          {"M_L", w.M_L},                 {"M_R", w.M_R},
          {"separation", separation_check(w)}, {"eta_margin_ok", w.eta_margin_ok ? 1.0 : 0.0}};
}

int run_pattern(const RunConfig& c, std::ostream& log) {
  const WavePattern w = build(c.problem);
  {
    auto f = open_out(c.output.dir, "pattern.csv");
    write_pattern_csv(w, f);
  }
  auto rows = pattern_rows(w);
  if (c.problem.MIy && !c.problem.M_I) {
    rows.emplace_back("eta_L_cross", eta_L_cross(c.problem).eta_L_x);
  }
  auto f = open_out(c.output.dir, "pattern_summary.csv");
  write_quantities(f, rows);
  for (const auto& [k, v] : rows) log << k << '=' << v << '\n';
  if (!w.eta_margin_ok) log << "note: eta_L_star exceeds the heuristic margin below eta_R_star\n";
  return kExitOk;
}

void dump_state(const RunConfig& c, const Grid& grid, const SimState& s, const std::string& stem) {
  if (c.output.format != DumpFormat::raw) {
    auto f = open_out(c.output.dir, stem + ".csv");
    write_state_csv(grid, s, f);
  }
  if (c.output.format != DumpFormat::csv) {
    auto f = open_out(c.output.dir, stem + ".bin", std::ios::out | std::ios::binary);
    write_state_raw(grid, s, f);
  }
}

int run_simulate(const RunConfig& c, std::ostream& log) {
  int snapshots = 0;
  const auto snapshot = [&](const Grid& grid, const SimState& s, int step) {
    if (c.numerics.sim.snapshot_every <= 0) return;
    std::ostringstream stem;
    stem << "snapshot_" << std::setw(6) << std::setfill('0') << step;
    dump_state(c, grid, s, stem.str());
    ++snapshots;
  };
  const WedgeRunResult r = run_wedge(c.problem, c.numerics.sim, snapshot);
  dump_state(c, r.grid, r.final_state, "state_final");
  {
    auto f = open_out(c.output.dir, "self_similar.csv");
    f << std::setprecision(12) << "i,j,x,y,rho,vx,vy,L,valid\n";
    const SelfSimilarField& fld = r.field;
    for (int j = 0; j < fld.ny; ++j) {
      for (int i = 0; i < fld.nx; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * fld.nx + i;
        const Vec2 x = fld.point(i, j);
        f << i << ',' << j << ',' << x.x << ',' << x.y << ',' << fld.rho[k] << ',' << fld.vx[k]
          << ',' << fld.vy[k] << ',' << fld.L[k] << ',' << int(fld.valid[k]) << '\n';
      }
    }
  }
  const double angle_err = std::abs(r.tip_fit.angle - r.predicted_angle) / kDeg;
  const double variation = std::max({r.probe_I.rho_rel_std, r.probe_I.speed_rel_std,
                                     r.probe_L.rho_rel_std, r.probe_L.speed_rel_std,
                                     r.probe_R.rho_rel_std, r.probe_R.speed_rel_std});
  const std::vector<std::pair<std::string, double>> rows = {
      {"steps", r.steps},
      {"tip_angle_deg", r.tip_fit.angle / kDeg},
      {"predicted_angle_deg", r.predicted_angle / kDeg},
      {"probe_L_M_min", r.probe_L.M_min},
      {"probe_L_L_min", r.probe_L.L_min},
      {"region_variation_max", variation},
      {"probe_elliptic_L_max", r.probe_elliptic.L_max},
      {"self_similarity_defect", r.defect},
      {"max_curl_smooth", r.max_curl_smooth},
      {"snapshots", snapshots}};
  {
    auto f = open_out(c.output.dir, "simulate_summary.csv");
    write_quantities(f, rows);
  }
  Report report{
      {"tip_shock_angle", angle_err < 2.0, angle_err, 2.0, {}},
      {"tip_downstream_supersonic", r.probe_L.M_min > 1.0 && r.probe_L.L_min > 1.0,
       std::min(r.probe_L.M_min, r.probe_L.L_min), 1.0, {}},
      {"constant_regions", variation < 0.01, variation, 0.01, {}},
      {"self_similarity", r.defect < 0.05, r.defect, 0.05, {}}};
  {
    auto f = open_out(c.output.dir, "simulate_report.csv");
    write_report_csv(report, f);
  }
  return verdict(report, c.strict, log);
}

void write_elliptic(const RunConfig& c, const WavePattern& w, const EllipticSolution& s) {
  {
    auto f = open_out(c.output.dir, "elliptic_nodes.csv");
    write_solution_csv(s, f);
  }
  {
    auto f = open_out(c.output.dir, "elliptic_shock.csv");
    write_shock_csv(w, s, f);
  }
  {
    auto f = open_out(c.output.dir, "elliptic_history.csv");
    write_history_csv(s, f);
  }
  auto f = open_out(c.output.dir, "pattern.csv");
  write_pattern_csv(w, f);
}

int report_solution(const RunConfig& c, const WavePattern& w, const EllipticSolution& s,
                    const std::string& stem, std::ostream& log) {
  const VerifySummary v = verify_solution(w, s, c.numerics.diagnostics);
  {
    auto f = open_out(c.output.dir, stem + ".csv");
    write_report_csv(v.report, f);
  }
  {
    auto f = open_out(c.output.dir, stem + ".txt");
    write_report_text(v.report, f);
  }
  return verdict(v.report, c.strict, log);
}

int run_elliptic(const RunConfig& c, std::ostream& log) {
  const ContinuationResult r = solve_with_continuation(c.problem, c.numerics.elliptic,
                                                        c.numerics.eps_start);
  write_elliptic(c, r.pattern, r.solution);
  log << "epsilon path:";
  for (double e : r.path) log << ' ' << e;
  log << "\niterations=" << r.solution.history.size()
      << " residual=" << r.solution.residual.combined() << '\n';
  if (!r.solution.converged) {
    log << "no convergence: " << r.solution.failure << '\n';
    return kExitSolver;
  }
  return report_solution(c, r.pattern, r.solution, "elliptic_report", log);
}

int run_verify(const RunConfig& c, std::ostream& log) {
  const WavePattern w = build(c.problem);
  const auto path = c.output.solution.value_or(c.output.dir / "elliptic_nodes.csv");
  std::ifstream in(path);
  if (!in) throw ConfigError("solution", "cannot read " + path.string());
  const EllipticSolution s = read_solution_csv(w, in);
  if (!s.converged) {
    log << "stored solution is not converged (residual " << s.residual.combined() << ")\n";
    return kExitSolver;
  }
  return report_solution(c, w, s, "verify_report", log);
}

struct SweepRow {
  double epsilon = 0.0;
  int sigma_nodes = 0;
  bool converged = false;
  int iterations = 0;
  int path_length = 0;
  double residual = 0.0;
  double corner_L = 0.0;
  double corner_R = 0.0;
  double max_L2 = 0.0;
  double min_rho = 0.0;
  double weak = 0.0;
  double chi_t = 0.0;
  bool all_pass = false;
  std::string failure;
};

SweepRow sweep_one(const RunConfig& c, double eps, int n) {
  SweepRow row;
  row.epsilon = eps;
  row.sigma_nodes = n;
  try {
    ProblemConfig p = c.problem;
    p.epsilon = eps;
    EllipticConfig ec = c.numerics.elliptic;
    ec.sigma_nodes = n;
    ec.zeta_nodes = (n + 1) / 2;
    const ContinuationResult r = solve_with_continuation(p, ec, c.numerics.eps_start);
    const EllipticSolution& s = r.solution;
    row.converged = s.converged;
    row.iterations = static_cast<int>(s.history.size());
    row.path_length = static_cast<int>(r.path.size());
    row.residual = s.residual.combined();
    const double scale = std::sqrt(eps) * r.pattern.R.c;
    row.corner_L = distance(s.corner_L(), r.pattern.xi_L_star) / scale;
    row.corner_R = distance(s.corner_R(), r.pattern.xi_R_star) / scale;
    if (!s.converged) {
      row.failure = s.failure;
      return row;
    }
    const VerifySummary v = verify_solution(r.pattern, s, c.numerics.diagnostics);
    row.max_L2 = v.max_L2_off_arcs;
    row.min_rho = v.min_rho;
    row.weak = v.weak;
    row.chi_t = std::max(v.chi_t_L, v.chi_t_R);
    row.all_pass = all_pass(v.report);
  } catch (const Error& e) {
    row.failure = e.what();
  }
  return row;
}

int run_sweep(const RunConfig& c, std::ostream& log) {
  std::vector<std::pair<double, int>> tasks;
  for (int n : c.numerics.resolutions) {
    for (double e : c.numerics.epsilons) tasks.emplace_back(e, n);
  }
  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> workers;
    const unsigned count = worker_count(tasks.size());
    for (unsigned t = 0; t < count; ++t) {
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
          rows[k] = sweep_one(c, tasks[k].first, tasks[k].second);
        }
      });
    }
  }
  {
    auto f = open_out(c.output.dir, "sweep.csv");
    f << std::setprecision(12)
      << "epsilon,sigma_nodes,converged,iterations,continuation_steps,residual,corner_L_offset,"
         "corner_R_offset,max_L2,min_rho,weak_residual,max_chi_t_over_c,all_pass,failure\n";
    for (const auto& r : rows) {
      f << r.epsilon << ',' << r.sigma_nodes << ',' << r.converged << ',' << r.iterations << ','
        << r.path_length << ',' << r.residual << ',' << r.corner_L << ',' << r.corner_R << ','
        << r.max_L2 << ',' << r.min_rho << ',' << r.weak << ',' << r.chi_t << ',' << r.all_pass
        << ",\"" << r.failure << "\"\n";
    }
  }
  Report report;
  bool all_converged = true;
  for (const auto& r : rows) {
    all_converged = all_converged && r.converged;
    std::ostringstream name;
    name << "run_eps" << r.epsilon << "_n" << r.sigma_nodes;
    report.push_back({name.str(), r.converged && r.all_pass, r.residual, 1e-6, r.failure});
  }
  for (int n : c.numerics.resolutions) {
    std::vector<double> eps, weak, root_eps, chi;
    for (const auto& r : rows) {
      if (r.sigma_nodes != n || !r.converged) continue;
      eps.push_back(r.epsilon);
      weak.push_back(r.weak);
      root_eps.push_back(std::sqrt(r.epsilon));
      chi.push_back(r.chi_t);
    }
    if (eps.size() < 2) continue;
    const std::string tag = "_n" + std::to_string(n);
    if (c.numerics.diagnostics.weak_residual) {
      const double ws = loglog_slope(eps, weak);
      report.push_back({"weak_residual_slope" + tag, ws >= 0.3 && ws <= 0.7, ws, 0.5, "[0.3, 0.7]"});
    }
    const double cs = loglog_slope(root_eps, chi);
    report.push_back({"chi_t_slope" + tag, cs >= 0.3 && cs <= 3.0, cs, 1.0, "[0.3, 3]"});
  }
  {
    auto f = open_out(c.output.dir, "sweep_report.csv");
    write_report_csv(report, f);
  }
  const int v = verdict(report, c.strict, log);
  return all_converged ? v : kExitSolver;
}

const char* error_kind(const Error& e) {
  if (dynamic_cast<const NoAttachedShock*>(&e)) return "NoAttachedShock";
  if (dynamic_cast<const SupersonicityViolation*>(&e)) return "SupersonicityViolation";
  if (dynamic_cast<const GeometryError*>(&e)) return "GeometryError";
  if (dynamic_cast<const NoSonicIntersection*>(&e)) return "NoSonicIntersection";
  if (dynamic_cast<const NoPolarError*>(&e)) return "NoPolarError";
  if (dynamic_cast<const InadmissibleShock*>(&e)) return "InadmissibleShock";
  if (dynamic_cast<const WrongSideError*>(&e)) return "WrongSideError";
  if (dynamic_cast<const VacuumError*>(&e)) return "VacuumError";
  if (dynamic_cast<const CflError*>(&e)) return "CflError";
  if (dynamic_cast<const MappingError*>(&e)) return "MappingError";
  if (dynamic_cast<const InnerSolveError*>(&e)) return "InnerSolveError";
  if (dynamic_cast<const CornerEscapeError*>(&e)) return "CornerEscapeError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  return "Error";
}

}  // namespace

Command parse_command(std::string_view name) {
  static const std::map<std::string, Command, std::less<>> names = {
      {"polar", Command::polar},       {"pattern", Command::pattern},
      {"simulate", Command::simulate}, {"elliptic", Command::elliptic},
      {"verify", Command::verify},     {"sweep", Command::sweep}};
  const auto it = names.find(name);
  if (it == names.end()) throw ConfigError("command", "unknown command '" + std::string(name) + "'");
  return it->second;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::polar: return "polar";
    case Command::pattern: return "pattern";
    case Command::simulate: return "simulate";
    case Command::elliptic: return "elliptic";
    case Command::verify: return "verify";
    case Command::sweep: return "sweep";
  }
  return "unknown";
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig c;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    // Commas separate assignments unless the next piece has no '=' (list values).
    std::vector<std::string> pieces;
    for (auto part : split_list(line)) {
      if (part.find('=') == std::string_view::npos && !pieces.empty()) {
        pieces.back() += ',';
        pieces.back() += std::string(part);
      } else {
        pieces.emplace_back(part);
      }
    }
    for (const auto& piece : pieces) {
      const auto eq = piece.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(std::string(trim(piece)),
                          "line " + std::to_string(line_no) + " is not key = value");
      }
      const std::string key(trim(std::string_view(piece).substr(0, eq)));
      assign(c, seen, key, trim(std::string_view(piece).substr(eq + 1)));
    }
  }
  return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate(const RunConfig& c) {
  require(c.command.has_value(), "command", "no command given");
  c.problem.validate();
  const Numerics& n = c.numerics;
  require(n.sim.nx >= 16, "nx", "must be at least 16");
  require(n.sim.ny >= 16, "ny", "must be at least 16");
  require(n.sim.cfl > 0.0 && n.sim.cfl < 1.0, "cfl", "must lie in (0, 1)");
  require(n.sim.t_final > 0.0, "t_final", "must be positive");
  require(n.sim.snapshot_every >= 0, "snapshot_every", "must be non-negative");
  n.elliptic.validate();
  require(n.eps_start > 0.0 && n.eps_start <= kEpsilonMax, "eps_start", "must lie in (0, 0.25]");
  require(!n.epsilons.empty(), "epsilons", "needs at least one value");
  for (double e : n.epsilons) require(e > 0.0 && e <= kEpsilonMax, "epsilons", "values must lie in (0, 0.25]");
  require(!n.resolutions.empty(), "resolutions", "needs at least one value");
  for (int r : n.resolutions) require(r >= 5, "resolutions", "values must be at least 5");
  require(n.polar_points >= 3, "polar_points", "must be at least 3");
  const DiagnosticOptions& d = n.diagnostics;
  require(d.grid_C > 0.0, "grid_C", "must be positive");
  require(d.arc_grid_C > 0.0, "arc_grid_C", "must be positive");
  require(d.window_C > 0.0, "window_C", "must be positive");
  require(d.corner_C > 0.0, "corner_C", "must be positive");
  require(d.bumps >= 10, "bumps", "needs at least 10 test functions");
  require(d.quadrature >= 16, "quadrature", "must be at least 16");
  switch (*c.command) {
    case Command::polar:
      require(c.problem.M_I.has_value(), "M_I", "polar needs the upstream Mach number");
      break;
    case Command::simulate:
      require(c.problem.M_I.has_value() && c.problem.tau.has_value(), "tau",
              "simulate needs the original form (M_I and tau)");
      break;
    case Command::elliptic:
    case Command::verify:
    case Command::sweep:
      require(c.problem.epsilon > 0.0, "epsilon", "the elliptic problem needs epsilon > 0");
      break;
    case Command::pattern:
      break;
  }
}

unsigned worker_count(std::size_t tasks) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("WEDGE_THREADS")) {
    const long long cap = to_integer("WEDGE_THREADS", trim(env));
    if (cap < 1) throw ConfigError("WEDGE_THREADS", "must be a positive integer");
    n = std::min<unsigned>(n, static_cast<unsigned>(std::min<long long>(cap, 1 << 16)));
  }
  return static_cast<unsigned>(std::clamp<std::size_t>(tasks, 1, n));
}

int dispatch(const RunConfig& config, std::ostream& log) {
  validate(config);
  ensure_dir(config.output.dir);
  switch (*config.command) {
    case Command::polar: return run_polar(config, log);
    case Command::pattern: return run_pattern(config, log);
    case Command::simulate: return run_simulate(config, log);
    case Command::elliptic: return run_elliptic(config, log);
    case Command::verify: return run_verify(config, log);
    case Command::sweep: return run_sweep(config, log);
  }
  return kExitConfig;
}

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-similar supersonic wedge flow under potential flow"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  bool strict = false;
  app.add_option("command", command, "polar | pattern | simulate | elliptic | verify | sweep");
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_flag("--strict", strict, "exit 3 when a diagnostic fails");
  app.add_option("--out", out_dir, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config_file(config_path);
    if (!command.empty()) cfg.command = parse_command(command);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    cfg.strict = cfg.strict || strict;
    return dispatch(cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "solver error [" << error_kind(e) << "]: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace wedge::cli
