#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "wedge/cli.hpp"
#include "wedge/errors.hpp"

using namespace wedge;
using namespace wedge::cli;
namespace fs = std::filesystem;

namespace {

// Fresh directory removed when the test ends.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("wedge_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "wedge");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config_key(const RunConfig& c) {
  try {
    validate(c);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return {};
}

constexpr const char* kWedge = "gamma = 1.4, M_I = 2.94, tau_deg = 10\n";

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("empty text keeps defaults and asks for a command") {
    const RunConfig c = parse_config_text("");
    CHECK_FALSE(c.command.has_value());
    CHECK(c.problem.gamma == 1.4);
    CHECK(c.problem.epsilon == kDefaultEpsilon);
    CHECK(config_key(c) == "command");
  }
  SUBCASE("one line sets the wedge case, angles in degrees") {
    RunConfig c = parse_config_text(kWedge);
    CHECK(c.problem.gamma == 1.4);
    REQUIRE(c.problem.M_I.has_value());
    CHECK(*c.problem.M_I == 2.94);
    REQUIRE(c.problem.tau.has_value());
    CHECK(*c.problem.tau == doctest::Approx(10.0 * std::numbers::pi / 180.0).epsilon(1e-15));
    c.command = Command::pattern;
    CHECK(config_key(c).empty());
  }
  SUBCASE("comments, blank lines and lists") {
    const RunConfig c = parse_config_text(
        "# header\n\ncommand = sweep   # trailing\nM_I_y = -2\nepsilons = 0.04, 0.01\nresolutions = 33, 65\n");
    CHECK(c.command == Command::sweep);
    CHECK(*c.problem.MIy == -2.0);
    CHECK(c.numerics.epsilons == std::vector<double>{0.04, 0.01});
    CHECK(c.numerics.resolutions == std::vector<int>{33, 65});
  }
  SUBCASE("errors name the key") {
    RunConfig c = parse_config_text("command = elliptic\nM_I_y = -2\nepsilon = -0.1\n");
    CHECK(config_key(c) == "epsilon");
    auto key_of = [](const char* text) {
      try {
        parse_config_text(text);
      } catch (const ConfigError& e) {
        return e.key();
      }
      return std::string{};
    };
    CHECK(key_of("warp = 9\n") == "warp");
    CHECK(key_of("gamma = 1.4\ngamma = 1.2\n") == "gamma");
    CHECK(key_of("tau = 0.1, tau_deg = 5\n") == "tau_deg");
    CHECK(key_of("nx = ten\n") == "nx");
    CHECK(key_of("cfl =\n") == "cfl");
    CHECK(key_of("format = tiff\n") == "format");
    c = parse_config_text("command = simulate\nM_I_y = -2\n");
    CHECK(config_key(c) == "tau");
    c = parse_config_text("command = elliptic\nM_I_y = -2\nsigma_nodes = 3\n");
    CHECK(config_key(c) == "sigma_nodes");
    CHECK_THROWS_AS(parse_command("draw"), ConfigError);
    CHECK(std::string(to_string(parse_command("verify"))) == "verify");
  }
  SUBCASE("missing file") {
    try {
      parse_config_file("/nonexistent/wedge.cfg");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "config");
    }
  }
}

TEST_CASE("worker count honours the thread cap") {
  ::setenv("WEDGE_THREADS", "2", 1);
  CHECK(worker_count(10) <= 2);
  CHECK(worker_count(1) == 1);
  ::setenv("WEDGE_THREADS", "0", 1);
  CHECK_THROWS_AS(worker_count(4), ConfigError);
  ::unsetenv("WEDGE_THREADS");
  CHECK(worker_count(0) == 1);
}

TEST_CASE("exit codes") {
  ScratchDir dir("codes");
  SUBCASE("bad configuration exits 2 naming the key") {
    const fs::path cfg = dir.write("bad.cfg", "M_I_y = -2\nepsilon = -0.1\n");
    const Outcome o = run({"elliptic", "--config", cfg.string(), "--out", dir.path().string()});
    CHECK(o.code == kExitConfig);
    CHECK(o.err.find("epsilon") != std::string::npos);
    CHECK(run({"pattern"}).code == kExitConfig);
    CHECK(run({"pattern", "--bogus"}).code == kExitConfig);
    CHECK(run({"pattern", "--config", "/nonexistent.cfg"}).code == kExitConfig);
  }
  SUBCASE("a wedge beyond detachment exits 1 with the failure kind") {
    const fs::path cfg = dir.write("steep.cfg", "gamma = 1.4, M_I = 2.94, tau_deg = 60\n");
    const Outcome o = run({"elliptic", "--config", cfg.string(), "--out", dir.path().string()});
    CHECK(o.code == kExitSolver);
    CHECK(o.err.find("NoAttachedShock") != std::string::npos);
  }
  SUBCASE("polar writes samples and the weak, strong and detachment summary") {
    const fs::path cfg = dir.write("polar.cfg", std::string(kWedge) + "polar_points = 101\n");
    const Outcome o = run({"polar", "--config", cfg.string(), "--out", dir.path().string()});
    CHECK(o.code == kExitOk);
    CHECK(fs::exists(dir.path() / "polar.csv"));
    const std::string summary = slurp(dir.path() / "polar_summary.csv");
    CHECK(summary.find("weak") != std::string::npos);
    CHECK(summary.find("strong") != std::string::npos);
  }
  SUBCASE("elliptic then verify on the straight-shock case passes") {
    const fs::path cfg = dir.write(
        "flat.cfg", "gamma = 1.0\nM_I_y = -2\nepsilon = 0.04\nsigma_nodes = 33\nzeta_nodes = 17\n"
                    "quadrature = 64\n");
    const std::string out = dir.path().string();
    CHECK(run({"elliptic", "--config", cfg.string(), "--out", out, "--strict"}).code == kExitOk);
    REQUIRE(fs::exists(dir.path() / "elliptic_nodes.csv"));
    const Outcome v = run({"verify", "--config", cfg.string(), "--out", out, "--strict"});
    CHECK(v.code == kExitOk);
    const std::string report = slurp(dir.path() / "verify_report.txt");
    CHECK(report.find("FAIL") == std::string::npos);
    CHECK(report.find("PASS") != std::string::npos);
  }
}

TEST_CASE("identical configurations give byte-identical outputs") {
  ScratchDir a("det_a"), b("det_b");
  const std::string text = std::string(kWedge) + "polar_points = 201\n";
  for (const ScratchDir* d : {&a, &b}) {
    const fs::path cfg = d->write("case.cfg", text);
    REQUIRE(run({"polar", "--config", cfg.string(), "--out", d->path().string()}).code == kExitOk);
    REQUIRE(run({"pattern", "--config", cfg.string(), "--out", d->path().string()}).code == kExitOk);
  }
  for (const char* f : {"polar.csv", "polar_summary.csv", "pattern.csv", "pattern_summary.csv"}) {
    CAPTURE(f);
    const std::string x = slurp(a.path() / f);
    CHECK_FALSE(x.empty());
    CHECK(x == slurp(b.path() / f));
  }
}
