#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nlslab/config.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;
using njson = nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nlslab_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + NLSLAB_BIN + "\" " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult res;
  res.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.out = slurp(out);
  res.err = slurp(err);
  return res;
}

njson load_json(const fs::path& p) {
  REQUIRE(fs::exists(p));
  return njson::parse(slurp(p));
}

}  // namespace

TEST_CASE("version and argument parsing") {
  const fs::path dir = scratch("version");
  const CliResult ver = run_cli("--version", dir);
  CHECK(ver.code == 0);
  CHECK(ver.out == "nlslab 0.1.0\n");

  CHECK(run_cli("", dir).code == 1);            // a subcommand is required
  CHECK(run_cli("frobnicate", dir).code == 1);  // and it has to be a known one
  CHECK(run_cli("scan --omega-range 1:2", dir).code == 1);  // lo:hi:n
}

TEST_CASE("groundstate writes a self-describing bundle") {
  const fs::path dir = scratch("groundstate");
  const CliResult res =
      run_cli("groundstate --potential harmonic:1 --omega 1 --p 3 --out " +
                  (dir / "gs").string(),
              dir);
  CHECK(res.code == 0);
  CHECK_THAT(res.out, ContainsSubstring("groundstate:"));
  CHECK_THAT(res.out, ContainsSubstring("phi0=1.76821"));
  CHECK_THAT(res.out, ContainsSubstring("solver=shooting"));

  const njson j = load_json(dir / "gs" / "groundstate.json");
  CHECK(j["version"] == "nlslab 0.1.0");
  CHECK(j["config"]["command"] == "groundstate");
  CHECK(j["config"]["potential"] == "harmonic:1");
  CHECK(j["potential"] == "harmonic:1");
  CHECK(j["omega"] == 1.0);
  CHECK(j["p"] == 3.0);
  CHECK(j["omega1"].get<double>() == Approx(-1.0).margin(1e-4));
  CHECK(j["phi0"].get<double>() == Approx(1.7682106609).margin(1e-8));
  CHECK(j["residual"].get<double>() < 1e-8);
  CHECK(j["iterations"].get<int>() > 10);
  CHECK(j["functionals"]["E"].get<double>() == Approx(0.14586941).margin(1e-6));
  CHECK(j["grid"]["dx"] == 0.005);
  CHECK(j["grid"]["n"] == 4001);
  CHECK(j["grid"]["half_width"] == 20.0);
  CHECK(j["grid"]["staggered"] == false);
  CHECK(j["values"].size() == 4001);
}

TEST_CASE("flags override the config file") {
  const fs::path dir = scratch("config_override");
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream os(cfg);
    os << "# frequencies and potential for the production run\n";
    os << "potential = harmonic:1\n";
    os << "omega = 5\n";
    os << "p = 3\n";
  }
  const CliResult res = run_cli("groundstate --config " + cfg.string() +
                                    " --omega 1 --p 5 --out " + (dir / "gs").string(),
                                dir);
  CHECK(res.code == 0);
  const njson j = load_json(dir / "gs" / "groundstate.json");
  CHECK(j["config"]["potential"] == "harmonic:1");  // from the file
  CHECK(j["config"]["omega"] == 1.0);               // flag wins over the file
  CHECK(j["config"]["p"] == 5.0);
  CHECK(j["phi0"].get<double>() == Approx(1.4435581152).margin(1e-6));
}

TEST_CASE("canonical config round trip") {
  nlslab::RunConfig c;
  c.command = "evolve";
  c.potential = "inverse:1:0.5";
  c.p = 2.5;
  c.omega = 3.25;
  c.omega_lo = 0.25;
  c.omega_hi = 64.0;
  c.omega_count = 7;
  c.dx = 2.5e-3;
  c.half_width = 30.0;
  c.eps = 5e-3;
  c.T = 12.5;
  c.dt = 5e-4;
  c.box_points = 4096;
  c.box_half_width = 25.0;
  c.seeds = {3, 5, 7};
  c.jobs = 4;
  c.out_dir = "results/run1";
  c.oracle_mode = true;
  CHECK(nlslab::parse_config(nlslab::canonical_config(c)) == c);

  // comments and blank lines are ignored; junk is named in the error
  nlslab::RunConfig base;
  const nlslab::RunConfig parsed =
      nlslab::parse_config("\n# comment\n  p = 4  \n\npotential = step:2:1\n", base);
  CHECK(parsed.p == 4.0);
  CHECK(parsed.potential == "step:2:1");
  CHECK_THROWS_MATCHES(nlslab::parse_config("bogus = 1"), nlslab::ConfigError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("unknown key")));
  CHECK_THROWS_AS(nlslab::parse_config("p = fast"), nlslab::ConfigError);
  CHECK_THROWS_AS(nlslab::parse_config("seed = 1,,2"), nlslab::ConfigError);
  CHECK_THROWS_AS(nlslab::parse_config("no equals sign here"), nlslab::ConfigError);

  nlslab::RunConfig bad;
  bad.p = 1.0;
  CHECK_THROWS_AS(nlslab::validate_config(bad), nlslab::ConfigError);
  bad = {};
  bad.command = "scan";
  bad.omega_lo = 0.0;
  CHECK_THROWS_AS(nlslab::validate_config(bad), nlslab::ConfigError);
  bad = {};
  bad.command = "evolve";
  bad.box_points = 1023;
  CHECK_THROWS_AS(nlslab::validate_config(bad), nlslab::ConfigError);
}

TEST_CASE("configuration errors exit with code 1") {
  const fs::path dir = scratch("config_errors");
  {
    const CliResult res =
        run_cli("groundstate --potential harmonic:1 --omega -2 --p 3 --out " + dir.string(), dir);
    CHECK(res.code == 1);
    CHECK_THAT(res.err, ContainsSubstring("omega"));
  }
  {
    const CliResult res =
        run_cli("groundstate --potential harmonic:1 --omega 1 --p 1 --out " + dir.string(), dir);
    CHECK(res.code == 1);
    CHECK_THAT(res.err, ContainsSubstring("'p'"));
  }
  // the flat potential needs the explicit oracle switch
  CHECK(run_cli("groundstate --potential zero --omega 1 --p 3 --out " + dir.string(), dir).code ==
        1);
  CHECK(run_cli("groundstate --potential zero --omega 1 --p 3 --oracle-mode --out " +
                    dir.string(),
                dir)
            .code == 0);
  CHECK(run_cli("groundstate --potential harmonic --omega 1 --p 3 --out " + dir.string(), dir)
            .code == 1);
  {
    const fs::path cfg = dir / "bad.cfg";
    std::ofstream(cfg) << "bogus = 1\n";
    const CliResult res = run_cli("groundstate --config " + cfg.string(), dir);
    CHECK(res.code == 1);
    CHECK_THAT(res.err, ContainsSubstring("unknown key"));
  }
  {  // perturbation beyond the linearized regime
    const CliResult res = run_cli(
        "evolve --potential harmonic:1 --omega 1 --p 3 --eps 0.5 --T 1 --box-points 128 --out " +
            dir.string(),
        dir);
    CHECK(res.code == 1);
    CHECK_THAT(res.err, ContainsSubstring("eps"));
  }
}

TEST_CASE("verify bundles") {
  const fs::path dir = scratch("verify");

  SECTION("trapped state passes every section") {
    const CliResult res = run_cli("verify --potential harmonic:1 --omega 1 --p 3 --out " +
                                      (dir / "h").string(),
                                  dir);
    CHECK(res.code == 0);
    CHECK_THAT(res.out, ContainsSubstring("passed=yes"));
    const njson j = load_json(dir / "h" / "verify.json");
    CHECK(j["passed"] == true);
    for (const char* key : {"monotone", "virial_monotone", "ground_state", "flux_monotonicity",
                            "uniqueness", "nondegeneracy", "slope_identities"})
      CHECK(j[key]["passed"] == true);
  }

  SECTION("flat potential fails the structural screens but solves cleanly") {
    const CliResult res = run_cli("verify --potential zero --oracle-mode --omega 1 --p 3 --out " +
                                      (dir / "z").string(),
                                  dir);
    CHECK(res.code == 3);
    CHECK_THAT(res.out, ContainsSubstring("passed=no"));
    const njson j = load_json(dir / "z" / "verify.json");
    CHECK(j["passed"] == false);
    CHECK(j["monotone"]["passed"] == false);
    CHECK(j["virial_monotone"]["passed"] == true);
    CHECK(j["ground_state"]["passed"] == true);
    CHECK(j["flux_monotonicity"]["passed"] == true);
    CHECK(j["nondegeneracy"]["passed"] == true);
    CHECK(j["slope_identities"]["passed"] == true);
    CHECK(j["uniqueness"]["passed"] == false);
    for (const auto& cond : j["uniqueness"]["conditions"]) {
      const bool expect = cond["name"] != "IV";  // scaling lower bound needs V' != 0
      CHECK(cond["passed"] == expect);
    }
  }
}

TEST_CASE("scan outputs and byte-stable reruns") {
  const fs::path dir = scratch("scan");
  const std::string out = (dir / "sc").string();
  const std::string cmd = "scan --potential harmonic:1 --p 3 --omega-range 0.5:2:3 --out " + out;

  const CliResult res = run_cli(cmd, dir);
  CHECK(res.code == 0);
  CHECK_THAT(res.out, ContainsSubstring("points=3 stable=3 failed=0"));

  const std::string csv = slurp(dir / "sc" / "scan.csv");
  std::istringstream lines(csv);
  std::string banner, header, row;
  std::getline(lines, banner);
  std::getline(lines, header);
  CHECK_THAT(banner, ContainsSubstring("# nlslab 0.1.0 | command = scan"));
  CHECK(header ==
        "omega,mu,mu_prime_solve,mu_prime_fd,sigma,residual_iden,residual_fm_mmp,"
        "residual_key1,verdict");
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    CHECK_THAT(row, ContainsSubstring(",stable"));
  }
  CHECK(rows == 3);

  const njson j = load_json(dir / "sc" / "scan.json");
  CHECK(j["all_stable"] == true);
  CHECK(j["any_failed"] == false);
  REQUIRE(j["points"].size() == 3);
  const double om1 = j["omega1"].get<double>();
  CHECK(om1 == Approx(-1.0).margin(1e-4));
  // the last frequency hits omega1 + hi exactly, the first sits at + lo
  CHECK(j["points"][2]["omega"].get<double>() == om1 + 2.0);
  CHECK(j["points"][0]["omega"].get<double>() == Approx(om1 + 0.5).margin(1e-12));

  const CliResult rerun = run_cli(cmd, dir);
  CHECK(rerun.code == 0);
  CHECK(slurp(dir / "sc" / "scan.csv") == csv);

  SECTION("a scan that cannot resolve the slope reports partial success") {
    const CliResult flat = run_cli(
        "scan --potential zero --oracle-mode --p 5 --omega-range 0.5:1:2 --out " +
            (dir / "crit").string(),
        dir);
    CHECK(flat.code == 3);
    const njson f = load_json(dir / "crit" / "scan.json");
    CHECK(f["all_stable"] == false);
    CHECK(f["any_failed"] == false);
    for (const auto& pt : f["points"]) CHECK(pt["verdict"] == "inconclusive");
  }
}

TEST_CASE("evolve outputs, determinism, and the conservation gate") {
  const fs::path dir = scratch("evolve");
  const std::string out = (dir / "ev").string();
  const std::string cmd =
      "evolve --potential harmonic:1 --omega 1 --p 3 --eps 0.01 --T 0.5 --dt 1e-3 "
      "--seed 3,5 --box-points 2048 --out " +
      out;

  const CliResult res = run_cli(cmd, dir);
  CHECK(res.code == 0);
  CHECK_THAT(res.out, ContainsSubstring("seeds=2"));
  CHECK_THAT(res.out, ContainsSubstring("aborted=no"));

  const njson j = load_json(dir / "ev" / "evolve.json");
  CHECK(j["passed"] == true);
  CHECK(j["distance_bound"] == 0.05);
  CHECK(j["max_distance"].get<double>() < 0.05);
  REQUIRE(j["runs"].size() == 2);
  CHECK(j["runs"][0]["seed"] == 3);
  CHECK(j["runs"][1]["seed"] == 5);
  for (const auto& run : j["runs"]) {
    CHECK(run["aborted"] == false);
    CHECK(run["within_bound"] == true);
    CHECK(run["steps_done"] == 500);
    CHECK(run["max_distance"].get<double>() > 0.0);
  }

  const std::string csv = slurp(dir / "ev" / "evolve_seed3.csv");
  REQUIRE(fs::exists(dir / "ev" / "evolve_seed5.csv"));
  std::istringstream lines(csv);
  std::string banner, header, row;
  std::getline(lines, banner);
  std::getline(lines, header);
  CHECK_THAT(banner, ContainsSubstring("# nlslab 0.1.0 | command = evolve"));
  CHECK(header == "t,distance,mass_drift,energy_drift");
  int rows = 0;
  while (std::getline(lines, row)) ++rows;
  CHECK(rows == 11);  // t = 0 plus 10 sampling strides

  const CliResult rerun = run_cli(cmd, dir);
  CHECK(rerun.code == 0);
  CHECK(slurp(dir / "ev" / "evolve_seed3.csv") == csv);

  SECTION("a drifting run aborts with the conservation exit code") {
    const CliResult bad = run_cli(
        "evolve --potential zero --oracle-mode --omega 1 --p 3 --eps 0.01 --T 5 --dt 0.5 "
        "--seed 1 --box-points 1024 --out " +
            (dir / "drift").string(),
        dir);
    CHECK(bad.code == 4);
    const njson d = load_json(dir / "drift" / "evolve.json");
    CHECK(d["passed"] == false);
    CHECK(d["runs"][0]["aborted"] == true);
    CHECK_THAT(d["runs"][0]["abort_reason"].get<std::string>(),
               ContainsSubstring("energy drift"));
  }
}

TEST_CASE("spectrum and slope commands") {
  const fs::path dir = scratch("spec_slope");
  {
    const CliResult res = run_cli("spectrum --potential harmonic:1 --omega 1 --p 3 --out " +
                                      (dir / "sp").string(),
                                  dir);
    CHECK(res.code == 0);
    CHECK_THAT(res.out, ContainsSubstring("spectrum: nu=-4.6278"));
    CHECK_THAT(res.out, ContainsSubstring("passed=yes"));
    const njson j = load_json(dir / "sp" / "spectrum.json");
    CHECK(j["morse_index"] == 1);
    CHECK(j["essential_onset"].is_null());
    CHECK(j["passed"] == true);
    CHECK(j["nu"].get<double>() == Approx(-4.6278098).margin(1e-6));
  }
  {
    const CliResult res = run_cli("slope --potential harmonic:1 --omega 1 --p 3 --out " +
                                      (dir / "sl").string(),
                                  dir);
    CHECK(res.code == 0);
    CHECK_THAT(res.out, ContainsSubstring("verdict=stable"));
    const njson j = load_json(dir / "sl" / "slope.json");
    CHECK(j["mu_prime_solve"].get<double>() == Approx(1.6349625).margin(1e-6));
    CHECK(j["fd_agrees"] == true);
    CHECK(j["verdict"] == "stable");
  }
}
