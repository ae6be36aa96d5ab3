// Command line front end. All values are funneled through the same key =
// value machinery as the config file, so a flag and a file entry are parsed
// identically and flags given on the command line override the file.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <nlslab/runner.hpp>
#include <nlslab/version.hpp>

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void add_common_options(CLI::App* sub, KeyValues& kv, std::string& config_path) {
  const auto capture = [&kv](const char* key) {
    return [&kv, key](const std::string& v) { kv.emplace_back(key, v); };
  };
  sub->add_option_function<std::string>("--potential", capture("potential"),
                                        "potential, e.g. zero, harmonic:1, inverse:1:0.5, "
                                        "step:2:1, or a '+' joined sum");
  sub->add_option_function<std::string>("--p", capture("p"), "nonlinearity exponent, 1 < p");
  sub->add_option_function<std::string>("--dx", capture("grid.dx"), "radial grid spacing");
  sub->add_option_function<std::string>("--half-width", capture("grid.half_width"),
                                        "radial domain half width (0: automatic)");
  sub->add_option_function<std::string>("--out", capture("out"), "output directory");
  sub->add_flag_callback(
      "--oracle-mode", [&kv]() { kv.emplace_back("oracle_mode", "true"); },
      "skip the potential admissibility gates (reference potentials)");
  sub->add_option("--config", config_path, "key = value config file; flags override it");
}

void add_omega_option(CLI::App* sub, KeyValues& kv) {
  sub->add_option_function<std::string>(
      "--omega", [&kv](const std::string& v) { kv.emplace_back("omega", v); },
      "frequency, must exceed omega1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlslab: ground states, spectra, slope stability and orbital evolution\n"
               "for the focusing 1d NLS with a radial potential"};
  app.set_version_flag("--version", nlslab::version_string());
  app.require_subcommand(1);

  KeyValues kv;
  std::string config_path;

  CLI::App* gs = app.add_subcommand("groundstate", "solve the radial ground state profile");
  add_common_options(gs, kv, config_path);
  add_omega_option(gs, kv);

  CLI::App* spec = app.add_subcommand("spectrum", "linearized operators around the ground state");
  add_common_options(spec, kv, config_path);
  add_omega_option(spec, kv);

  CLI::App* slope = app.add_subcommand("slope", "mass slope mu'(omega) and its cross checks");
  add_common_options(slope, kv, config_path);
  add_omega_option(slope, kv);

  CLI::App* scan = app.add_subcommand("scan", "slope verdicts over a frequency range");
  add_common_options(scan, kv, config_path);
  scan->add_option_function<std::string>(
      "--omega-range",
      [&kv](const std::string& v) {
        const auto c1 = v.find(':');
        const auto c2 = v.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
          throw CLI::ValidationError("--omega-range", "expected lo:hi:n offsets above omega1");
        kv.emplace_back("omega.lo", v.substr(0, c1));
        kv.emplace_back("omega.hi", v.substr(c1 + 1, c2 - c1 - 1));
        kv.emplace_back("omega.count", v.substr(c2 + 1));
      },
      "log-spaced frequency offsets above omega1, lo:hi:n");
  scan->add_option_function<std::string>(
      "--jobs", [&kv](const std::string& v) { kv.emplace_back("jobs", v); },
      "worker threads");

  CLI::App* evolve = app.add_subcommand("evolve", "perturbed orbital stability experiment");
  add_common_options(evolve, kv, config_path);
  add_omega_option(evolve, kv);
  evolve->add_option_function<std::string>(
      "--eps", [&kv](const std::string& v) { kv.emplace_back("evolve.eps", v); },
      "perturbation size in the energy norm");
  evolve->add_option_function<std::string>(
      "--T", [&kv](const std::string& v) { kv.emplace_back("evolve.T", v); }, "final time");
  evolve->add_option_function<std::string>(
      "--dt", [&kv](const std::string& v) { kv.emplace_back("evolve.dt", v); }, "time step");
  evolve->add_option_function<std::string>(
      "--seed", [&kv](const std::string& v) { kv.emplace_back("seed", v); },
      "comma separated perturbation seeds");
  evolve->add_option_function<std::string>(
      "--box-points", [&kv](const std::string& v) { kv.emplace_back("evolve.box_points", v); },
      "periodic box points (even)");
  evolve->add_option_function<std::string>(
      "--box-half-width",
      [&kv](const std::string& v) { kv.emplace_back("evolve.box_half_width", v); },
      "periodic box half width (0: automatic)");
  evolve->add_option_function<std::string>(
      "--jobs", [&kv](const std::string& v) { kv.emplace_back("jobs", v); },
      "worker threads across seeds");

  CLI::App* verify = app.add_subcommand("verify", "full audit bundle for one ground state");
  add_common_options(verify, kv, config_path);
  add_omega_option(verify, kv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? nlslab::kExitOk : nlslab::kExitConfig;
  }

  try {
    nlslab::RunConfig cfg;
    if (!config_path.empty())
      cfg = nlslab::parse_config(nlslab::io::read_text_file(config_path), cfg);
    cfg.command = app.get_subcommands().at(0)->get_name();
    for (const auto& [key, value] : kv) nlslab::apply_config_key(cfg, key, value);
    return nlslab::run_command(cfg, std::cout, std::cerr);
  } catch (const nlslab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nlslab::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nlslab::kExitSolver;
  }
}
