#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "functionals.hpp"
#include "ground_state.hpp"
#include "slope.hpp"
#include "spectrum.hpp"
#include "version.hpp"

namespace nlslab {

using json = nlohmann::ordered_json;

namespace io {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      throw ConfigError("cannot create directory '" + path.parent_path().string() +
                        "': " + ec.message());
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  os << content;
  if (!os) throw ConfigError("write to '" + path.string() + "' failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

inline json config_to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["potential"] = c.potential;
  j["p"] = c.p;
  j["omega"] = c.omega;
  j["omega.lo"] = c.omega_lo;
  j["omega.hi"] = c.omega_hi;
  j["omega.count"] = c.omega_count;
  j["grid.dx"] = c.dx;
  j["grid.half_width"] = c.half_width;
  j["evolve.eps"] = c.eps;
  j["evolve.T"] = c.T;
  j["evolve.dt"] = c.dt;
  j["evolve.box_points"] = c.box_points;
  j["evolve.box_half_width"] = c.box_half_width;
  j["seed"] = detail::seeds_to_string(c.seeds);
  j["jobs"] = c.jobs;
  j["out"] = c.out_dir;
  j["oracle_mode"] = c.oracle_mode;
  return j;
}

// Every JSON document carries the tool version and the canonical config of
// the run that produced it, so a file is self-describing and reruns diff
// cleanly against each other.
inline json document_shell(const RunConfig& c) {
  json j;
  j["version"] = version_string();
  j["config"] = config_to_json(c);
  return j;
}

inline std::string csv_banner(const RunConfig& c) {
  return "# " + std::string(version_string()) + " | " + canonical_config(c, " ") + "\n";
}

inline json functionals_to_json(const FunctionalValues& f) {
  json j;
  j["E"] = f.E;
  j["S"] = f.S;
  j["K"] = f.K;
  j["Q"] = f.Q;
  j["N"] = f.N;
  return j;
}

inline json grid_to_json(const Grid& g) {
  json j;
  j["dx"] = g.dx;
  j["n"] = g.n;
  j["half_width"] = g.extent();
  j["staggered"] = g.staggered;
  return j;
}

inline json ground_state_to_json(const GroundState& gs, const RunConfig& c) {
  json j = document_shell(c);
  j["potential"] = gs.potential.label();
  j["omega"] = gs.omega;
  j["p"] = gs.p;
  j["omega1"] = gs.omega1;
  j["solver"] = gs.solver;
  j["phi0"] = gs.phi0;
  j["residual"] = gs.residual;
  j["residual_d2"] = gs.residual_d2;
  j["iterations"] = gs.iterations;
  j["functionals"] = functionals_to_json(evaluate_functionals(gs.profile, gs.potential, gs.omega, gs.p));
  j["grid"] = grid_to_json(gs.profile.grid);
  j["values"] = gs.profile.values;
  return j;
}

inline json eigs_to_json(const std::vector<double>& v) { return json(v); }

inline json spectrum_to_json(const SpectrumReport& r, const RunConfig& c) {
  json j = document_shell(c);
  j["potential"] = r.potential;
  j["omega"] = r.omega;
  j["p"] = r.p;
  j["omega1"] = r.omega1;
  j["plus_even"] = eigs_to_json(r.plus_even);
  j["plus_odd"] = eigs_to_json(r.plus_odd);
  j["minus_even"] = eigs_to_json(r.minus_even);
  j["nu"] = r.nu;
  j["nu_gap"] = r.nu_gap;
  j["morse_index_even"] = r.morse_even;
  j["morse_index_odd"] = r.morse_odd;
  j["morse_index"] = r.morse_index;
  j["kernel_defect_minus"] = r.kernel_defect_minus;
  j["kernel_cosine"] = r.kernel_cosine;
  j["quad_form_rel"] = r.quad_form_rel;
  j["spectral_gap"] = r.spectral_gap;
  if (r.essential_onset)
    j["essential_onset"] = *r.essential_onset;
  else
    j["essential_onset"] = nullptr;
  j["translation_mode_expected"] = r.translation_mode_expected;
  j["nu_negative"] = r.nu_negative;
  j["nu_simple"] = r.nu_simple;
  j["morse_ok"] = r.morse_ok;
  j["minus_nonnegative"] = r.minus_nonnegative;
  j["kernel_ok"] = r.kernel_ok;
  j["kernel_cosine_ok"] = r.cosine_ok;
  j["nondegenerate"] = r.nondegenerate;
  j["notes"] = r.notes;
  j["passed"] = r.passed;
  return j;
}

inline json window_to_json(const WindowBalance& w) {
  json j;
  j["valid"] = w.valid;
  j["r1"] = w.r1;
  j["r2"] = w.r2;
  j["flux_change"] = w.flux_change;
  j["expected"] = w.expected;
  j["residual"] = w.residual;
  return j;
}

inline json slope_to_json(const SlopeReport& r, const RunConfig& c) {
  json j = document_shell(c);
  j["potential"] = r.potential;
  j["omega"] = r.omega;
  j["p"] = r.p;
  j["omega1"] = r.omega1;
  j["mu"] = r.mu;
  j["mu_prime_solve"] = r.mu_prime_solve;
  j["mu_prime_fd"] = r.mu_prime_fd;
  j["fd_delta"] = r.fd_delta;
  j["sigma"] = r.sigma;
  j["residual_state"] = r.residual_state;
  j["residual_iden"] = r.residual_iden;
  j["residual_fm_mmp"] = r.residual_fm_mmp;
  j["residual_key1"] = r.residual_key1;
  j["key1_lhs"] = r.key1_lhs;
  j["key1_rhs"] = r.key1_rhs;
  j["static_virial_residual"] = r.static_virial_residual;
  j["a_coef"] = r.a_coef;
  j["b_coef"] = r.b_coef;
  j["b_coef_alt"] = r.b_coef_alt;
  j["c_coef"] = r.c_coef;
  j["ac_defect"] = r.ac_defect;
  j["upv_integral"] = r.upv_integral;
  j["v_at_0"] = r.sign.v_at_0;
  j["v_sign_changes"] = r.sign.sign_changes;
  j["v_positive_until"] = r.sign.positive_until;
  j["v_positive_set_is_interval"] = r.sign.positive_set_is_interval;
  j["window"] = window_to_json(r.window);
  j["fd_agrees"] = r.fd_agrees;
  j["verdict"] = r.verdict;
  return j;
}

inline const char* scan_csv_columns() {
  return "omega,mu,mu_prime_solve,mu_prime_fd,sigma,residual_iden,residual_fm_mmp,"
         "residual_key1,verdict\n";
}

inline std::string scan_to_csv(const SlopeScan& scan, const RunConfig& c) {
  std::string out = csv_banner(c);
  out += scan_csv_columns();
  for (const auto& pt : scan.points) {
    out += fmt_double(pt.omega);
    out += ",";
    out += fmt_double(pt.mu);
    out += ",";
    out += fmt_double(pt.mu_prime_solve);
    out += ",";
    out += fmt_double(pt.mu_prime_fd);
    out += ",";
    out += fmt_double(pt.sigma);
    out += ",";
    out += fmt_double(pt.residual_iden);
    out += ",";
    out += fmt_double(pt.residual_fm_mmp);
    out += ",";
    out += fmt_double(pt.residual_key1);
    out += ",";
    out += pt.verdict;
    out += "\n";
  }
  return out;
}

inline json scan_to_json(const SlopeScan& scan, const RunConfig& c) {
  json j = document_shell(c);
  j["potential"] = scan.potential;
  j["p"] = scan.p;
  j["omega1"] = scan.omega1;
  json pts = json::array();
  for (const auto& pt : scan.points) {
    json e;
    e["omega"] = pt.omega;
    e["mu"] = pt.mu;
    e["mu_prime_solve"] = pt.mu_prime_solve;
    e["mu_prime_fd"] = pt.mu_prime_fd;
    e["sigma"] = pt.sigma;
    e["residual_iden"] = pt.residual_iden;
    e["residual_fm_mmp"] = pt.residual_fm_mmp;
    e["residual_key1"] = pt.residual_key1;
    e["verdict"] = pt.verdict;
    if (!pt.error.empty()) e["error"] = pt.error;
    pts.push_back(std::move(e));
  }
  j["points"] = std::move(pts);
  j["all_stable"] = scan.all_stable;
  j["any_failed"] = scan.any_failed;
  return j;
}

}  // namespace io
}  // namespace nlslab
