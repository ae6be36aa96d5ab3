#pragma once

#include <atomic>
#include <filesystem>
#include <iostream>
#include <thread>

#include "config.hpp"
#include "evolve.hpp"
#include "io.hpp"

namespace nlslab {
namespace detail {

inline GroundStateOptions ground_state_options(const RunConfig& c) {
  GroundStateOptions o;
  o.dx = c.dx;
  o.half_width = c.half_width;
  o.oracle_mode = c.oracle_mode;
  return o;
}

inline std::filesystem::path out_path(const RunConfig& c, const std::string& name) {
  return std::filesystem::path(c.out_dir) / name;
}

}  // namespace detail

inline int cmd_groundstate(const RunConfig& c, std::ostream& out) {
  const Potential V = Potential::parse(c.potential);
  const GroundState gs = find_ground_state_shooting(V, c.omega, c.p, detail::ground_state_options(c));
  io::write_text_file(detail::out_path(c, "groundstate.json"),
                      io::ground_state_to_json(gs, c).dump(2) + "\n");
  out << "groundstate: potential=" << gs.potential.label() << " omega=" << fmt_double(gs.omega)
      << " p=" << fmt_double(gs.p) << " phi0=" << fmt_double(gs.phi0)
      << " residual=" << fmt_double(gs.residual) << " solver=" << gs.solver << "\n";
  return kExitOk;
}

inline int cmd_spectrum(const RunConfig& c, std::ostream& out) {
  const Potential V = Potential::parse(c.potential);
  SpectrumOptions o;
  o.dx = c.dx;
  o.half_width = c.half_width;
  o.oracle_mode = c.oracle_mode;
  const SpectrumReport rep = analyze_spectrum(V, c.omega, c.p, o);
  io::write_text_file(detail::out_path(c, "spectrum.json"),
                      io::spectrum_to_json(rep, c).dump(2) + "\n");
  out << "spectrum: nu=" << fmt_double(rep.nu) << " morse_index=" << rep.morse_index
      << " kernel_defect=" << fmt_double(rep.kernel_defect_minus)
      << " nondegenerate=" << (rep.nondegenerate ? "yes" : "no")
      << " passed=" << (rep.passed ? "yes" : "no") << "\n";
  return kExitOk;
}

inline int cmd_slope(const RunConfig& c, std::ostream& out) {
  const Potential V = Potential::parse(c.potential);
  SlopeOptions o;
  o.dx = c.dx;
  o.half_width = c.half_width;
  o.oracle_mode = c.oracle_mode;
  const SlopeReport rep = slope_report(V, c.omega, c.p, o);
  io::write_text_file(detail::out_path(c, "slope.json"),
                      io::slope_to_json(rep, c).dump(2) + "\n");
  out << "slope: mu=" << fmt_double(rep.mu) << " mu'=" << fmt_double(rep.mu_prime_solve)
      << " fd=" << fmt_double(rep.mu_prime_fd) << " sigma=" << fmt_double(rep.sigma)
      << " verdict=" << rep.verdict << "\n";
  return kExitOk;
}

inline int cmd_scan(const RunConfig& c, std::ostream& out) {
  const Potential V = Potential::parse(c.potential);
  SlopeOptions o;
  o.dx = c.dx;
  o.half_width = c.half_width;
  o.oracle_mode = c.oracle_mode;
  const double om1 = c.oracle_mode && V.is_zero() ? 0.0 : omega1(V);
  o.omega1_hint = om1;
  const std::vector<double> omegas = log_spaced_offsets(om1, c.omega_lo, c.omega_hi, c.omega_count);
  const SlopeScan scan = slope_scan(V, c.p, omegas, o, c.jobs);
  io::write_text_file(detail::out_path(c, "scan.csv"), io::scan_to_csv(scan, c));
  io::write_text_file(detail::out_path(c, "scan.json"), io::scan_to_json(scan, c).dump(2) + "\n");
  std::size_t stable = 0, failed = 0;
  for (const auto& pt : scan.points) {
    if (pt.verdict == "stable") ++stable;
    if (!pt.error.empty()) ++failed;
  }
  out << "scan: points=" << scan.points.size() << " stable=" << stable << " failed=" << failed
      << " omega1=" << fmt_double(scan.omega1) << "\n";
  if (scan.any_failed || !scan.all_stable) return kExitPartial;
  return kExitOk;
}

inline int cmd_evolve(const RunConfig& c, std::ostream& out) {
  const Potential V = Potential::parse(c.potential);
  EvolveOptions o;
  o.box_points = c.box_points;
  o.box_half_width = c.box_half_width;
  o.dt = c.dt;
  o.dx = c.dx;
  o.gs_half_width = c.half_width;
  o.oracle_mode = c.oracle_mode;

  std::vector<EvolutionResult> results(c.seeds.size());
  std::vector<std::string> errors(c.seeds.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= c.seeds.size()) return;
      try {
        results[i] = stability_experiment(V, c.omega, c.p, c.eps, c.T, c.seeds[i], o);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t pool =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, c.jobs)), c.seeds.size());
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // A configuration problem (bad eps, phase wrap at t = 0) is the same for
  // every seed; surface it as such rather than as a failed run.
  for (const auto& msg : errors)
    if (!msg.empty()) throw ConfigError(msg);

  json bundle = io::document_shell(c);
  bundle["potential"] = V.label();
  bundle["omega"] = c.omega;
  bundle["p"] = c.p;
  bundle["eps"] = c.eps;
  bundle["T"] = c.T;
  json runs = json::array();
  double worst = 0.0;
  bool any_aborted = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const EvolutionResult& r = results[i];
    any_aborted = any_aborted || r.aborted;
    worst = std::max(worst, r.max_distance);

    std::string csv = io::csv_banner(c);
    csv += "t,distance,mass_drift,energy_drift\n";
    for (const auto& s : r.samples) {
      csv += fmt_double(s.t);
      csv += ",";
      csv += fmt_double(s.distance);
      csv += ",";
      csv += fmt_double(s.mass_drift);
      csv += ",";
      csv += fmt_double(s.energy_drift);
      csv += "\n";
    }
    io::write_text_file(detail::out_path(c, "evolve_seed" + std::to_string(r.seed) + ".csv"), csv);

    json e;
    e["seed"] = r.seed;
    e["max_distance"] = r.max_distance;
    e["mass0"] = r.mass0;
    e["energy0"] = r.energy0;
    e["phi_x_norm"] = r.phi_x_norm;
    e["steps_done"] = r.steps_done;
    e["aborted"] = r.aborted;
    if (r.aborted) e["abort_reason"] = r.abort_reason;
    e["within_bound"] = !r.aborted && r.max_distance <= 5.0 * c.eps;
    runs.push_back(std::move(e));
  }
  bundle["runs"] = std::move(runs);
  bundle["max_distance"] = worst;
  bundle["distance_bound"] = 5.0 * c.eps;
  const bool within = !any_aborted && worst <= 5.0 * c.eps;
  bundle["passed"] = within;
  io::write_text_file(detail::out_path(c, "evolve.json"), bundle.dump(2) + "\n");

  out << "evolve: seeds=" << results.size() << " max_distance=" << fmt_double(worst)
      << " bound=" << fmt_double(5.0 * c.eps) << " aborted=" << (any_aborted ? "yes" : "no")
      << "\n";
  if (any_aborted) return kExitConservation;
  return within ? kExitOk : kExitPartial;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
  const Potential V = Potential::parse(c.potential);
  if (!(c.p > 1.0)) throw ConfigError("verify: p must exceed 1");

  json bundle = io::document_shell(c);
  bundle["potential"] = V.label();
  bundle["omega"] = c.omega;
  bundle["p"] = c.p;
  bool all_passed = true;
  const auto record = [&](const char* key, json j, bool passed) {
    j["passed"] = passed;
    bundle[key] = std::move(j);
    all_passed = all_passed && passed;
  };
  const auto record_error = [&](const char* key, const std::exception& e) {
    json j;
    j["error"] = e.what();
    record(key, std::move(j), false);
  };

  // Structural conditions on the potential itself. The audit always reports
  // them instead of refusing up front, so a failing potential still produces
  // a bundle with the failure named.
  const Grid probe = Grid::half_line(20.0, 1e-2, V.singular_at_origin());
  {
    const CheckReport v1 = check_v1(V, probe);
    json j;
    j["detail"] = v1.detail;
    j["worst"] = v1.worst;
    record("monotone", j, v1.passed);
  }
  {
    const CheckReport v2 = check_v2(V, probe, c.p);
    json j;
    j["detail"] = v2.detail;
    j["worst"] = v2.worst;
    record("virial_monotone", j, v2.passed);
  }

  GroundStateOptions gopt = detail::ground_state_options(c);
  gopt.oracle_mode = true;  // gates are reported above, not enforced twice
  std::optional<GroundState> gs;
  try {
    gs = find_ground_state_shooting(V, c.omega, c.p, gopt);
    json j;
    j["phi0"] = gs->phi0;
    j["residual"] = gs->residual;
    j["omega1"] = gs->omega1;
    record("ground_state", j, gs->residual < 1e-6 * gs->phi0);
  } catch (const std::exception& e) {
    record_error("ground_state", e);
  }

  if (gs) {
    try {
      const PohozaevReport rep = pohozaev_check(*gs);
      json j;
      j["defect_ok"] = rep.defect_ok;
      j["nonnegative"] = rep.nonnegative;
      j["nonincreasing"] = rep.nonincreasing;
      j["flux_drained"] = rep.j_end_ok;
      j["max_defect"] = rep.max_defect;
      j["max_defect_margin"] = rep.max_defect_margin;
      j["min_j"] = rep.min_j;
      j["j_origin"] = rep.j_origin;
      j["j_end"] = rep.j_end;
      record("flux_monotonicity", j, rep.passed);
    } catch (const std::exception& e) {
      record_error("flux_monotonicity", e);
    }

    try {
      const UniquenessReport rep =
          uniqueness_conditions(V, c.omega, c.p, gs->profile.grid.extent());
      json j;
      json conds = json::array();
      for (const auto& cond : rep.conditions) {
        json e;
        e["name"] = cond.name;
        e["passed"] = cond.passed;
        e["value"] = cond.value;
        if (!cond.detail.empty()) e["detail"] = cond.detail;
        conds.push_back(std::move(e));
      }
      j["conditions"] = std::move(conds);
      record("uniqueness", j, rep.passed);
    } catch (const std::exception& e) {
      record_error("uniqueness", e);
    }

    try {
      const SpectrumReport rep = analyze_spectrum(*gs);
      json j;
      j["nu"] = rep.nu;
      j["morse_index"] = rep.morse_index;
      j["kernel_defect_minus"] = rep.kernel_defect_minus;
      j["kernel_cosine"] = rep.kernel_cosine;
      j["minus_nonnegative"] = rep.minus_nonnegative;
      j["nondegenerate"] = rep.nondegenerate;
      record("nondegeneracy", j, rep.passed);
    } catch (const std::exception& e) {
      record_error("nondegeneracy", e);
    }

    try {
      SlopeOptions sopt;
      sopt.dx = c.dx;
      sopt.half_width = c.half_width;
      sopt.oracle_mode = true;
      sopt.omega1_hint = gs->omega1;
      sopt.bracket = AmplitudeBracket{0.995 * gs->bisect_phi0, 1.005 * gs->bisect_phi0};
      const SlopeReport rep = slope_report(V, c.omega, c.p, sopt);
      const double key1_scale = std::max({1.0, std::abs(rep.key1_lhs), std::abs(rep.key1_rhs)});
      const bool fm_ok = std::abs(rep.residual_fm_mmp) <= 1e-6;
      const bool key1_ok = std::abs(rep.residual_key1) <= 1e-4 * key1_scale;
      json j;
      j["mu_prime_solve"] = rep.mu_prime_solve;
      j["mu_prime_fd"] = rep.mu_prime_fd;
      j["residual_fm_mmp"] = rep.residual_fm_mmp;
      j["residual_key1"] = rep.residual_key1;
      j["static_virial_residual"] = rep.static_virial_residual;
      j["fd_agrees"] = rep.fd_agrees;
      j["verdict"] = rep.verdict;
      record("slope_identities", j, fm_ok && key1_ok && rep.fd_agrees);
    } catch (const std::exception& e) {
      record_error("slope_identities", e);
    }
  }

  bundle["passed"] = all_passed;
  io::write_text_file(detail::out_path(c, "verify.json"), bundle.dump(2) + "\n");
  out << "verify: potential=" << V.label() << " omega=" << fmt_double(c.omega)
      << " p=" << fmt_double(c.p) << " passed=" << (all_passed ? "yes" : "no") << "\n";
  return all_passed ? kExitOk : kExitPartial;
}

// Dispatch with the documented exit contract: 0 success, 1 configuration,
// 2 solver failure, 3 partial (some checks or points failed), 4 conservation.
inline int run_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    validate_config(c);
    if (c.command == "groundstate") return cmd_groundstate(c, out);
    if (c.command == "spectrum") return cmd_spectrum(c, out);
    if (c.command == "slope") return cmd_slope(c, out);
    if (c.command == "scan") return cmd_scan(c, out);
    if (c.command == "evolve") return cmd_evolve(c, out);
    if (c.command == "verify") return cmd_verify(c, out);
    throw ConfigError("config: unknown command '" + c.command + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConservationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConservation;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace nlslab
