#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "grid.hpp"
#include "ground_state.hpp"
#include "potential.hpp"
#include "space.hpp"

namespace nlslab {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

// Potential clamped to be C^1 and bounded on the periodic box: values are
// taken at a remapped radius that freezes smoothly past clamp_start * L, so
// confining potentials stop growing before the wrap-around.
inline std::vector<double> clamped_potential_values(const Potential& V, const Grid& box,
                                                    double clamp_start = 0.9) {
  if (!box.periodic) throw ConfigError("clamped_potential: needs a periodic box");
  const double L = box.extent();
  const double r0 = clamp_start * L;
  std::vector<double> out(box.n);
  for (std::size_t i = 0; i < box.n; ++i) {
    const double r = std::fabs(box.x(i));
    double xi = r;
    if (r > r0) {
      const double t = (r - r0) / (L - r0);
      xi = r0 + (L - r0) * t * (1.0 - 0.5 * t);
    }
    out[i] = V.value(xi);
  }
  return out;
}

// Strang-split spectral integrator for i psi_t = -psi_xx + V psi - |psi|^{p-1} psi
// on a periodic box. Deterministic by construction: FFTW_ESTIMATE plans only
// (measured plans change with machine load and break byte-reproducibility).
class SplitStepIntegrator {
 public:
  struct Params {
    Grid box;
    Potential potential;
    double p = 3.0;
    double dt = 1e-3;
    bool include_nonlinearity = true;
    double clamp_start = 0.9;
  };

  explicit SplitStepIntegrator(const Params& prm)
      : box_(prm.box), p_(prm.p), dt_(prm.dt), nonlinear_(prm.include_nonlinearity) {
    if (!box_.periodic) throw ConfigError("evolve: grid must be a periodic box");
    if (!(dt_ > 0.0)) throw ConfigError("evolve: dt must be positive");
    const std::size_t n = box_.n;
    vc_ = clamped_potential_values(prm.potential, box_, prm.clamp_start);
    k2_.resize(n);
    kin_phase_.resize(n);
    const double L = box_.extent();
    for (std::size_t j = 0; j < n; ++j) {
      const double m = (j <= n / 2) ? static_cast<double>(j)
                                    : static_cast<double>(j) - static_cast<double>(n);
      const double k = M_PI / L * m;
      k2_[j] = k * k;
      kin_phase_[j] = std::polar(1.0 / static_cast<double>(n), -k2_[j] * dt_);
    }
    buf_.resize(n);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      auto* raw = reinterpret_cast<fftw_complex*>(buf_.data());
      fwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (fwd_ == nullptr || bwd_ == nullptr)
      throw SolverError("evolve: FFT planning failed");
  }

  SplitStepIntegrator(const SplitStepIntegrator&) = delete;
  SplitStepIntegrator& operator=(const SplitStepIntegrator&) = delete;

  ~SplitStepIntegrator() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  const Grid& box() const { return box_; }
  double dt() const { return dt_; }
  const std::vector<double>& clamped_values() const { return vc_; }

  // largest |phase| per unit time of the potential half of the splitting
  double max_phase_rate(const ComplexProfile& psi) const {
    double m = 0.0;
    for (std::size_t i = 0; i < box_.n; ++i) {
      const double nl = nonlinear_ ? std::pow(std::abs(psi.values[i]), p_ - 1.0) : 0.0;
      m = std::max(m, std::fabs(vc_[i] - nl));
    }
    return m;
  }

  // count Strang steps; interior potential half-steps are fused
  void run(ComplexProfile& psi, long long steps) {
    if (steps <= 0) return;
    check(psi);
    half_potential(psi.values);
    for (long long s = 0;; ++s) {
      kinetic(psi.values);
      if (s + 1 == steps) break;
      full_potential(psi.values);
    }
    half_potential(psi.values);
  }

  void step(ComplexProfile& psi) { run(psi, 1); }

  double mass(const ComplexProfile& psi) const {
    double s = 0.0;
    for (const auto& z : psi.values) s += std::norm(z);
    return s * box_.dx;
  }

  // (1/2) int |psi_x|^2 + Vc |psi|^2 - (1/(p+1)) int |psi|^{p+1},
  // kinetic part evaluated spectrally (it is what the splitting conserves)
  double energy(const ComplexProfile& psi) {
    check(psi);
    const std::size_t n = box_.n;
    for (std::size_t i = 0; i < n; ++i) buf_[i] = psi.values[i];
    fftw_execute(fwd_);
    double kin = 0.0;
    for (std::size_t j = 0; j < n; ++j) kin += k2_[j] * std::norm(buf_[j]);
    kin *= box_.dx / static_cast<double>(n);
    double pot = 0.0, nl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a2 = std::norm(psi.values[i]);
      pot += vc_[i] * a2;
      if (nonlinear_) nl += std::pow(a2, 0.5 * (p_ + 1.0));
    }
    pot *= box_.dx;
    nl *= box_.dx;
    return 0.5 * (kin + pot) - nl / (p_ + 1.0);
  }

 private:
  void check(const ComplexProfile& psi) const {
    if (!psi.grid.same_layout(box_)) throw ConfigError("evolve: state grid mismatch");
  }

  void phase_kick(std::vector<std::complex<double>>& v, double tau) const {
    for (std::size_t i = 0; i < box_.n; ++i) {
      const double nl = nonlinear_ ? std::pow(std::abs(v[i]), p_ - 1.0) : 0.0;
      v[i] *= std::polar(1.0, -tau * (vc_[i] - nl));
    }
  }

  void half_potential(std::vector<std::complex<double>>& v) const { phase_kick(v, 0.5 * dt_); }
  void full_potential(std::vector<std::complex<double>>& v) const { phase_kick(v, dt_); }

  void kinetic(std::vector<std::complex<double>>& v) {
    const std::size_t n = box_.n;
    for (std::size_t i = 0; i < n; ++i) buf_[i] = v[i];
    fftw_execute(fwd_);
    for (std::size_t j = 0; j < n; ++j) buf_[j] *= kin_phase_[j];
    fftw_execute(bwd_);
    for (std::size_t i = 0; i < n; ++i) v[i] = buf_[i];
  }

  Grid box_;
  double p_, dt_;
  bool nonlinear_;
  std::vector<double> vc_, k2_;
  std::vector<std::complex<double>> kin_phase_;
  std::vector<std::complex<double>> buf_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

// Cubic (4-point Lagrange) resampling of an even half-line profile onto the
// box nodes. Linear interpolation would inject O(dx^2 phi'') ~ 1e-5 noise,
// well above the standing-wave budget; the cubic keeps it near rounding.
inline ComplexProfile resample_to_box(const Profile& half, const Grid& box) {
  if (half.grid.support != Support::half_line)
    throw ConfigError("resample_to_box: profile must be half-line");
  const Grid& g = half.grid;
  const auto node = [&](std::ptrdiff_t i) -> double {
    if (i < 0) i = g.staggered ? -1 - i : -i;  // even reflection through r = 0
    if (i >= static_cast<std::ptrdiff_t>(g.n)) return 0.0;
    return half.values[static_cast<std::size_t>(i)];
  };
  ComplexProfile out = make_profile<std::complex<double>>(box);
  for (std::size_t j = 0; j < box.n; ++j) {
    const double r = std::fabs(box.x(j));
    const double t = (r - g.x0) / g.dx;
    const std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(std::floor(t));
    const double s = t - static_cast<double>(i0);
    const double w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    const double w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    const double w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    out.values[j] = w0 * node(i0 - 1) + w1 * node(i0) + w2 * node(i0 + 1) + w3 * node(i0 + 2);
  }
  return out;
}

// Complex X(omega_tilde) pairing on the box, optionally restricted to
// |x| <= mask * L (the clamp region is excluded from distance measurements).
inline std::complex<double> x_pairing_box(const ComplexProfile& a, const ComplexProfile& b,
                                          const std::vector<double>& vc, double omega_tilde,
                                          double mask = 1.0) {
  const Grid& g = a.grid;
  if (!g.same_layout(b.grid)) throw ConfigError("x_pairing_box: grid mismatch");
  const std::vector<std::complex<double>> da = centered_derivative(a);
  const std::vector<std::complex<double>> db = centered_derivative(b);
  const double cut = mask * g.extent();
  std::complex<double> z{};
  for (std::size_t i = 0; i < g.n; ++i) {
    if (std::fabs(g.x(i)) > cut) continue;
    z += da[i] * std::conj(db[i]) + (vc[i] + omega_tilde) * a.values[i] * std::conj(b.values[i]);
  }
  return z * g.dx;
}

struct OrbitalDistance {
  double distance = 0.0;
  double theta = 0.0;  // optimal rotation angle
};

// Distance to the orbit of phi: min over theta of || e^{i theta} psi - phi ||
// in the X(omega_tilde) metric; the minimizer is theta = -arg <psi, phi>.
inline OrbitalDistance orbital_distance(const ComplexProfile& psi, const ComplexProfile& phi,
                                        const std::vector<double>& vc, double omega_tilde,
                                        double mask = 0.9) {
  const std::complex<double> z = x_pairing_box(psi, phi, vc, omega_tilde, mask);
  const double na = x_pairing_box(psi, psi, vc, omega_tilde, mask).real();
  const double nb = x_pairing_box(phi, phi, vc, omega_tilde, mask).real();
  OrbitalDistance out;
  out.theta = -std::arg(z);
  out.distance = std::sqrt(std::max(na + nb - 2.0 * std::abs(z), 0.0));
  return out;
}

// Band-limited random field: modes 1..16 in both directions with complex
// Gaussian coefficients. The Gaussian pairs come from a hand-rolled
// Box-Muller on the raw mt19937_64 stream: std::normal_distribution is not
// pinned across standard libraries and would break byte determinism.
inline ComplexProfile band_limited_field(const Grid& box, std::uint64_t seed) {
  if (!box.periodic) throw ConfigError("band_limited_field: needs a periodic box");
  std::uint64_t state = seed ^ 0x853C49E6748FEA9Bull;
  const auto next_u64 = [&]() {
    // xorshift* keeps the stream identical everywhere; quality is ample here
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545F4914F6CDD1Dull;
  };
  const auto uniform = [&]() {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return (u > 0.0) ? u : 0x1.0p-53;
  };
  const auto gaussian_pair = [&](double& g1, double& g2) {
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    g1 = rad * std::cos(2.0 * M_PI * u2);
    g2 = rad * std::sin(2.0 * M_PI * u2);
  };
  const double L = box.extent();
  ComplexProfile w = make_profile<std::complex<double>>(box);
  for (int m = 1; m <= 16; ++m) {
    double ar, ai, br, bi;
    gaussian_pair(ar, ai);
    gaussian_pair(br, bi);
    const std::complex<double> cp{ar / std::sqrt(2.0), ai / std::sqrt(2.0)};
    const std::complex<double> cm{br / std::sqrt(2.0), bi / std::sqrt(2.0)};
    const double k = M_PI * static_cast<double>(m) / L;
    for (std::size_t i = 0; i < box.n; ++i) {
      const double x = box.x(i);
      w.values[i] += cp * std::polar(1.0, k * x) + cm * std::polar(1.0, -k * x);
    }
  }
  return w;
}

// Perturbation orthogonal to the phase direction i*phi, unit X norm.
inline ComplexProfile make_perturbation(const ComplexProfile& phi, const Grid& box,
                                        const std::vector<double>& vc, double omega_tilde,
                                        std::uint64_t seed) {
  ComplexProfile w = band_limited_field(box, seed);
  const std::complex<double> iphi_norm =
      x_pairing_box(phi, phi, vc, omega_tilde, 1.0);  // == ||i phi||^2, phi real-valued
  const std::complex<double> overlap =
      x_pairing_box(w, phi, vc, omega_tilde, 1.0) * std::complex<double>(0.0, -1.0);
  // component along i*phi: <w, i phi> = -i <w, phi>
  const std::complex<double> coef = overlap / iphi_norm.real();
  for (std::size_t i = 0; i < box.n; ++i)
    w.values[i] -= coef * std::complex<double>(0.0, 1.0) * phi.values[i];
  const double nw = std::sqrt(x_pairing_box(w, w, vc, omega_tilde, 1.0).real());
  if (!(nw > 0.0)) throw SolverError("make_perturbation: degenerate draw");
  for (auto& z : w.values) z /= nw;
  return w;
}

struct TraceSample {
  double t = 0.0;
  double distance = 0.0;
  double mass_drift = 0.0;    // relative
  double energy_drift = 0.0;  // relative
};

struct EvolutionResult {
  std::vector<TraceSample> samples;
  double max_distance = 0.0;
  double mass0 = 0.0, energy0 = 0.0;
  double epsilon = 0.0, T = 0.0;
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string abort_reason;
  long long steps_done = 0;
  double phi_x_norm = 0.0;  // ||phi||_X in the measurement metric
};

struct EvolveOptions {
  std::size_t box_points = 8192;
  double box_half_width = 0.0;  // 0: max(1.5 * profile extent... chosen below)
  double dt = 1e-3;
  double clamp_start = 0.9;
  long long sample_every = 50;
  double dx = 5e-3;            // ground-state grid resolution
  double gs_half_width = 0.0;  // ground-state half-width (0: automatic)
  bool oracle_mode = false;
  std::optional<double> omega1_hint;
};

// Orbital stability experiment: perturb the ground state with a normalized
// band-limited field of size eps, run Strang splitting to time T, track the
// orbital distance and the conservation drifts. Conservation failure aborts
// the run and keeps the partial trace.
inline EvolutionResult stability_experiment(const Potential& V, double omega, double p,
                                            double eps, double T, std::uint64_t seed,
                                            const EvolveOptions& opt = {}) {
  if (!(T > 0.0)) throw ConfigError("evolve: T must be positive");
  if (!(eps >= 0.0)) throw ConfigError("evolve: eps must be nonnegative");
  GroundStateOptions gopt;
  gopt.dx = opt.dx;
  gopt.half_width = opt.gs_half_width;
  gopt.oracle_mode = opt.oracle_mode;
  gopt.omega1_hint = opt.omega1_hint;
  const GroundState gs = find_ground_state_shooting(V, omega, p, gopt);

  const double L = (opt.box_half_width > 0.0) ? opt.box_half_width
                                              : std::max(20.0, gs.profile.grid.extent());
  const Grid box = Grid::periodic_box(L, opt.box_points);
  SplitStepIntegrator::Params prm;
  prm.box = box;
  prm.potential = V;
  prm.p = p;
  prm.dt = opt.dt;
  prm.clamp_start = opt.clamp_start;
  SplitStepIntegrator integ(prm);

  const ComplexProfile phi_box = resample_to_box(gs.profile, box);
  const double omega_tilde = gs.omega1 + 1.0;
  const std::vector<double>& vc = integ.clamped_values();

  EvolutionResult res;
  res.epsilon = eps;
  res.T = T;
  res.seed = seed;
  res.phi_x_norm = std::sqrt(x_pairing_box(phi_box, phi_box, vc, omega_tilde, 1.0).real());
  if (eps > 0.1 * res.phi_x_norm)
    throw ConfigError("evolve: eps = " + fmt_double(eps) + " exceeds 10% of ||phi||_X = " +
                      fmt_double(res.phi_x_norm));

  ComplexProfile psi = phi_box;
  if (eps > 0.0) {
    const ComplexProfile w = make_perturbation(phi_box, box, vc, omega_tilde, seed);
    for (std::size_t i = 0; i < box.n; ++i) psi.values[i] += eps * w.values[i];
  }

  if (opt.dt * integ.max_phase_rate(psi) >= M_PI)
    throw ConfigError("evolve: dt * max|V - |psi|^{p-1}| exceeds pi (phase wrap); reduce dt");

  const long long steps = std::llround(T / opt.dt);
  if (steps <= 0) throw ConfigError("evolve: T shorter than one step");
  res.mass0 = integ.mass(psi);
  res.energy0 = integ.energy(psi);
  const double e_scale = std::max(std::fabs(res.energy0), 1.0);

  const auto record = [&](double t) {
    TraceSample s;
    s.t = t;
    s.distance = orbital_distance(psi, phi_box, vc, omega_tilde).distance;
    s.mass_drift = std::fabs(integ.mass(psi) - res.mass0) / res.mass0;
    s.energy_drift = std::fabs(integ.energy(psi) - res.energy0) / e_scale;
    res.samples.push_back(s);
    res.max_distance = std::max(res.max_distance, s.distance);
    if (s.mass_drift > 1e-10) {
      res.aborted = true;
      res.abort_reason = "mass drift " + fmt_double(s.mass_drift) + " at t = " + fmt_double(t);
    } else if (s.energy_drift > 1e-7) {
      res.aborted = true;
      res.abort_reason = "energy drift " + fmt_double(s.energy_drift) + " at t = " + fmt_double(t);
    } else if (opt.dt * integ.max_phase_rate(psi) >= M_PI) {
      res.aborted = true;
      res.abort_reason = "phase increment reached pi at t = " + fmt_double(t);
    }
    return !res.aborted;
  };

  record(0.0);
  const long long stride = std::max<long long>(1, opt.sample_every);
  long long done = 0;
  while (done < steps && !res.aborted) {
    const long long chunk = std::min(stride, steps - done);
    integ.run(psi, chunk);
    done += chunk;
    record(static_cast<double>(done) * opt.dt);
  }
  res.steps_done = done;
  return res;
}

}  // namespace nlslab
