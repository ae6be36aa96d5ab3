#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "grid.hpp"
#include "potential.hpp"
#include "rk45.hpp"

namespace nlslab {

// Outcome of integrating phi'' = (V + omega) phi - |phi|^{p-1} phi from the
// origin with phi(0) = phi0, phi'(0) = 0.
enum class ShotOutcome { crosses_zero, blows_up, decays, bounded };

inline const char* to_string(ShotOutcome o) {
  switch (o) {
    case ShotOutcome::crosses_zero: return "crosses-zero";
    case ShotOutcome::blows_up: return "blows-up";
    case ShotOutcome::decays: return "decays";
    case ShotOutcome::bounded: return "bounded";
  }
  return "?";
}

struct ShotResult {
  ShotOutcome outcome = ShotOutcome::bounded;
  double r_event = 0.0;  // crossing radius, blow-up radius, or where the tail died
  double phi_event = 0.0;
  double dphi_event = 0.0;
};

namespace detail {

struct ShootRhs {
  const Potential* V;
  double omega, p;
  OdeState operator()(double r, const OdeState& y) const {
    const double phi = y[0];
    const double nl = std::pow(std::fabs(phi), p - 1.0) * phi;
    return OdeState{y[1], (V->value(r) + omega) * phi - nl};
  }
};

// Series start just off the origin; |V| integrable makes both running
// integrals finite, so this also serves the singular catalog members.
inline OdeState series_start(const Potential& V, double omega, double p, double phi0,
                             double r0) {
  const double lin = omega - std::pow(phi0, p - 1.0);
  const double i1 = V.integral(0.0, r0);
  const double i2 = V.second_antiderivative(r0);
  return OdeState{phi0 * (1.0 + 0.5 * lin * r0 * r0 + i2), phi0 * (lin * r0 + i1)};
}

// Cubic Hermite value of phi inside an accepted step.
inline double hermite_phi(double r0, const OdeState& y0, double r1, const OdeState& y1,
                          double r) {
  const double h = r1 - r0;
  const double t = (r - r0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0[0] + (t3 - 2 * t2 + t) * h * y0[1] +
         (-2 * t3 + 3 * t2) * y1[0] + (t3 - t2) * h * y1[1];
}

inline double locate_zero(double r0, const OdeState& y0, double r1, const OdeState& y1) {
  double lo = r0, hi = r1;
  for (int i = 0; i < 80 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hermite_phi(r0, y0, r1, y1, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline ShotResult classify_shot(const Potential& V, double omega, double p, double phi0,
                                double r_max, double rtol = 1e-12) {
  if (!(phi0 > 0.0) || !std::isfinite(phi0))
    throw ConfigError("classify_shot: phi0 must be positive and finite");
  if (!(p > 1.0)) throw ConfigError("classify_shot: p must exceed 1");
  // The series start is valid while |phi''(0)/phi(0)| r^2 << 1; huge
  // amplitudes curve on the scale phi0^-(p-1)/2 and need a tighter start.
  const double curv0 = std::fabs(omega - std::pow(phi0, p - 1.0)) + 1.0;
  const double r_start = std::min(1e-6, 1e-2 / std::sqrt(curv0));
  if (!(r_max > 10.0 * r_start)) throw ConfigError("classify_shot: r_max too small");
  const detail::ShootRhs rhs{&V, omega, p};
  const OdeState y0 = detail::series_start(V, omega, p, phi0, r_start);

  // Any trajectory past this amplitude has left the homoclinic region for
  // good: 100x the start value and 100x the nonlinear turning amplitude.
  const double turning = std::pow(std::max(omega, 1e-30), 1.0 / (p - 1.0));
  const double blow_cap = 100.0 * std::max({phi0, turning, 1.0});
  const double decay_floor = 1e-12 * phi0;

  ShotResult res;
  res.outcome = ShotOutcome::bounded;
  res.r_event = r_max;
  const auto monitor = [&](double ra, const OdeState& ya, double rb, const OdeState& yb) {
    if (yb[0] <= 0.0) {
      res.outcome = ShotOutcome::crosses_zero;
      res.r_event = (ya[0] > 0.0) ? detail::locate_zero(ra, ya, rb, yb) : rb;
      res.phi_event = 0.0;
      res.dphi_event = yb[1];
      return false;
    }
    if (!std::isfinite(yb[0]) || !std::isfinite(yb[1]) || yb[0] > blow_cap) {
      res.outcome = ShotOutcome::blows_up;
      res.r_event = rb;
      res.phi_event = yb[0];
      res.dphi_event = yb[1];
      return false;
    }
    if (yb[0] < decay_floor && yb[1] <= 0.0) {
      // reject a plunge toward a crossing: a genuine tail has |phi'| of
      // order sqrt(V + omega) * phi
      const double rate = std::sqrt(std::max(V.value(rb) + omega, 1.0));
      if (std::fabs(yb[1]) <= 1e3 * rate * std::max(yb[0], decay_floor)) {
        res.outcome = ShotOutcome::decays;
        res.r_event = rb;
        res.phi_event = yb[0];
        res.dphi_event = yb[1];
        return false;
      }
    }
    res.phi_event = yb[0];
    res.dphi_event = yb[1];
    return true;
  };
  integrate_rk45(rhs, r_start, y0, r_max, rtol, 1e-14 * phi0, monitor);
  return res;
}

struct AmplitudeBracket {
  double lo = 1e-6;
  double hi = 1e6;
};

struct ShootingSolve {
  double phi0 = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  int iterations = 0;
};

// Bisect the start amplitude between "stays positive" (low side) and
// "crosses zero" (high side). The ground state sits on the boundary.
inline ShootingSolve bisect_amplitude(const Potential& V, double omega, double p, double r_max,
                                      const AmplitudeBracket& bracket = {},
                                      double rel_tol = 1e-12) {
  double lo = bracket.lo, hi = bracket.hi;
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("bisect_amplitude: bad bracket");
  const ShotResult lo_shot = classify_shot(V, omega, p, lo, r_max);
  if (lo_shot.outcome == ShotOutcome::crosses_zero)
    throw SolverError("bisect_amplitude: low end of bracket already crosses zero (phi0 = " +
                      fmt_double(lo) + ")");
  const ShotResult hi_shot = classify_shot(V, omega, p, hi, r_max);
  if (hi_shot.outcome != ShotOutcome::crosses_zero)
    throw SolverError("bisect_amplitude: no crossing at the high end (phi0 = " + fmt_double(hi) +
                      ", outcome " + to_string(hi_shot.outcome) +
                      "); no ground state in bracket");
  ShootingSolve out;
  int iter = 0;
  while (hi - lo > rel_tol * hi) {
    // geometric bisection while the bracket spans decades
    const double mid = (hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const ShotResult shot = classify_shot(V, omega, p, mid, r_max);
    if (shot.outcome == ShotOutcome::crosses_zero)
      hi = mid;
    else
      lo = mid;
    if (++iter > 200) throw SolverError("bisect_amplitude: did not converge");
  }
  out.phi0 = 0.5 * (lo + hi);
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  out.iterations = iter;
  return out;
}

// Sample the shot at phi0 onto the grid. The trajectory is trusted down to
// 1e-4 of the peak; past that the stored values are contaminated by the
// unstable direction and the tail is continued at the local exponential
// rate instead (Newton polish rebuilds it exactly afterwards).
inline Profile sample_shot(const Potential& V, double omega, double p, double phi0,
                           const Grid& grid, double rtol = 1e-12) {
  if (grid.support != Support::half_line)
    throw ConfigError("sample_shot: needs a half-line grid");
  const double r_start = 1e-6;
  const detail::ShootRhs rhs{&V, omega, p};
  const OdeState y0 = detail::series_start(V, omega, p, phi0, r_start);
  struct Knot {
    double r;
    OdeState y;
  };
  std::vector<Knot> knots;
  knots.reserve(4096);
  knots.push_back({r_start, y0});
  const double cut = 1e-4 * phi0;
  const double r_max = grid.extent() + grid.dx;
  const auto monitor = [&](double, const OdeState&, double rb, const OdeState& yb) {
    knots.push_back({rb, yb});
    return yb[0] > cut;  // stop once the tail is no longer trustworthy
  };
  integrate_rk45(rhs, r_start, y0, r_max, rtol, 1e-14 * phi0, monitor);

  // trust the trajectory until it drops below the cut or, having dipped,
  // starts regrowing along the unstable direction
  std::size_t last = 0;
  double run_min = knots[0].y[0];
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double v = knots[k].y[0];
    if (v <= cut) break;
    if (run_min < 0.05 * phi0 && v > 3.0 * run_min) break;
    run_min = std::min(run_min, v);
    last = k;
  }
  const double r_trust = knots[last].r;

  Profile out = make_profile<double>(grid);
  std::size_t i = 0;
  std::size_t seg = 0;
  for (; i < grid.n; ++i) {
    const double r = grid.x(i);
    if (r > r_trust) break;
    if (r <= r_start) {
      out.values[i] = phi0;
      continue;
    }
    while (seg + 1 < knots.size() && knots[seg + 1].r < r) ++seg;
    if (seg + 1 >= knots.size()) break;
    out.values[i] = detail::hermite_phi(knots[seg].r, knots[seg].y, knots[seg + 1].r,
                                        knots[seg + 1].y, r);
  }
  if (i == 0) throw SolverError("sample_shot: no usable samples");
  // exponential continuation at the local linear decay rate
  for (; i < grid.n; ++i) {
    const double r_mid = grid.x(i) - 0.5 * grid.dx;
    const double rate = std::sqrt(std::max(V.value(r_mid) + omega, 1e-8));
    out.values[i] = out.values[i - 1] * std::exp(-rate * grid.dx);
  }
  for (double& v : out.values) v = std::max(v, 0.0);
  return out;
}

}  // namespace nlslab
