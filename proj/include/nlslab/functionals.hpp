#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"
#include "grid.hpp"
#include "potential.hpp"
#include "space.hpp"

namespace nlslab {

// Stationary functionals at frequency omega:
//   E = (1/2) int |u'|^2 + V|u|^2  -  (1/(p+1)) int |u|^{p+1}
//   S = E + (omega/2) int |u|^2
//   K = <S'(u), u>  (Nehari functional)
//   Q = S - K/(p+1),  N = S - K/2
// All five are assembled from the shared building blocks A = ||u||_X^2,
// B = ||u||_{p+1}^{p+1}, M = ||u||_2^2, so the linear identities between
// them hold to rounding regardless of grid resolution.
struct FunctionalValues {
  double E = 0.0;
  double S = 0.0;
  double K = 0.0;
  double Q = 0.0;
  double N = 0.0;
};

template <class T>
FunctionalValues evaluate_functionals(const BasicProfile<T>& u, const Potential& V,
                                      double omega, double p) {
  if (!(p > 1.0)) throw ConfigError("functionals: p must exceed 1");
  const double M = mass(u);
  const double A = x_norm_sq(u, V, omega);
  const double B = lp_norm_pp(u, p + 1.0);
  const double cQ = (p - 1.0) / (2.0 * (p + 1.0));
  FunctionalValues f;
  f.S = 0.5 * A - B / (p + 1.0);
  f.E = f.S - 0.5 * omega * M;
  f.K = A - B;
  f.Q = cQ * A;
  f.N = cQ * B;
  return f;
}

struct NehariProjection {
  double lambda0 = 0.0;
  Profile projected;
};

// Scale u onto the Nehari set: lambda0 = (A/B)^{1/(p-1)} makes K(lambda0 u)
// vanish identically in the discrete functionals (same A and B enter both
// sides, so no quadrature error survives).
inline NehariProjection nehari_project(const Profile& u, const Potential& V, double omega,
                                       double p) {
  if (!(p > 1.0)) throw ConfigError("nehari_project: p must exceed 1");
  const double A = x_norm_sq(u, V, omega);
  const double B = lp_norm_pp(u, p + 1.0);
  if (!(B > 0.0)) throw ConfigError("nehari_project: ||u||_{p+1} vanishes");
  if (!(A > 0.0)) throw ConfigError("nehari_project: ||u||_X vanishes");
  NehariProjection out;
  out.lambda0 = std::pow(A / B, 1.0 / (p - 1.0));
  out.projected = u;
  for (double& v : out.projected.values) v *= out.lambda0;
  return out;
}

struct ActionLevel {
  double d = 0.0;       // common value of S, Q, N on the ground state
  double S = 0.0, Q = 0.0, N = 0.0;
  double spread = 0.0;  // largest relative disagreement between the three
};

// The three equivalent characterizations of the least action level must
// agree on a solution; disagreement means the profile is not a critical
// point on the Nehari set.
inline ActionLevel action_level(const Profile& phi, const Potential& V, double omega,
                                double p) {
  const FunctionalValues f = evaluate_functionals(phi, V, omega, p);
  ActionLevel lv;
  lv.S = f.S;
  lv.Q = f.Q;
  lv.N = f.N;
  const double scale = std::max({std::fabs(f.S), std::fabs(f.Q), std::fabs(f.N), 1e-300});
  lv.spread = std::max({std::fabs(f.S - f.Q), std::fabs(f.S - f.N), std::fabs(f.Q - f.N)}) / scale;
  if (lv.spread > 1e-3)
    throw SolverError("action_level: S, Q, N disagree (spread " + fmt_double(lv.spread) +
                      "); profile is not a Nehari critical point");
  lv.d = f.S;
  if (!(lv.d > 0.0)) throw SolverError("action_level: nonpositive level d = " + fmt_double(lv.d));
  return lv;
}

}  // namespace nlslab
