#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "grid.hpp"
#include "potential.hpp"

namespace nlslab {

inline double abs_sq(double v) { return v * v; }
inline double abs_sq(const std::complex<double>& v) { return std::norm(v); }

// All quantities below are full-line integrals (half-line grids carry the
// reflection factor in their weights).

template <class T>
double mass(const BasicProfile<T>& u) {
  require_finite(u, "mass");
  return line_integral(u.grid, [&](std::size_t i) { return abs_sq(u.values[i]); });
}

template <class T>
double lp_norm_pp(const BasicProfile<T>& u, double q) {
  require_finite(u, "lp_norm");
  return line_integral(u.grid, [&](std::size_t i) {
    return std::pow(std::sqrt(abs_sq(u.values[i])), q);
  });
}

inline double weighted_dot(const Profile& a, const Profile& b) {
  require_finite(a, "weighted_dot");
  if (!a.grid.same_layout(b.grid)) throw ConfigError("weighted_dot: grid mismatch");
  return line_integral(a.grid, [&](std::size_t i) { return a.values[i] * b.values[i]; });
}

template <class T>
double kinetic_energy(const BasicProfile<T>& u) {
  const std::vector<T> d = centered_derivative(u);
  return line_integral(u.grid, [&](std::size_t i) { return abs_sq(d[i]); });
}

// Integral of V |u|^2 with the same cell-averaged diagonal the matrices use,
// so quadratic-form identities close at machine precision.
template <class T>
double potential_energy(const Potential& V, const BasicProfile<T>& u) {
  const std::vector<double> q = V.diagonal(u.grid);
  return line_integral(u.grid, [&](std::size_t i) { return q[i] * abs_sq(u.values[i]); });
}

// Integral of (2V + rV') a b, cell-exact for singular potentials.
inline double virial_pairing(const Potential& V, const Profile& a, const Profile& b) {
  if (!a.grid.same_layout(b.grid)) throw ConfigError("virial_pairing: grid mismatch");
  const std::vector<double> q = V.virial_diagonal(a.grid);
  return line_integral(a.grid, [&](std::size_t i) { return q[i] * a.values[i] * b.values[i]; });
}

inline double virial_energy(const Potential& V, const Profile& u) {
  return virial_pairing(V, u, u);
}

// Squared X-norm: |u'|^2 + V |u|^2 + omega |u|^2, centered first differences.
template <class T>
double x_norm_sq(const BasicProfile<T>& u, const Potential& V, double omega) {
  return kinetic_energy(u) + potential_energy(V, u) + omega * mass(u);
}

}  // namespace nlslab
