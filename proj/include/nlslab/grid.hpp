#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace nlslab {

enum class Support { half_line, full_line };

// Uniform one-dimensional grid. Half-line grids sample [0, extent] and stand
// for even functions of x on the whole line: their quadrature weights carry
// the reflection factor 2, so every integral reported by this library is a
// full-line value regardless of the storage convention.
//
// Staggered grids shift all nodes by dx/2 so that r = 0 is never sampled;
// they are mandatory when the potential diverges at the origin. Periodic
// grids are staggered full-line boxes used by the spectral time integrator
// (no node sits on either boundary or on x = 0).
struct Grid {
  Support support = Support::half_line;
  double dx = 0.0;
  std::size_t n = 0;
  bool staggered = false;
  bool periodic = false;
  double x0 = 0.0;  // coordinate of node 0

  static Grid half_line(double extent, double dx, bool staggered = false) {
    require_positive(extent, dx);
    const std::size_t cells = cell_count(extent, dx);
    Grid g;
    g.support = Support::half_line;
    g.dx = dx;
    g.staggered = staggered;
    g.n = staggered ? cells : cells + 1;
    g.x0 = staggered ? 0.5 * dx : 0.0;
    return g;
  }

  static Grid full_line(double half_width, double dx, bool staggered = false) {
    require_positive(half_width, dx);
    const std::size_t cells = cell_count(half_width, dx);
    Grid g;
    g.support = Support::full_line;
    g.dx = dx;
    g.staggered = staggered;
    if (staggered) {
      g.n = 2 * cells;
      g.x0 = -(static_cast<double>(cells) - 0.5) * dx;
    } else {
      g.n = 2 * cells + 1;
      g.x0 = -static_cast<double>(cells) * dx;
    }
    return g;
  }

  // Periodic box [-half_width, half_width) with n cells; n must be even so
  // the node layout is symmetric about 0 without sampling it.
  static Grid periodic_box(double half_width, std::size_t n) {
    if (!(half_width > 0.0)) throw ConfigError("grid: half_width must be positive");
    if (n < 16) throw ConfigError("grid: fewer than 16 points");
    if (n % 2 != 0) throw ConfigError("grid: periodic box needs an even point count");
    Grid g;
    g.support = Support::full_line;
    g.dx = 2.0 * half_width / static_cast<double>(n);
    g.n = n;
    g.staggered = true;
    g.periodic = true;
    g.x0 = -half_width + 0.5 * g.dx;
    return g;
  }

  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }

  double extent() const {
    if (periodic) return 0.5 * dx * static_cast<double>(n);
    if (support == Support::half_line)
      return x(n - 1) + (staggered ? 0.5 * dx : 0.0);
    return -x0 + (staggered ? 0.5 * dx : 0.0);
  }

  // Trapezoid weight of node i, including the even-reflection factor 2 on
  // half-line grids. Staggered and periodic nodes are midpoints of their
  // cells and weigh 1 cell each.
  double line_weight(std::size_t i) const {
    if (periodic) return 1.0;
    if (support == Support::half_line) {
      if (staggered) return 2.0;
      if (i == 0) return 1.0;  // r = 0 is its own mirror image
      return (i == n - 1) ? 1.0 : 2.0;
    }
    if (staggered) return 1.0;
    return (i == 0 || i == n - 1) ? 0.5 : 1.0;
  }

  bool same_layout(const Grid& o) const {
    return support == o.support && n == o.n && staggered == o.staggered &&
           periodic == o.periodic && dx == o.dx && x0 == o.x0;
  }

 private:
  static void require_positive(double extent, double dx) {
    if (!(dx > 0.0)) throw ConfigError("grid: dx must be positive");
    if (!(extent > 0.0)) throw ConfigError("grid: extent must be positive");
  }
  static std::size_t cell_count(double extent, double dx) {
    const long long cells = std::llround(extent / dx);
    if (cells < 16) throw ConfigError("grid: fewer than 16 points");
    return static_cast<std::size_t>(cells);
  }
};

template <class T>
struct BasicProfile {
  Grid grid;
  std::vector<T> values;
};

using Profile = BasicProfile<double>;
using ComplexProfile = BasicProfile<std::complex<double>>;

template <class T>
BasicProfile<T> make_profile(const Grid& g) {
  return BasicProfile<T>{g, std::vector<T>(g.n, T{})};
}

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const std::complex<double>& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <class T>
void require_finite(const BasicProfile<T>& p, const char* who) {
  if (p.values.size() != p.grid.n)
    throw ConfigError(std::string(who) + ": profile length does not match its grid");
  for (const T& v : p.values)
    if (!is_finite(v)) throw ConfigError(std::string(who) + ": non-finite sample");
}

// Composite trapezoid over the sampled interval (midpoint rule on staggered
// grids). This is the raw quadrature on the stored nodes; for full-line
// values of even half-line data use line_integral instead.
template <class T>
T quadrature(const BasicProfile<T>& p) {
  require_finite(p, "quadrature");
  const Grid& g = p.grid;
  T acc{};
  if (g.staggered || g.periodic) {
    for (const T& v : p.values) acc += v;
    return acc * g.dx;
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    const double w = (i == 0 || i == g.n - 1) ? 0.5 : 1.0;
    acc += w * p.values[i];
  }
  return acc * g.dx;
}

// Full-line integral of the sampled data (reflection included on half-line
// grids). The callable overload evaluates f at every node.
template <class T>
T line_integral(const BasicProfile<T>& p) {
  require_finite(p, "line_integral");
  T acc{};
  for (std::size_t i = 0; i < p.grid.n; ++i) acc += p.grid.line_weight(i) * p.values[i];
  return acc * p.grid.dx;
}

template <class F>
auto line_integral(const Grid& g, F&& f) -> decltype(f(std::size_t{0})) {
  decltype(f(std::size_t{0})) acc{};
  for (std::size_t i = 0; i < g.n; ++i) acc += g.line_weight(i) * f(i);
  return acc * g.dx;
}

// Value at r = 0. Node grids store it; staggered grids extrapolate with the
// even parabola through the first two nodes: (9 v0 - v1) / 8.
template <class T>
T even_value_at_origin(const BasicProfile<T>& p) {
  if (p.values.empty()) throw ConfigError("even_value_at_origin: empty profile");
  if (p.grid.support == Support::half_line) {
    if (!p.grid.staggered) return p.values[0];
    if (p.values.size() < 2) throw ConfigError("even_value_at_origin: need two nodes");
    return (9.0 * p.values[0] - p.values[1]) / 8.0;
  }
  // full line: average the two nodes bracketing 0 on staggered grids
  const std::size_t mid = p.grid.n / 2;
  if (p.grid.staggered) return (p.values[mid - 1] + p.values[mid]) * 0.5;
  return p.values[mid];
}

// Even reflection of half-line data onto the matching full-line grid.
template <class T>
BasicProfile<T> mirror_to_full_line(const BasicProfile<T>& p) {
  const Grid& g = p.grid;
  if (g.support != Support::half_line)
    throw ConfigError("mirror_to_full_line: input must be a half-line profile");
  Grid full;
  full.support = Support::full_line;
  full.dx = g.dx;
  full.staggered = g.staggered;
  if (g.staggered) {
    full.n = 2 * g.n;
    full.x0 = -(static_cast<double>(g.n) - 0.5) * g.dx;
  } else {
    full.n = 2 * g.n - 1;
    full.x0 = -static_cast<double>(g.n - 1) * g.dx;
  }
  BasicProfile<T> out = make_profile<T>(full);
  if (g.staggered) {
    for (std::size_t i = 0; i < g.n; ++i) {
      out.values[g.n + i] = p.values[i];
      out.values[g.n - 1 - i] = p.values[i];
    }
  } else {
    const std::size_t m = g.n - 1;
    for (std::size_t i = 0; i < g.n; ++i) {
      out.values[m + i] = p.values[i];
      out.values[m - i] = p.values[i];
    }
  }
  return out;
}

// Centered first differences, second order in the interior. Half-line grids
// use the even mirror at r = 0 (slope exactly 0 on node grids); non-periodic
// edges fall back to one-sided second-order stencils; periodic wraps.
template <class T>
std::vector<T> centered_derivative(const BasicProfile<T>& p) {
  const Grid& g = p.grid;
  const std::vector<T>& v = p.values;
  if (g.n < 3) throw ConfigError("centered_derivative: need at least 3 nodes");
  std::vector<T> d(g.n);
  const double inv2 = 1.0 / (2.0 * g.dx);
  if (g.periodic) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const std::size_t ip = (i + 1) % g.n;
      const std::size_t im = (i + g.n - 1) % g.n;
      d[i] = (v[ip] - v[im]) * inv2;
    }
    return d;
  }
  for (std::size_t i = 1; i + 1 < g.n; ++i) d[i] = (v[i + 1] - v[i - 1]) * inv2;
  if (g.support == Support::half_line) {
    // even mirror through r = 0
    d[0] = g.staggered ? (v[1] - v[0]) * inv2 : T{};
  } else {
    d[0] = (4.0 * v[1] - 3.0 * v[0] - v[2]) * inv2;
  }
  const std::size_t m = g.n - 1;
  d[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) * inv2;
  return d;
}

}  // namespace nlslab
