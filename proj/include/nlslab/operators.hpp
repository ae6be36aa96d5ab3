#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "potential.hpp"
#include "space.hpp"
#include "tridiag.hpp"

namespace nlslab {

// Parity sector of a Schroedinger operator -d^2/dx^2 + q(x) reduced to a
// half-line grid, or the plain full-line discretization. The right edge is
// always a Dirichlet ghost; the origin closes with the parity mirror.
enum class SectorBoundary { neumann_at_0, dirichlet_at_0, line };

struct TridiagonalOperator {
  SymTridiag matrix;                // symmetrized form used by the eigensolver
  std::vector<double> node_scale;   // physical vector = node_scale * symmetric vector
  Grid grid;
  SectorBoundary boundary = SectorBoundary::line;
  std::size_t node_offset = 0;      // first grid node carried by the matrix
};

// Raw second-difference rows of -D2 + diag(q) in physical coordinates,
// including the parity closure at the origin. Used directly by Newton
// solvers; the eigensolver gets the symmetrized TridiagonalOperator.
inline void second_difference_rows(const Grid& g, const std::vector<double>& q,
                                   SectorBoundary sector, std::vector<double>& lower,
                                   std::vector<double>& diag, std::vector<double>& upper) {
  if (g.periodic) throw ConfigError("operator assembly: periodic grids use the spectral path");
  const bool half = g.support == Support::half_line;
  if (!half && sector != SectorBoundary::line)
    throw ConfigError("operator assembly: parity sectors need a half-line grid");
  const std::size_t drop = (half && sector == SectorBoundary::dirichlet_at_0 && !g.staggered) ? 1 : 0;
  const std::size_t n = g.n - drop;
  if (q.size() != g.n) throw ConfigError("operator assembly: diagonal length mismatch");
  const double inv2 = 1.0 / (g.dx * g.dx);
  lower.assign(n, -inv2);
  upper.assign(n, -inv2);
  diag.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 * inv2 + q[i + drop];
  lower[0] = 0.0;
  upper[n - 1] = 0.0;
  if (half && drop == 0) {
    if (sector == SectorBoundary::neumann_at_0) {
      if (g.staggered) {
        diag[0] = inv2 + q[0];  // mirror v(-1) = v(0)
      } else {
        upper[0] = -2.0 * inv2;  // mirror v(-1) = v(1)
      }
    } else if (sector == SectorBoundary::dirichlet_at_0 && g.staggered) {
      diag[0] = 3.0 * inv2 + q[0];  // mirror v(-1) = -v(0)
    }
  }
}

// Apply -D2 + diag(q) with the sector closure, in physical coordinates.
inline std::vector<double> apply_sector_operator(const Grid& g, const std::vector<double>& q,
                                                 SectorBoundary sector,
                                                 const std::vector<double>& v) {
  std::vector<double> lower, diag, upper;
  second_difference_rows(g, q, sector, lower, diag, upper);
  const std::size_t n = diag.size();
  const std::size_t drop = g.n - n;
  if (v.size() != g.n) throw ConfigError("apply_sector_operator: length mismatch");
  std::vector<double> out(g.n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * v[i + drop];
    if (i > 0) s += lower[i] * v[i - 1 + drop];
    if (i + 1 < n) s += upper[i] * v[i + 1 + drop];
    out[i + drop] = s;
  }
  return out;
}

inline TridiagonalOperator assemble_operator(const Grid& g, const std::vector<double>& q,
                                             SectorBoundary sector) {
  std::vector<double> lower, diag, upper;
  second_difference_rows(g, q, sector, lower, diag, upper);
  const std::size_t n = diag.size();
  TridiagonalOperator op;
  op.grid = g;
  op.boundary = sector;
  op.node_offset = g.n - n;
  op.matrix.diag = diag;
  op.matrix.off.assign(n > 0 ? n - 1 : 0, 0.0);
  op.node_scale.assign(n, 1.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double lo = lower[i + 1];
    const double up = upper[i];
    if (lo == up) {
      op.matrix.off[i] = up;
    } else {
      // one-sided mirror row: similarity transform with the quadrature
      // weights restores symmetry, off -> -sqrt(lo*up)
      op.matrix.off[i] = -std::sqrt(lo * up);
    }
  }
  if (g.support == Support::half_line && sector == SectorBoundary::neumann_at_0 &&
      !g.staggered) {
    // the r = 0 node weighs half a cell; undo the similarity scaling
    for (std::size_t i = 1; i < n; ++i) op.node_scale[i] = 1.0 / std::sqrt(2.0);
  }
  return op;
}

struct EigenSolution {
  std::vector<double> values;
  std::vector<Profile> vectors;  // grid-length, normalized so the line integral of v^2 is 1
};

// k lowest eigenpairs mapped back to physical node values.
inline EigenSolution smallest_eigs(const TridiagonalOperator& op, std::size_t k,
                                   double abs_tol = 1e-10) {
  const std::vector<EigenPair> pairs = lowest_eigenpairs(op.matrix, k, abs_tol);
  EigenSolution sol;
  for (const EigenPair& pr : pairs) {
    sol.values.push_back(pr.value);
    Profile v = make_profile<double>(op.grid);
    for (std::size_t i = 0; i < pr.vector.size(); ++i)
      v.values[i + op.node_offset] = op.node_scale[i] * pr.vector[i];
    const double m = mass(v);
    if (m > 0.0) {
      const double s = 1.0 / std::sqrt(m);
      for (double& x : v.values) x *= s;
    }
    sol.vectors.push_back(std::move(v));
  }
  return sol;
}

// Default grid used when a caller wants omega1 without having chosen a
// discretization yet: wide enough for every catalog potential, staggered
// when the origin is singular.
inline Grid omega1_default_grid(const Potential& V) {
  return Grid::half_line(40.0, 2e-3, V.singular_at_origin());
}

// omega1 = -inf spec(-d^2/dx^2 + V). The discrete matrix only sees bound
// states below the potential plateau; when V has a finite limit at infinity,
// essential spectrum starting there caps the infimum as well.
inline double omega1(const Potential& V, const Grid& g) {
  const std::vector<double> q = V.diagonal(g);
  const TridiagonalOperator op = assemble_operator(g, q, SectorBoundary::neumann_at_0);
  double lam = lowest_eigenvalues(op.matrix, 1)[0];
  if (const std::optional<double> vinf = V.limit_at_infinity())
    lam = std::min(lam, *vinf);
  return -lam + 0.0;  // keep -0.0 out of reports
}

inline double omega1(const Potential& V) { return omega1(V, omega1_default_grid(V)); }

}  // namespace nlslab
