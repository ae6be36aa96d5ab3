#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "format.hpp"

namespace nlslab {

// Symmetric tridiagonal matrix: diag has n entries, off has n-1.
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(const std::vector<double>& v) const {
    const std::size_t n = size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * v[i];
      if (i > 0) s += off[i - 1] * v[i - 1];
      if (i + 1 < n) s += off[i] * v[i + 1];
      out[i] = s;
    }
    return out;
  }

  // infinity-norm bound, used to scale tolerances
  double row_scale() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      double r = std::fabs(diag[i]);
      if (i > 0) r += std::fabs(off[i - 1]);
      if (i + 1 < size()) r += std::fabs(off[i]);
      s = std::max(s, r);
    }
    return s;
  }
};

// Solve a general (possibly unsymmetric) tridiagonal system with partial
// pivoting; pivoting introduces one extra superdiagonal of fill. lower[0]
// and upper[n-1] are ignored. Near-singular pivots are nudged so shifted
// systems stay usable for inverse iteration.
inline std::vector<double> solve_tridiag(std::vector<double> lower, std::vector<double> diag,
                                         std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0) throw SolverError("solve_tridiag: empty system");
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw SolverError("solve_tridiag: band length mismatch");
  std::vector<double> fill(n, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max({scale, std::fabs(diag[i]), std::fabs(lower[i]), std::fabs(upper[i])});
  const double pivmin = std::max(scale, 1.0) * 1e-290;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::fabs(lower[i + 1]) > std::fabs(diag[i])) {
      std::swap(diag[i], lower[i + 1]);
      std::swap(upper[i], diag[i + 1]);
      std::swap(fill[i], upper[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    if (std::fabs(diag[i]) < pivmin) diag[i] = (diag[i] < 0.0) ? -pivmin : pivmin;
    const double m = lower[i + 1] / diag[i];
    diag[i + 1] -= m * upper[i];
    upper[i + 1] -= m * fill[i];
    rhs[i + 1] -= m * rhs[i];
  }
  if (std::fabs(diag[n - 1]) < pivmin) diag[n - 1] = (diag[n - 1] < 0.0) ? -pivmin : pivmin;
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  if (n >= 2) x[n - 2] = (rhs[n - 2] - upper[n - 2] * x[n - 1]) / diag[n - 2];
  for (std::size_t k = n; k-- > 2;) {
    const std::size_t i = k - 2;
    x[i] = (rhs[i] - upper[i] * x[i + 1] - fill[i] * x[i + 2]) / diag[i];
  }
  return x;
}

// (T - shift) x = b for symmetric T.
inline std::vector<double> solve_shifted(const SymTridiag& T, double shift,
                                         std::vector<double> rhs) {
  const std::size_t n = T.size();
  std::vector<double> lower(n, 0.0), diag(n), upper(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = T.diag[i] - shift;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    upper[i] = T.off[i];
    lower[i + 1] = T.off[i];
  }
  return solve_tridiag(std::move(lower), std::move(diag), std::move(upper), std::move(rhs));
}

// Number of eigenvalues strictly below lambda (Sturm sequence count with a
// pivot floor in the LAPACK style).
inline int count_below(const SymTridiag& T, double lambda) {
  const std::size_t n = T.size();
  double scale = T.row_scale();
  const double pivmin = std::max(scale, 1.0) * 1e-290;
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double off2 = (i > 0) ? T.off[i - 1] * T.off[i - 1] : 0.0;
    q = T.diag[i] - lambda - (i > 0 ? off2 / q : 0.0);
    if (std::fabs(q) <= pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

inline void gershgorin_bounds(const SymTridiag& T, double& lo, double& hi) {
  lo = HUGE_VAL;
  hi = -HUGE_VAL;
  const std::size_t n = T.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::fabs(T.off[i - 1]);
    if (i + 1 < n) r += std::fabs(T.off[i]);
    lo = std::min(lo, T.diag[i] - r);
    hi = std::max(hi, T.diag[i] + r);
  }
}

// k lowest eigenvalues by per-index bisection, each to abs_tol.
inline std::vector<double> lowest_eigenvalues(const SymTridiag& T, std::size_t k,
                                              double abs_tol = 1e-10) {
  const std::size_t n = T.size();
  if (k == 0) return {};
  if (k > n) throw ConfigError("lowest_eigenvalues: k exceeds matrix size");
  double glo, ghi;
  gershgorin_bounds(T, glo, ghi);
  std::vector<double> vals(k);
  for (std::size_t j = 0; j < k; ++j) {
    double lo = glo, hi = ghi;
    // invariant: count_below(lo) <= j < count_below(hi)
    while (hi - lo > abs_tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;  // interval at rounding resolution
      if (count_below(T, mid) > static_cast<int>(j))
        hi = mid;
      else
        lo = mid;
    }
    vals[j] = 0.5 * (lo + hi);
  }
  return vals;
}

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // unit Euclidean norm
};

namespace detail {
// Deterministic pseudo-random start for inverse iteration; any fixed seed
// works, randomness only guards against an unlucky zero overlap.
inline std::vector<double> iteration_seed(std::size_t n, std::uint64_t salt) {
  std::vector<double> v(n);
  std::uint64_t s = salt * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull;
  for (std::size_t i = 0; i < n; ++i) {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    v[i] = static_cast<double>((s * 0x2545F4914F6CDD1Dull) >> 11) * 0x1.0p-53 - 0.5;
  }
  return v;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

// k lowest eigenpairs: bisection for the values, inverse iteration with
// cluster orthogonalization for the vectors. Residual target
// ||T v - lambda v|| <= 1e-8 (|lambda| + row_scale); stagnation retries with
// a perturbed shift before giving up.
inline std::vector<EigenPair> lowest_eigenpairs(const SymTridiag& T, std::size_t k,
                                                double abs_tol = 1e-10) {
  const std::vector<double> vals = lowest_eigenvalues(T, k, abs_tol);
  const std::size_t n = T.size();
  const double scale = T.row_scale();
  std::vector<EigenPair> out;
  out.reserve(k);
  for (std::size_t j = 0; j < vals.size(); ++j) {
    const double lam = vals[j];
    const double resid_tol = 1e-8 * (std::fabs(lam) + scale);
    const double cluster_tol = 1e-6 * std::max(1.0, std::fabs(lam)) + 10.0 * abs_tol;
    std::vector<std::size_t> cluster;
    for (std::size_t i = 0; i < j; ++i)
      if (std::fabs(vals[i] - lam) < cluster_tol) cluster.push_back(i);
    std::vector<double> v = detail::iteration_seed(n, j + 1);
    double shift_bump = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 40; ++iter) {
      for (std::size_t c : cluster) {
        const double pr = detail::dot(v, out[c].vector);
        for (std::size_t i = 0; i < n; ++i) v[i] -= pr * out[c].vector[i];
      }
      double nv = detail::norm2(v);
      if (!(nv > 0.0) || !std::isfinite(nv)) {
        v = detail::iteration_seed(n, (j + 1) * 7919 + iter);
        nv = detail::norm2(v);
      }
      for (double& x : v) x /= nv;
      const std::vector<double> Tv = T.apply(v);
      double resid = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = Tv[i] - lam * v[i];
        resid += r * r;
      }
      resid = std::sqrt(resid);
      if (resid <= resid_tol) {
        converged = true;
        break;
      }
      if (iter > 0 && iter % 12 == 0) shift_bump += 1e-11 * (std::fabs(lam) + 1.0);
      v = solve_shifted(T, lam + shift_bump, std::move(v));
    }
    if (!converged)
      throw SolverError("eigensolver: inverse iteration stagnated at eigenvalue " +
                        fmt_double(lam));
    EigenPair pair;
    pair.value = lam;
    pair.vector = std::move(v);
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace nlslab
