#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "grid.hpp"

namespace nlslab {

class Potential;

struct ZeroPotential {};

// V(r) = curvature * r^2
struct HarmonicPotential {
  double curvature = 1.0;
};

// V(r) = -strength * r^(-exponent), attractive and singular at the origin.
// exponent must lie in (0, 1) so the singularity is integrable enough for
// every quadrature and identity below.
struct InversePowerPotential {
  double strength = 1.0;
  double exponent = 0.5;
};

// V(r) = height * tanh^2(r / width): a smooth bounded well rising to a
// plateau. C^1 at r = 0 as an even function (V'(0) = 0).
struct BoundedStepPotential {
  double height = 1.0;
  double width = 1.0;
};

struct SumPotential {
  std::vector<Potential> terms;
};

namespace detail {
// log(cosh(t)) without overflow for large |t|.
inline double log_cosh(double t) {
  const double a = std::fabs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094;
}
}  // namespace detail

// Radial potential catalog. All members are exact closed forms, including
// the running integrals that the shooting series and the cell-averaged
// matrix diagonals need. r is a radius: callers on full-line grids pass |x|.
class Potential {
 public:
  using Node = std::variant<ZeroPotential, HarmonicPotential, InversePowerPotential,
                            BoundedStepPotential, SumPotential>;

  Potential() : node_(ZeroPotential{}) {}
  Potential(ZeroPotential v) : node_(v) {}
  Potential(HarmonicPotential v) : node_(check(v)) {}
  Potential(InversePowerPotential v) : node_(check(v)) {}
  Potential(BoundedStepPotential v) : node_(check(v)) {}
  Potential(SumPotential v) : node_(std::move(v)) {}

  double value(double r) const {
    return visit([r](const auto& v) { return value_of(v, r); });
  }

  // dV/dr
  double slope(double r) const {
    return visit([r](const auto& v) { return slope_of(v, r); });
  }

  // 2V(r) + r V'(r), the density whose monotonicity condition V2 tracks.
  double virial_density(double r) const { return 2.0 * value(r) + r * slope(r); }

  // Exact primitive: integral of V over [a, b], 0 <= a <= b.
  double integral(double a, double b) const {
    return visit([a, b](const auto& v) { return integral_of(v, a, b); });
  }

  // Exact second antiderivative: integral of (r - t) V(t) dt over [0, r].
  double second_antiderivative(double r) const {
    return visit([r](const auto& v) { return second_anti_of(v, r); });
  }

  // Exact integral of t V(t) dt over [a, b], derived from the two above.
  double first_moment(double a, double b) const {
    const auto g = [this](double r) {
      return r * integral(0.0, r) - second_antiderivative(r);
    };
    return g(b) - g(a);
  }

  // Exact integral of (2V + tV') over [a, b]; the boundary term tV vanishes
  // at t = 0 for every catalog member (exponent < 1 keeps rV -> 0).
  double virial_primitive(double a, double b) const {
    const double ta = (a > 0.0) ? a * value(a) : 0.0;
    const double tb = (b > 0.0) ? b * value(b) : 0.0;
    return integral(a, b) + tb - ta;
  }

  std::optional<double> limit_at_infinity() const {
    return visit([](const auto& v) { return limit_of(v); });
  }

  bool singular_at_origin() const {
    return visit([](const auto& v) { return singular_of(v); });
  }

  bool is_zero() const {
    return visit([](const auto& v) { return zero_of(v); });
  }

  std::string label() const {
    return visit([](const auto& v) { return label_of(v); });
  }

  // Node diagonal for matrix assembly: pointwise samples for smooth
  // potentials, exact cell averages when the origin is singular (pointwise
  // sampling of r^(-theta) near 0 drops the scheme to first order).
  std::vector<double> diagonal(const Grid& g) const {
    return averaged_diagonal(g, /*virial=*/false);
  }

  std::vector<double> virial_diagonal(const Grid& g) const {
    return averaged_diagonal(g, /*virial=*/true);
  }

  static Potential parse(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
      if (c == '+') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(cur);
    if (parts.size() == 1) return parse_term(parts[0]);
    SumPotential sum;
    for (const auto& t : parts) sum.terms.push_back(parse_term(t));
    return Potential(std::move(sum));
  }

  const Node& node() const { return node_; }

 private:
  Node node_;

  template <class F>
  auto visit(F&& f) const -> decltype(std::visit(std::declval<F>(), std::declval<const Node&>())) {
    return std::visit(std::forward<F>(f), node_);
  }

  static HarmonicPotential check(HarmonicPotential v) {
    if (!(v.curvature > 0.0)) throw ConfigError("potential: harmonic curvature must be positive");
    return v;
  }
  static InversePowerPotential check(InversePowerPotential v) {
    if (!(v.strength > 0.0)) throw ConfigError("potential: inverse strength must be positive");
    if (!(v.exponent > 0.0 && v.exponent < 1.0))
      throw ConfigError("potential: inverse exponent must lie in (0, 1)");
    return v;
  }
  static BoundedStepPotential check(BoundedStepPotential v) {
    if (!(v.height > 0.0)) throw ConfigError("potential: step height must be positive");
    if (!(v.width > 0.0)) throw ConfigError("potential: step width must be positive");
    return v;
  }

  static Potential parse_term(const std::string& term) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : term) {
      if (c == ':') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    const auto num = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(f[i].c_str(), &end);
      if (end == f[i].c_str() || *end != '\0' || !std::isfinite(v))
        throw ConfigError("potential: bad number '" + f[i] + "' in '" + term + "'");
      return v;
    };
    if (f[0] == "zero") {
      if (f.size() != 1) throw ConfigError("potential: zero takes no parameters");
      return Potential(ZeroPotential{});
    }
    if (f[0] == "harmonic") {
      if (f.size() != 2) throw ConfigError("potential: harmonic:<curvature>");
      return Potential(HarmonicPotential{num(1)});
    }
    if (f[0] == "inverse") {
      if (f.size() != 3) throw ConfigError("potential: inverse:<strength>:<exponent>");
      return Potential(InversePowerPotential{num(1), num(2)});
    }
    if (f[0] == "step") {
      if (f.size() != 3) throw ConfigError("potential: step:<height>:<width>");
      return Potential(BoundedStepPotential{num(1), num(2)});
    }
    throw ConfigError("potential: unknown kind '" + f[0] + "'");
  }

  std::vector<double> averaged_diagonal(const Grid& g, bool virial) const {
    std::vector<double> out(g.n);
    const bool avg = singular_at_origin();
    for (std::size_t i = 0; i < g.n; ++i) {
      const double r = std::fabs(g.x(i));
      if (!avg) {
        out[i] = virial ? virial_density(r) : value(r);
        continue;
      }
      const double a = std::max(0.0, r - 0.5 * g.dx);
      const double b = r + 0.5 * g.dx;
      const double cell = virial ? virial_primitive(a, b) : integral(a, b);
      out[i] = cell / (b - a);
    }
    return out;
  }

  // --- per-kind closed forms ---

  static double value_of(const ZeroPotential&, double) { return 0.0; }
  static double value_of(const HarmonicPotential& v, double r) { return v.curvature * r * r; }
  static double value_of(const InversePowerPotential& v, double r) {
    if (r <= 0.0) return -HUGE_VAL;
    return -v.strength * std::pow(r, -v.exponent);
  }
  static double value_of(const BoundedStepPotential& v, double r) {
    const double t = std::tanh(r / v.width);
    return v.height * t * t;
  }
  static double value_of(const SumPotential& v, double r) {
    double s = 0.0;
    for (const auto& t : v.terms) s += t.value(r);
    return s;
  }

  static double slope_of(const ZeroPotential&, double) { return 0.0; }
  static double slope_of(const HarmonicPotential& v, double r) { return 2.0 * v.curvature * r; }
  static double slope_of(const InversePowerPotential& v, double r) {
    if (r <= 0.0) return HUGE_VAL;
    return v.strength * v.exponent * std::pow(r, -v.exponent - 1.0);
  }
  static double slope_of(const BoundedStepPotential& v, double r) {
    const double t = std::tanh(r / v.width);
    const double sech2 = 1.0 - t * t;
    return 2.0 * v.height * t * sech2 / v.width;
  }
  static double slope_of(const SumPotential& v, double r) {
    double s = 0.0;
    for (const auto& t : v.terms) s += t.slope(r);
    return s;
  }

  static double integral_of(const ZeroPotential&, double, double) { return 0.0; }
  static double integral_of(const HarmonicPotential& v, double a, double b) {
    return v.curvature * (b * b * b - a * a * a) / 3.0;
  }
  static double integral_of(const InversePowerPotential& v, double a, double b) {
    const double q = 1.0 - v.exponent;
    return -v.strength * (std::pow(b, q) - std::pow(a, q)) / q;
  }
  static double integral_of(const BoundedStepPotential& v, double a, double b) {
    const auto prim = [&](double r) { return v.height * (r - v.width * std::tanh(r / v.width)); };
    return prim(b) - prim(a);
  }
  static double integral_of(const SumPotential& v, double a, double b) {
    double s = 0.0;
    for (const auto& t : v.terms) s += t.integral(a, b);
    return s;
  }

  static double second_anti_of(const ZeroPotential&, double) { return 0.0; }
  static double second_anti_of(const HarmonicPotential& v, double r) {
    return v.curvature * r * r * r * r / 12.0;
  }
  static double second_anti_of(const InversePowerPotential& v, double r) {
    const double q = 1.0 - v.exponent;
    return -v.strength * std::pow(r, q + 1.0) / (q * (q + 1.0));
  }
  static double second_anti_of(const BoundedStepPotential& v, double r) {
    return v.height * (0.5 * r * r - v.width * v.width * detail::log_cosh(r / v.width));
  }
  static double second_anti_of(const SumPotential& v, double r) {
    double s = 0.0;
    for (const auto& t : v.terms) s += t.second_antiderivative(r);
    return s;
  }

  static std::optional<double> limit_of(const ZeroPotential&) { return 0.0; }
  static std::optional<double> limit_of(const HarmonicPotential&) { return std::nullopt; }
  static std::optional<double> limit_of(const InversePowerPotential&) { return 0.0; }
  static std::optional<double> limit_of(const BoundedStepPotential& v) { return v.height; }
  static std::optional<double> limit_of(const SumPotential& v) {
    double s = 0.0;
    for (const auto& t : v.terms) {
      const auto l = t.limit_at_infinity();
      if (!l) return std::nullopt;
      s += *l;
    }
    return s;
  }

  static bool singular_of(const ZeroPotential&) { return false; }
  static bool singular_of(const HarmonicPotential&) { return false; }
  static bool singular_of(const InversePowerPotential&) { return true; }
  static bool singular_of(const BoundedStepPotential&) { return false; }
  static bool singular_of(const SumPotential& v) {
    for (const auto& t : v.terms)
      if (t.singular_at_origin()) return true;
    return false;
  }

  static bool zero_of(const ZeroPotential&) { return true; }
  static bool zero_of(const HarmonicPotential&) { return false; }
  static bool zero_of(const InversePowerPotential&) { return false; }
  static bool zero_of(const BoundedStepPotential&) { return false; }
  static bool zero_of(const SumPotential& v) {
    for (const auto& t : v.terms)
      if (!t.is_zero()) return false;
    return true;
  }

  static std::string label_of(const ZeroPotential&) { return "zero"; }
  static std::string label_of(const HarmonicPotential& v) {
    return "harmonic:" + fmt_double(v.curvature);
  }
  static std::string label_of(const InversePowerPotential& v) {
    return "inverse:" + fmt_double(v.strength) + ":" + fmt_double(v.exponent);
  }
  static std::string label_of(const BoundedStepPotential& v) {
    return "step:" + fmt_double(v.height) + ":" + fmt_double(v.width);
  }
  static std::string label_of(const SumPotential& v) {
    std::string s;
    for (std::size_t i = 0; i < v.terms.size(); ++i) {
      if (i) s += "+";
      s += v.terms[i].label();
    }
    return s.empty() ? "zero" : s;
  }
};

// --- structural checks on the potential ---

struct CheckReport {
  bool passed = true;
  std::string detail;              // empty when passed
  double worst = 0.0;              // most violating sampled value
  std::ptrdiff_t first_violation = -1;  // node index, -1 when none
};

// V1: V is non-decreasing with V' >= 0 and V' not identically zero.
// Sampled form, for hypothetical potentials given as callables; nodes at
// r = 0 are skipped (the slope need not be defined there).
template <class ValueF, class SlopeF>
CheckReport check_v1_sampled(ValueF&& value, SlopeF&& slope, const Grid& g) {
  if (g.support != Support::half_line)
    throw ConfigError("check_v1: needs a half-line grid");
  CheckReport rep;
  double prev = 0.0;
  bool have_prev = false;
  double max_slope = 0.0, max_abs = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double r = g.x(i);
    if (r <= 0.0) continue;
    const double v = value(r);
    const double s = slope(r);
    if (!std::isfinite(v) || !std::isfinite(s))
      throw ConfigError("check_v1: non-finite sample at r = " + fmt_double(r));
    max_abs = std::max(max_abs, std::fabs(v));
    max_slope = std::max(max_slope, s);
    const double tol = 1e-12 * (1.0 + std::fabs(v));
    if (have_prev && v < prev - tol) {
      rep.passed = false;
      rep.detail = "V decreases at r = " + fmt_double(r);
      rep.worst = v - prev;
      rep.first_violation = static_cast<std::ptrdiff_t>(i);
      return rep;
    }
    if (s < -tol) {
      rep.passed = false;
      rep.detail = "V' < 0 at r = " + fmt_double(r);
      rep.worst = s;
      rep.first_violation = static_cast<std::ptrdiff_t>(i);
      return rep;
    }
    prev = v;
    have_prev = true;
  }
  if (max_slope <= 1e-12 * (1.0 + max_abs)) {
    rep.passed = false;
    rep.detail = "V' == 0 identically";
    rep.worst = max_slope;
  }
  return rep;
}

inline CheckReport check_v1(const Potential& V, const Grid& g) {
  return check_v1_sampled([&](double r) { return V.value(r); },
                          [&](double r) { return V.slope(r); }, g);
}

// V2: 2V + rV' is non-decreasing; at p = 5 it additionally must not be
// constant (a constant virial density leaves the slope machinery degenerate
// there).
template <class VirialF>
CheckReport check_v2_sampled(VirialF&& virial, const Grid& g, double p) {
  if (g.support != Support::half_line)
    throw ConfigError("check_v2: needs a half-line grid");
  CheckReport rep;
  double prev = 0.0;
  bool have_prev = false;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double r = g.x(i);
    if (r <= 0.0) continue;
    const double w = virial(r);
    if (!std::isfinite(w))
      throw ConfigError("check_v2: non-finite sample at r = " + fmt_double(r));
    lo = std::min(lo, w);
    hi = std::max(hi, w);
    const double tol = 1e-12 * (1.0 + std::fabs(w));
    if (have_prev && w < prev - tol) {
      rep.passed = false;
      rep.detail = "2V + rV' decreases at r = " + fmt_double(r);
      rep.worst = w - prev;
      rep.first_violation = static_cast<std::ptrdiff_t>(i);
      return rep;
    }
    prev = w;
    have_prev = true;
  }
  if (p >= 5.0 - 1e-9 && hi - lo <= 1e-10 * (1.0 + std::fabs(hi))) {
    rep.passed = false;
    rep.detail = "2V + rV' constant; not allowed at p = 5";
    rep.worst = hi - lo;
  }
  return rep;
}

inline CheckReport check_v2(const Potential& V, const Grid& g, double p) {
  return check_v2_sampled([&](double r) { return V.virial_density(r); }, g, p);
}

}  // namespace nlslab
