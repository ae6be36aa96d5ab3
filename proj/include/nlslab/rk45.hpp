#pragma once

#include <array>
#include <cmath>

#include "errors.hpp"

namespace nlslab {

using OdeState = std::array<double, 2>;

// Adaptive Dormand-Prince 5(4) for the 2-component shooting ODE. The monitor
// sees every accepted step as (r_prev, y_prev, r_new, y_new) and returns
// false to stop the integration; atol/rtol control the embedded error per
// step in a mixed norm.
template <class F, class Monitor>
void integrate_rk45(F&& f, double r, OdeState y, double r_end, double rtol, double atol,
                    Monitor&& monitor) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(r_end > r)) throw SolverError("integrate_rk45: empty interval");
  double h = std::min(1e-3, 0.1 * (r_end - r));
  OdeState k1 = f(r, y);
  long long steps = 0;
  const long long max_steps = 20'000'000;
  while (r < r_end) {
    if (++steps > max_steps) throw SolverError("integrate_rk45: step limit exceeded");
    if (r + h > r_end) h = r_end - r;
    OdeState yt;

    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * a21 * k1[i];
    const OdeState k2 = f(r + c2 * h, yt);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const OdeState k3 = f(r + c3 * h, yt);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const OdeState k4 = f(r + c4 * h, yt);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const OdeState k5 = f(r + c5 * h, yt);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const OdeState k6 = f(r + h, yt);
    OdeState y_new;
    for (int i = 0; i < 2; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const OdeState k7 = f(r + h, y_new);

    double err = 0.0;
    bool finite = true;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
      err += (e / sc) * (e / sc);
      if (!std::isfinite(y_new[i])) finite = false;
    }
    err = std::sqrt(0.5 * err);

    if (finite && err <= 1.0) {
      const double r_prev = r;
      const OdeState y_prev = y;
      r += h;
      y = y_new;
      k1 = k7;  // first-same-as-last
      if (!monitor(r_prev, y_prev, r, y)) return;
      const double grow = (err > 1e-30) ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::min(5.0, std::max(0.2, grow));
    } else {
      const double shrink = finite ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.1;
      h *= shrink;
      if (!(h > 1e-15))
        throw SolverError("integrate_rk45: step size underflow at r = " + std::to_string(r) +
                          ", y = " + std::to_string(y[0]));
    }
  }
}

}  // namespace nlslab
