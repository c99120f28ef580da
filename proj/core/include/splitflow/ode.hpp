#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace splitflow::ode {

/// Adaptive Dormand-Prince 5(4) for autonomous systems.  `rhs(y, dydt)`
/// writes the derivative of y into dydt.  Integrates from 0 to t and
/// returns the final state.  Used only where no closed-form flow exists
/// (the triad interface set); everything else in this library flows exactly.
template <class Rhs>
std::vector<double> dopri5(Rhs&& rhs, std::vector<double> y, double t,
                           double rtol = 1e-12, double atol = 1e-14) {
  if (!(t >= 0)) throw std::invalid_argument("dopri5: t must be >= 0");
  if (t == 0) return y;
  const std::size_t n = y.size();

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n),
      ynew(n);
  rhs(y, k1);

  double h = t;
  {
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = atol + rtol * std::fabs(y[i]);
      d0 = std::max(d0, std::fabs(y[i]) / sc);
      d1 = std::max(d1, std::fabs(k1[i]) / sc);
    }
    if (d1 > 1e-30) h = std::min(t, 0.01 * d0 / d1 + 1e-6 * t);
  }
  h = std::max(h, t * 1e-12);

  double time = 0;
  std::size_t steps = 0;
  constexpr std::size_t max_steps = 100'000'000;
  while (time < t) {
    if (++steps > max_steps) throw std::runtime_error("dopri5: step limit exceeded");
    h = std::min(h, t - time);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                           a64 * k4[i] + a65 * k5[i]);
    rhs(tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                            b6 * k6[i]);
    rhs(ynew, k7);

    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * k7[i]);
      const double sc =
          atol + rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      err = std::max(err, std::fabs(e) / sc);
    }
    if (err <= 1.0) {
      time += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= factor;
  }
  return y;
}

}  // namespace splitflow::ode
