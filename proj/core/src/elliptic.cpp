#include "splitflow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace splitflow::elliptic {

namespace {

void check_rho(double rho) {
  if (!(rho >= 0.0) || rho > kRhoMax) {
    throw std::invalid_argument("elliptic: rho must lie in [0, 1 - 1e-12]");
  }
}

/// Carlson symmetric integral R_F(x,y,z); x,y,z >= 0, at most one zero.
double carlson_rf(double x, double y, double z) {
  constexpr double errtol = 0.0010;  // series error ~ errtol^6
  double xt = x, yt = y, zt = z;
  double ave, dx, dy, dz;
  do {
    const double sx = std::sqrt(xt), sy = std::sqrt(yt), sz = std::sqrt(zt);
    const double lam = sx * (sy + sz) + sy * sz;
    xt = 0.25 * (xt + lam);
    yt = 0.25 * (yt + lam);
    zt = 0.25 * (zt + lam);
    ave = (xt + yt + zt) / 3.0;
    dx = (ave - xt) / ave;
    dy = (ave - yt) / ave;
    dz = (ave - zt) / ave;
  } while (std::max({std::fabs(dx), std::fabs(dy), std::fabs(dz)}) > errtol);
  const double e2 = dx * dy - dz * dz;
  const double e3 = dx * dy * dz;
  return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) /
         std::sqrt(ave);
}

/// Jacobi amplitude phi = am(x | m), via the AGM chain and the backward
/// asin recursion.  Used here after reduction to [0, K].
double jacobi_amplitude(double m, double x) {
  constexpr int max_depth = 32;
  double a[max_depth + 1], c[max_depth + 1];
  double an = 1.0, bn = std::sqrt(1.0 - m);
  int n = 0;
  while (n < max_depth) {
    ++n;
    c[n] = 0.5 * (an - bn);
    const double a_next = 0.5 * (an + bn);
    bn = std::sqrt(an * bn);
    an = a_next;
    a[n] = an;
    if (c[n] < 1e-17 * an) break;
  }
  double phi = std::ldexp(a[n] * x, n);
  for (int k = n; k >= 1; --k) {
    phi = 0.5 * (phi + std::asin(std::clamp(c[k] / a[k] * std::sin(phi), -1.0, 1.0)));
  }
  return phi;
}

}  // namespace

double quarter_period(double rho) {
  check_rho(rho);
  if (rho == 0.0) return std::numbers::pi / 2.0;
  double a = 1.0, b = std::sqrt(1.0 - rho);
  for (int it = 0; it < 40 && std::fabs(a - b) > 1e-15 * a; ++it) {
    const double a_next = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = a_next;
  }
  return std::numbers::pi / (2.0 * a);
}

double incomplete(double rho, double s) {
  check_rho(rho);
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("elliptic::incomplete: s must lie in [0,1]");
  }
  if (s == 0.0) return 0.0;
  // T_rho(s) = s * R_F(1 - s^2, 1 - rho s^2, 1).
  const double s2 = s * s;
  return s * carlson_rf(1.0 - s2, 1.0 - rho * s2, 1.0);
}

JacobiTriple jacobi(double rho, double x) {
  check_rho(rho);
  const double K = quarter_period(rho);
  const double period = 4.0 * K;
  double u = std::fmod(x, period);
  if (u < 0) u += period;
  double sn_sign = 1.0, cn_sign = 1.0;
  if (u > 2.0 * K) {
    u = period - u;  // sn odd / cn even about 2K
    sn_sign = -1.0;
  }
  if (u > K) {
    u = 2.0 * K - u;  // sn even / cn odd about K
    cn_sign = -1.0;
  }
  const double phi = jacobi_amplitude(rho, u);
  const double s = std::clamp(std::sin(phi), -1.0, 1.0);
  const double cn = std::cos(phi);
  const double dn = std::sqrt(std::max(1.0 - rho * s * s, 0.0));
  return {sn_sign * s, cn_sign * cn, dn};
}

double phase_from_pair(double rho, double sn_val, int cn_sign) {
  check_rho(rho);
  if (!(std::fabs(sn_val) <= 1.0)) {
    throw std::invalid_argument("elliptic::phase_from_pair: |sn_val| must be <= 1");
  }
  const bool at_extreme = std::fabs(sn_val) == 1.0;
  if (cn_sign != 1 && cn_sign != -1 && !at_extreme) {
    throw std::invalid_argument("elliptic::phase_from_pair: cn_sign must be +1 or -1");
  }
  const double K = quarter_period(rho);
  const double u_ref = incomplete(rho, std::fabs(sn_val));
  double theta0;
  if (sn_val >= 0.0) {
    theta0 = (cn_sign >= 0 || at_extreme) ? u_ref : 2.0 * K - u_ref;
  } else {
    theta0 = (cn_sign < 0 || at_extreme) ? 2.0 * K + u_ref : 4.0 * K - u_ref;
  }
  if (theta0 >= 4.0 * K) theta0 -= 4.0 * K;
  return theta0;
}

}  // namespace splitflow::elliptic
