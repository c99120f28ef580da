#pragma once

#include <stdexcept>

namespace splitflow::elliptic {

// The module parameter rho is the PARAMETER m of standard references
// (m = k^2 where k is the modulus), matching T_rho(s) = int_0^s
// db / (sqrt(1 - rho b^2) sqrt(1 - b^2)).

/// Largest admissible rho; above this the modulus is treated as degenerate.
inline constexpr double kRhoMax = 1.0 - 1e-12;

/// Quarter period K_rho = T_rho(1), by the arithmetic-geometric mean.
/// K_0 = pi/2 exactly.  Throws std::invalid_argument for rho outside
/// [0, kRhoMax] (rho >= 1 has no finite period; rho > kRhoMax is degenerate).
double quarter_period(double rho);

/// Incomplete integral T_rho(s) for s in [0,1]; strictly increasing,
/// T_rho(0) = 0 and T_rho(1) = K_rho.
double incomplete(double rho, double s);

struct JacobiTriple {
  double sn, cn, dn;
};

/// sn, cn, dn at any real x, reduced mod 4*K_rho with the piecewise
/// reflection rules:
///   sn(x) = sn(2K - x) on [K,2K],  sn(x) = -sn(4K - x) on [2K,4K],
///   cn(x) = -cn(2K - x) on [K,2K], cn(x) = cn(4K - x) on [2K,4K],
///   dn(x) = sqrt(1 - rho sn(x)^2) everywhere.
/// On [0,K] the values come from a descending-Landen (AGM) chain.
JacobiTriple jacobi(double rho, double x);

/// The unique theta0 in [0, 4K_rho) with sn(theta0) = sn_val and cn(theta0)
/// of the requested sign (cn_sign in {-1,+1}; at |sn_val| = 1 the sign is
/// irrelevant).  Throws std::invalid_argument for |sn_val| > 1 or cn_sign
/// outside {-1,+1}.
double phase_from_pair(double rho, double sn_val, int cn_sign);

}  // namespace splitflow::elliptic
