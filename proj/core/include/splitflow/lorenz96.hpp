#pragma once

#include <optional>
#include <span>
#include <vector>

#include "splitflow/splitting.hpp"

namespace splitflow::lorenz96 {

/// The forced, mode-1-damped Lorenz '96 system
///   dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1} - delta_{1i} x_i + beta_i
/// on the discrete circle.  Mode indices are 0-based in this API; the
/// damped coordinate is x[0].
struct System {
  int d;
  std::vector<double> beta;

  System(int dim, std::vector<double> forcing);
  /// Scalar broadcast: beta_i = b for all i.
  System(int dim, double b);

  double beta_norm() const;
};

/// Exact flow of the conservative rotation field V_{mode+1}: coordinates
/// (x[mode], x[mode+1]) rotate at signed rate x[mode-1]; |x| is conserved.
void rotation_flow_inplace(const System& sys, std::span<double> x, int mode,
                           double t);
StateVector rotation_flow(const System& sys, const StateVector& x, int mode,
                          double t);

/// Exact flow of the damped/forced field V_star:
///   x[0] -> e^{-t} x[0] + (1 - e^{-t}) beta[0],  x[i] -> x[i] + beta[i] t.
void star_flow_inplace(const System& sys, std::span<double> x, double t);
StateVector star_flow(const System& sys, const StateVector& x, double t);

/// Full drift V(x); the splitting fields sum to this pointwise.
StateVector full_drift(const System& sys, std::span<const double> x);

/// H(x) = |x| + 1.
double lyapunov_H(std::span<const double> x);

/// D_eta = { x : x_1^2 >= eta |x|^2 }, eta in (0,1).
bool in_dissipative_region(std::span<const double> x, double eta);
RegionSpec dissipative_region(double eta);

/// Nested radii for the energy ladder: R_0 = 1/sqrt(d), R_j = R_{j-1} h / 16,
/// outer radius R = 2^{d+5} (|beta| v 1) / R_{d-1}, and R_* = 2^{d-1} R + 1.
struct LadderConfig {
  int d = 0;
  double h = 0;
  double beta_norm = 0;
  std::vector<double> R;  // R[0..d-1]
  double outer_R = 0;
  double R_star = 0;
};

LadderConfig make_ladder(const System& sys, double h);

/// Smallest j in 1..d with x in U_j, or nullopt when H(x) <= R_*.  Every x
/// with H(x) > R_* has an index (covering property).
std::optional<int> ladder_region_index(const System& sys,
                                       const LadderConfig& ladder,
                                       std::span<const double> x);

/// Checks the smallness conditions on the cycle mean h:
/// h < pi/12, e^{-6h} >= 3/4, 1 - e^{-5h} - 3h e^{-5h} >= h, and the
/// sine-window implication |sin|y|| <= h  =>  ||y| - j pi| < 3h, verified
/// on a grid over |y| in [0, 4 pi].
bool h_star_valid(double h);

/// Splitting { V_1, ..., V_d, V_star }; the star field has index d.
Splitting make_splitting(const System& sys);

inline std::uint32_t star_field_index(const System& sys) {
  return static_cast<std::uint32_t>(sys.d);
}

}  // namespace splitflow::lorenz96
