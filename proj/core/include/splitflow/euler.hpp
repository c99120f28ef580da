#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "splitflow/splitting.hpp"

namespace splitflow::euler {

/// A mode of the truncated lattice: j != 0 with 0 <= j1 <= N, 0 <= j2 <= N.
struct LatticeIndex {
  int j1 = 0, j2 = 0;
  friend auto operator<=>(const LatticeIndex&, const LatticeIndex&) = default;
};

inline int norm2(LatticeIndex j) { return j.j1 * j.j1 + j.j2 * j.j2; }
inline int cross(LatticeIndex a, LatticeIndex b) {  // a . b^perp
  return a.j1 * b.j2 - a.j2 * b.j1;
}
inline LatticeIndex operator+(LatticeIndex a, LatticeIndex b) {
  return {a.j1 + b.j1, a.j2 + b.j2};
}

/// theta_{kl} = (k . l^perp) / (4 pi) * (1/|k|^2 - 1/|l|^2); symmetric in
/// (k,l), zero when |k| = |l| or k is parallel to l.
double theta(LatticeIndex k, LatticeIndex l);

/// Index bookkeeping for the truncation.  States are flat vectors laid out
/// as [a-block | b-block], each block in lexicographic mode order.
class Lattice {
 public:
  explicit Lattice(int N);  // N >= 4

  int N() const { return N_; }
  std::size_t size() const { return indices_.size(); }
  std::size_t dim() const { return 2 * indices_.size(); }
  std::span<const LatticeIndex> indices() const { return indices_; }
  bool contains(LatticeIndex j) const;
  std::size_t position(LatticeIndex j) const;
  std::size_t a_slot(LatticeIndex j) const { return position(j); }
  std::size_t b_slot(LatticeIndex j) const { return size() + position(j); }

 private:
  int N_;
  std::vector<LatticeIndex> indices_;
};

/// All lattice modes in lexicographic order; N(N+2) of them.
std::vector<LatticeIndex> build_index_set(int N);

enum class TriadFamily : std::uint8_t { aaa, abb, bab, bba };

/// One triad vector field: modes (j,k,l) with l = j + k and j.k^perp != 0,
/// plus the coordinate family it couples.  Keys are stored with j before k
/// in lexicographic order; each geometric triple contributes four keys.
struct TriadKey {
  LatticeIndex j, k, l;
  TriadFamily family = TriadFamily::aaa;
};

std::vector<TriadKey> enumerate_triads(const Lattice& lattice);

/// Geometric data shared by the four families of one triple.
struct TriadCoeffs {
  double th_kl = 0, th_jl = 0, th_jk = 0;
  double nj2 = 0, nk2 = 0, nl2 = 0;
};
TriadCoeffs triad_coeffs(LatticeIndex j, LatticeIndex k, LatticeIndex l);

struct Triple {
  double x = 0, y = 0, z = 0;
};

/// Relative energy E = x^2/|j|^2 + y^2/|k|^2 + z^2/|l|^2 and relative
/// enstrophy x^2 + y^2 + z^2 of the canonical triple.
struct ConservedPair {
  double energy = 0;
  double enstrophy = 0;
};
ConservedPair conserved_pair(const TriadCoeffs& c, Triple p);

/// Closed-form elliptic/trig parameters of one triad orbit.
struct TriadParams {
  double energy = 0, enstrophy = 0;
  double kappa1 = 0, gamma1 = 0, kappa2 = 0, gamma2 = 0;
  double rho = 0;
  double theta0 = 0;
  double rate = 0;  // argument advances as rate * t
  enum class Branch : std::uint8_t { a1_pos, a1_neg, a2_pos, a2_neg } branch =
      Branch::a1_pos;
  bool roles_swapped = false;  // internal |j|<|k| normalization applied
};

/// Raised when the relative energy sits on the separatrix E = ENS/|k|^2
/// (within kInterfaceTol * enstrophy); the elliptic parametrization
/// degenerates there and callers fall back to an adaptive integrator.
struct interface_degenerate_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kInterfaceTol = 1e-9;

/// Elliptic parameters for a triple with |j| != |k|.  Throws
/// interface_degenerate_error on the separatrix and std::invalid_argument
/// when |j| = |k| (the trig case has no elliptic parameters).
TriadParams triad_params(const TriadCoeffs& c, Triple p);

struct TripleFlowResult {
  Triple value;
  bool exact = true;  // false when the interface fallback integrator ran
};

/// Exact flow of the canonical triad ODE
///   x' = th_kl y z,  y' = th_jl x z,  z' = -th_jk x y
/// for time t >= 0: a rotation when |j| = |k|, a Jacobi-elliptic closed form
/// otherwise, and an adaptive-integrator fallback on the interface set.
/// `interface_tol` is the relative half-width of the fallback band around
/// E = ENS/|k|^2; callers whose states are certified off the interface (the
/// thermalization scan's margin-checked families) pass 0 to force the closed
/// form, which stays accurate down to 1 - rho ~ 1e-12.
TripleFlowResult triad_canonical_flow(const TriadCoeffs& c, Triple p, double t,
                                      double interface_tol = kInterfaceTol);

/// Sparse forcing specification: one amplitude on an a- or b-component.
struct ForcingEntry {
  LatticeIndex mode;
  char component = 'a';      // 'a' or 'b'
  std::uint32_t ell = 1;     // forcing field V_ell, 1-based
  double value = 0;
};

class System {
 public:
  System(int N, std::vector<std::pair<LatticeIndex, double>> damping,
         std::size_t forcing_count, const std::vector<ForcingEntry>& forcing);

  const Lattice& lattice() const { return lattice_; }
  std::size_t dim() const { return lattice_.dim(); }
  std::size_t forcing_count() const { return beta_.size(); }
  /// Dense forcing vector of V_ell (0-based ell here).
  std::span<const double> beta(std::size_t ell) const { return beta_[ell]; }
  std::span<const std::pair<std::size_t, double>> damped_slots() const {
    return damped_slots_;  // (position, lambda)
  }
  bool is_damped(LatticeIndex j) const;
  double min_damping_rate() const;
  double damping_rate(std::size_t position) const { return lambda_[position]; }
  std::span<const TriadKey> triads() const { return triads_; }

 private:
  Lattice lattice_;
  std::vector<double> lambda_;  // per mode position, 0 off the damped set
  std::vector<std::pair<std::size_t, double>> damped_slots_;
  std::vector<StateVector> beta_;
  std::vector<TriadKey> triads_;
};

struct GalerkinFlowResult {
  StateVector q;
  bool exact = true;
};

/// Applies one triad field to the full state; exactly three coordinates
/// change.  Throws std::invalid_argument on non-finite input.
GalerkinFlowResult triad_flow(const System& sys, const StateVector& q,
                              const TriadKey& key, double t);

/// a_j, b_j scaled by e^{-lambda_j t} on damped modes; H never increases.
StateVector damp_flow(const System& sys, const StateVector& q, double t);

/// q + t beta^ell (0-based ell).
StateVector force_flow(const System& sys, const StateVector& q, double t,
                       std::size_t ell);

/// Non-resonance discriminants of Eq. parameters (beta is a dense R^d
/// vector over the system's lattice layout).
struct NonresonanceDeltas {
  double delta1 = 0, delta2 = 0;
};
NonresonanceDeltas nonresonance_deltas(const Lattice& lattice, LatticeIndex j,
                                       LatticeIndex k, LatticeIndex l,
                                       std::span<const double> beta);

/// True iff some forcing vector is non-resonant for mode j: beta_{a_j} != 0
/// and both discriminants nonzero for every k with j + k in the lattice and
/// |j| != |k|.
bool is_nonresonant(const System& sys, LatticeIndex j);

enum class Assumption { df1, df2, neither };
Assumption check_assumption(const System& sys);

/// D_eta = { q : sum_{j damped} (a_j^2 + b_j^2) >= eta |q|^2 }.
bool in_dissipative_region(const System& sys, std::span<const double> q,
                           double eta);
RegionSpec dissipative_region(const System& sys, double eta);

/// Galerkin Euler right-hand side evaluated by a direct lattice double loop
/// (independent of the triad enumeration); the splitting fields sum to this.
StateVector full_rhs(const System& sys, std::span<const double> q);

/// zeta_0(j,k) = min{ (1/|j|^2 - 1/|k|^2) / (2d), (1/|k|^2 - 1/|l|^2) / (2d) };
/// requires 1/|j|^2 > 1/|k|^2 > 1/|l|^2 strictly.
double zeta0(LatticeIndex j, LatticeIndex k, LatticeIndex l, std::size_t d);

/// H(q) = |q| + 1.
double lyapunov_H(std::span<const double> q);

/// Field order: damp, V_1..V_m, then triads in enumeration order.
Splitting make_splitting(const System& sys);

inline constexpr std::uint32_t kDampFieldIndex = 0;
inline std::uint32_t force_field_index(std::size_t ell) {  // 0-based ell
  return static_cast<std::uint32_t>(1 + ell);
}
inline std::uint32_t triad_field_index(const System& sys, std::size_t key_pos) {
  return static_cast<std::uint32_t>(1 + sys.forcing_count() + key_pos);
}

}  // namespace splitflow::euler
