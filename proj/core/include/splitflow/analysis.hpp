#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "splitflow/euler.hpp"
#include "splitflow/splitting.hpp"

namespace splitflow::analysis {

/// Drift function G with its derived quantities K(t) = int_1^t ds/G(s),
/// the inverse K^{-1}, and r = (K^{-1})' = G o K^{-1}, which govern
/// return-time moments and tails.
struct RateFunctions {
  enum class Kind { power, stretch, numeric };
  std::function<double(double)> G, K, K_inverse, r;
  Kind kind = Kind::numeric;
  double alpha = 0;
  double a = 0;
};

/// G(t) = alpha t^a with alpha > 0 and a in (0,1]; closed forms throughout.
RateFunctions rate_functions_power(double alpha, double a);

/// G(t) = alpha (t + e^2) / log(t + e^2); closed forms throughout.
RateFunctions rate_functions_stretch(double alpha);

/// Numeric construction for a concave nondecreasing positive G; concavity,
/// monotonicity and positivity are spot-checked on the grid.
RateFunctions rate_functions_numeric(std::function<double(double)> G,
                                     std::span<const double> grid);

struct ProportionEstimate {
  double estimate = 0;
  double ci_halfwidth = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
};

/// 95% interval; normal approximation with a Wilson fallback for
/// proportions near 0 or 1.
ProportionEstimate proportion_ci(std::uint64_t successes, std::uint64_t trials);

using Functional = std::function<double(std::span<const double>)>;
using StateFactory = std::function<StateVector(double radius, RngStream&)>;

struct DriftPoint {
  double H0 = 0;
  double mean_H = 0;
  double ci_halfwidth = 0;
  std::uint64_t trials = 0;
  std::uint64_t overflows = 0;
};

struct DriftReport {
  std::vector<DriftPoint> points;
  int n_steps = 0;
  double alpha_hat = 0;
  double f_hat = 0;
};

/// Monte Carlo E_x[H(X_n)] at each radius plus a least-squares fit of
/// E[H(X_n)] ~ alpha_hat H(x) + f_hat with f_hat constrained >= 0.
/// Overflowing trials are excluded and counted.  Trial i at radius r uses
/// stream r * trials + i.
DriftReport estimate_drift(const Splitting& s, const Functional& H,
                           const StateFactory& make_state,
                           std::span<const double> radii, int n_steps,
                           std::uint64_t trials, double h, std::uint64_t seed,
                           unsigned workers = 1);

struct ReturnTimeSamples {
  std::vector<std::uint64_t> samples;  // uncensored T_R values
  std::uint64_t censored = 0;
  std::uint64_t trials = 0;
};

/// i.i.d. samples of T_R = min{ n >= 0 : H(X_n) <= R }, counted in blocks of
/// `steps_per_iteration` chain steps and censored at max_steps blocks.
ReturnTimeSamples return_time_samples(const Splitting& s, const StateVector& x,
                                      const Functional& H, double R,
                                      std::uint64_t max_steps,
                                      std::uint64_t trials, double h,
                                      std::uint64_t seed, unsigned workers = 1,
                                      unsigned steps_per_iteration = 1);

struct TightnessSpec {
  std::function<double(double)> G;  // applied to H(x) = |x| + 1
  double f = 0;
  double R = 0;
};

struct EmpiricalMeasureReport {
  std::vector<double> averages;
  std::uint64_t n = 0;
  double tightness_fraction = 0;  // mu_n( G(H) > R )
  double tightness_bound = 0;     // (H(x0) + f) / R
};

/// Single-trajectory time averages of the observables over X_0..X_{n-1},
/// with the Markov-inequality tightness diagnostic when requested.
EmpiricalMeasureReport empirical_measure(
    const Splitting& s, const StateVector& x0, std::uint64_t n, double h,
    std::uint64_t seed, const std::vector<Functional>& observables,
    const std::optional<TightnessSpec>& tightness = std::nullopt);

struct ThermalizationMargins {
  double xi = 0;    // enstrophy floor: xi <= ENS <= 1
  double zeta = 0;  // energy margins around the interface
};

struct ThermalizationScan {
  std::vector<double> deltas;
  std::vector<double> estimates;
  std::vector<double> ci_halfwidths;
  double eta = 0;
  double fitted_c = 0;  // min over the grid of estimate * |log delta|
};

/// Per-delta Monte Carlo estimate of P{ tau in B_{eta,delta} } where
/// B_{eta,delta} = { s : min(|x_s|,|y_s|,|z_s|) >= eta } along the
/// delta-rescaled triad flow started from base_state(delta), with
/// tau ~ exp(1/h).  Base states must satisfy the stated margins; a
/// violation throws std::invalid_argument naming the failed margin.
ThermalizationScan thermalization_scan(
    const euler::TriadCoeffs& coeffs,
    const std::function<euler::Triple(double delta)>& base_state,
    const ThermalizationMargins& margins, double eta,
    std::span<const double> deltas, std::uint64_t trials, double h,
    std::uint64_t seed, unsigned workers = 1);

struct EntranceScaling {
  std::vector<double> radii;        // H(q) values
  std::vector<double> estimates;    // single-cycle entrance probabilities
  std::vector<double> ci_halfwidths;
  std::vector<double> scaled;       // estimate * log H(q)
  double fitted_floor = 0;          // min over the grid of scaled
};

/// Single-cycle probability of entering D_eta with the damping flow next,
/// from uniformly random states on each sphere H(q) = R.  Requires the
/// system to satisfy DF1 or DF2.
EntranceScaling entrance_scaling(const euler::System& sys,
                                 std::span<const double> radii, double eta,
                                 std::uint64_t trials, double h,
                                 std::uint64_t seed, unsigned workers = 1);

/// The subconservation offset f_{n,k} = g_ell + ((m-1) n + m + k) sum_i f_i
/// used to annotate dissipative-event reports.
double subconservation_offset(double g_ell, double f_sum, std::size_t m,
                              std::uint64_t n, std::uint64_t k);

/// Uniformly random direction scaled so that |q| = radius.
StateVector random_sphere_state(std::size_t dim, double radius, RngStream& rng);

}  // namespace splitflow::analysis
