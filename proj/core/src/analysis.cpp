#include "splitflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

namespace splitflow::analysis {

namespace {

constexpr double kZ95 = 1.959963984540054;

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  // roundoff floor keeps noise from forcing full-depth recursion
  const double tol_next =
      std::max(0.5 * tol, 4e-16 * (std::fabs(left) + std::fabs(right)));
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol_next, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol_next, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

RateFunctions rate_functions_power(double alpha, double a) {
  if (!(alpha > 0) || !(a > 0 && a <= 1)) {
    throw std::invalid_argument(
        "rate_functions_power: need alpha > 0 and a in (0,1]");
  }
  RateFunctions rf;
  rf.kind = RateFunctions::Kind::power;
  rf.alpha = alpha;
  rf.a = a;
  rf.G = [alpha, a](double t) { return alpha * std::pow(t, a); };
  if (a == 1.0) {
    rf.K = [alpha](double t) { return std::log(t) / alpha; };
    rf.K_inverse = [alpha](double t) { return std::exp(alpha * t); };
    rf.r = [alpha](double t) { return alpha * std::exp(alpha * t); };
  } else {
    rf.K = [alpha, a](double t) {
      return (std::pow(t, 1.0 - a) - 1.0) / (alpha * (1.0 - a));
    };
    rf.K_inverse = [alpha, a](double t) {
      return std::pow(alpha * (1.0 - a) * t + 1.0, 1.0 / (1.0 - a));
    };
    rf.r = [alpha, a](double t) {
      return alpha * std::pow(alpha * (1.0 - a) * t + 1.0, a / (1.0 - a));
    };
  }
  return rf;
}

RateFunctions rate_functions_stretch(double alpha) {
  if (!(alpha > 0)) {
    throw std::invalid_argument("rate_functions_stretch: need alpha > 0");
  }
  const double e2 = std::exp(2.0);
  const double c = std::log(1.0 + e2);  // K(1) = 0 anchors here
  RateFunctions rf;
  rf.kind = RateFunctions::Kind::stretch;
  rf.alpha = alpha;
  rf.G = [alpha, e2](double t) {
    return alpha * (t + e2) / std::log(t + e2);
  };
  rf.K = [alpha, e2, c](double t) {
    const double l = std::log(t + e2);
    return (l * l - c * c) / (2.0 * alpha);
  };
  rf.K_inverse = [alpha, e2, c](double t) {
    return std::exp(std::sqrt(2.0 * alpha * t + c * c)) - e2;
  };
  rf.r = [alpha, c](double t) {
    const double root = std::sqrt(2.0 * alpha * t + c * c);
    return alpha * std::exp(root) / root;
  };
  return rf;
}

RateFunctions rate_functions_numeric(std::function<double(double)> G,
                                     std::span<const double> grid) {
  if (grid.size() < 3) {
    throw std::invalid_argument("rate_functions_numeric: grid needs >= 3 points");
  }
  std::vector<double> pts(grid.begin(), grid.end());
  std::sort(pts.begin(), pts.end());
  if (pts.front() < 1.0) {
    throw std::invalid_argument("rate_functions_numeric: grid must start at t >= 1");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double g = G(pts[i]);
    if (!(g > 0)) {
      throw std::invalid_argument("rate_functions_numeric: G must be positive");
    }
    if (i > 0 && G(pts[i]) < G(pts[i - 1]) * (1.0 - 1e-12)) {
      throw std::invalid_argument("rate_functions_numeric: G must be nondecreasing");
    }
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double u = pts[i], v = pts[i + 1];
    const double mid = 0.5 * (u + v);
    const double chord = 0.5 * (G(u) + G(v));
    if (G(mid) < chord * (1.0 - 1e-9)) {
      throw std::invalid_argument("rate_functions_numeric: G fails concavity check");
    }
  }

  auto Gf = std::make_shared<std::function<double(double)>>(std::move(G));
  RateFunctions rf;
  rf.kind = RateFunctions::Kind::numeric;
  rf.G = [Gf](double t) { return (*Gf)(t); };
  auto K = [Gf](double t) {
    if (t < 1.0) throw std::invalid_argument("RateFunctions::K: t must be >= 1");
    return adaptive_simpson([&](double s) { return 1.0 / (*Gf)(s); }, 1.0, t,
                            1e-12 * std::max(1.0, t - 1.0));
  };
  rf.K = K;
  rf.K_inverse = [K](double y) {
    if (y < 0) throw std::invalid_argument("RateFunctions::K_inverse: t must be >= 0");
    if (y == 0) return 1.0;
    double lo = 1.0, hi = 2.0;
    while (K(hi) < y) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw std::runtime_error("K_inverse: bracket overflow");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (K(mid) < y) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 1e-12 * hi) break;
    }
    return 0.5 * (lo + hi);
  };
  auto kinv = rf.K_inverse;
  rf.r = [Gf, kinv](double t) { return (*Gf)(kinv(t)); };
  return rf;
}

ProportionEstimate proportion_ci(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("proportion_ci: trials >= 1");
  ProportionEstimate e;
  e.trials = trials;
  e.successes = successes;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  e.estimate = p;
  // Wilson near the boundary, where the normal halfwidth degenerates.
  if (successes < 5 || trials - successes < 5) {
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    e.ci_halfwidth =
        kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  } else {
    e.ci_halfwidth = kZ95 * std::sqrt(p * (1.0 - p) / n);
  }
  return e;
}

DriftReport estimate_drift(const Splitting& s, const Functional& H,
                           const StateFactory& make_state,
                           std::span<const double> radii, int n_steps,
                           std::uint64_t trials, double h, std::uint64_t seed,
                           unsigned workers) {
  if (trials < 100) {
    throw std::invalid_argument("estimate_drift: trials must be >= 100");
  }
  if (n_steps < 0) throw std::invalid_argument("estimate_drift: n_steps >= 0");
  DriftReport report;
  report.n_steps = n_steps;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double radius = radii[ri];
    std::vector<double> values(trials);
    std::vector<std::uint8_t> failed(trials, 0);
    parallel_for(trials, workers, [&](std::uint64_t i) {
      RngStream rng(seed, ri * trials + i);
      StateVector x = make_state(radius, rng);
      try {
        ChainWalker walker(s, std::move(x), h);
        for (int k = 0; k < n_steps; ++k) walker.advance(rng);
        values[i] = H(walker.state());
      } catch (const overflow_error&) {
        failed[i] = 1;
      }
    });
    DriftPoint pt;
    pt.trials = trials;
    double sum = 0;
    std::uint64_t good = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      if (failed[i]) {
        ++pt.overflows;
      } else {
        sum += values[i];
        ++good;
      }
    }
    RngStream probe(seed, ri * trials);
    pt.H0 = H(make_state(radius, probe));
    if (good > 0) {
      pt.mean_H = sum / static_cast<double>(good);
      double var = 0;
      for (std::uint64_t i = 0; i < trials; ++i) {
        if (!failed[i]) {
          const double d = values[i] - pt.mean_H;
          var += d * d;
        }
      }
      if (good > 1) {
        var /= static_cast<double>(good - 1);
        pt.ci_halfwidth = kZ95 * std::sqrt(var / static_cast<double>(good));
      }
    }
    report.points.push_back(pt);
  }
  // Least squares of mean_H against H0 with f_hat >= 0.
  const std::size_t n = report.points.size();
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const DriftPoint& p : report.points) {
      sx += p.H0;
      sy += p.mean_H;
      sxx += p.H0 * p.H0;
      sxy += p.H0 * p.mean_H;
    }
    const double denom = n * sxx - sx * sx;
    double alpha = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
    double f = (sy - alpha * sx) / n;
    if (f < 0) {
      f = 0;
      alpha = sxx != 0 ? sxy / sxx : 0.0;
    }
    report.alpha_hat = alpha;
    report.f_hat = f;
  } else if (n == 1) {
    report.alpha_hat = report.points[0].mean_H / std::max(report.points[0].H0, 1.0);
    report.f_hat = 0;
  }
  return report;
}

ReturnTimeSamples return_time_samples(const Splitting& s, const StateVector& x,
                                      const Functional& H, double R,
                                      std::uint64_t max_steps,
                                      std::uint64_t trials, double h,
                                      std::uint64_t seed, unsigned workers,
                                      unsigned steps_per_iteration) {
  if (trials == 0) throw std::invalid_argument("return_time_samples: trials >= 1");
  if (steps_per_iteration == 0) {
    throw std::invalid_argument("return_time_samples: steps_per_iteration >= 1");
  }
  std::vector<std::uint64_t> raw(trials, 0);
  std::vector<std::uint8_t> censored(trials, 0);
  parallel_for(trials, workers, [&](std::uint64_t i) {
    RngStream rng(seed, i);
    if (H(x) <= R) {
      raw[i] = 0;
      return;
    }
    ChainWalker walker(s, x, h);
    std::uint64_t n = 0;
    try {
      while (true) {
        if (H(walker.state()) <= R) {
          raw[i] = n;
          return;
        }
        if (n >= max_steps) {
          censored[i] = 1;
          return;
        }
        for (unsigned k = 0; k < steps_per_iteration; ++k) walker.advance(rng);
        ++n;
      }
    } catch (overflow_error& e) {
      e.trajectory = i;
      throw;
    }
  });
  ReturnTimeSamples out;
  out.trials = trials;
  for (std::uint64_t i = 0; i < trials; ++i) {
    if (censored[i]) {
      ++out.censored;
    } else {
      out.samples.push_back(raw[i]);
    }
  }
  return out;
}

EmpiricalMeasureReport empirical_measure(
    const Splitting& s, const StateVector& x0, std::uint64_t n, double h,
    std::uint64_t seed, const std::vector<Functional>& observables,
    const std::optional<TightnessSpec>& tightness) {
  if (n == 0) throw std::invalid_argument("empirical_measure: n >= 1");
  EmpiricalMeasureReport report;
  report.n = n;
  report.averages.assign(observables.size(), 0.0);
  RngStream rng(seed, 0);
  ChainWalker walker(s, x0, h);
  const double H0 = std::sqrt(std::inner_product(x0.begin(), x0.end(),
                                                 x0.begin(), 0.0)) +
                    1.0;
  std::uint64_t exceed = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const StateVector& x = walker.state();
    for (std::size_t i = 0; i < observables.size(); ++i) {
      report.averages[i] += observables[i](x);
    }
    if (tightness) {
      const double Hx = std::sqrt(std::inner_product(x.begin(), x.end(),
                                                     x.begin(), 0.0)) +
                        1.0;
      if (tightness->G(Hx) > tightness->R) ++exceed;
    }
    if (k + 1 < n) walker.advance(rng);
  }
  for (double& v : report.averages) v /= static_cast<double>(n);
  if (tightness) {
    report.tightness_fraction = static_cast<double>(exceed) / static_cast<double>(n);
    report.tightness_bound = (H0 + tightness->f) / tightness->R;
  }
  return report;
}

namespace {

void check_margin(bool ok, const char* name) {
  if (!ok) {
    throw std::invalid_argument(
        std::string("thermalization_scan: margin violated: ") + name);
  }
}

}  // namespace

ThermalizationScan thermalization_scan(
    const euler::TriadCoeffs& coeffs,
    const std::function<euler::Triple(double delta)>& base_state,
    const ThermalizationMargins& margins, double eta,
    std::span<const double> deltas, std::uint64_t trials, double h,
    std::uint64_t seed, unsigned workers) {
  if (trials == 0) throw std::invalid_argument("thermalization_scan: trials >= 1");
  if (!(eta > 0)) throw std::invalid_argument("thermalization_scan: eta > 0");
  ThermalizationScan scan;
  scan.eta = eta;
  scan.fitted_c = 0;
  const double slack = 1e-9;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    if (!(delta > 0 && delta < 1)) {
      throw std::invalid_argument("thermalization_scan: deltas must lie in (0,1)");
    }
    const euler::Triple p = base_state(delta);
    const auto [E, ens] = euler::conserved_pair(coeffs, p);
    check_margin(ens >= margins.xi * (1.0 - slack), "xi <= enstrophy");
    check_margin(ens <= 1.0 + slack, "enstrophy <= 1");
    const double invj = 1.0 / coeffs.nj2, invk = 1.0 / coeffs.nk2,
                 invl = 1.0 / coeffs.nl2;
    if (!(invj > invk)) {
      throw std::invalid_argument("thermalization_scan: triad needs |j| < |k|");
    }
    const double lo_a1 = ens * invl + margins.zeta;
    const double hi_a1 = ens * invk - margins.zeta * delta * delta;
    const double lo_a2 = ens * invk + margins.zeta * delta * delta;
    const double hi_a2 = ens * invj - margins.zeta;
    const double tol = slack * ens;
    const bool a1 = E >= lo_a1 - tol && E <= hi_a1 + tol;
    const bool a2 = E >= lo_a2 - tol && E <= hi_a2 + tol;
    check_margin(a1 || a2,
                 "ENS/|l|^2 + zeta <= E <= ENS/|k|^2 - zeta delta^2 (or the "
                 "A2 mirror)");

    // The delta-rescaled flow of (x,y,z) equals delta times the unscaled
    // canonical flow started from (x,y,z)/delta.
    const euler::Triple up{p.x / delta, p.y / delta, p.z / delta};
    std::vector<std::uint8_t> hits(trials, 0);
    parallel_for(trials, workers, [&](std::uint64_t i) {
      RngStream rng(seed, di * trials + i);
      const double tau = rng.exponential(h);
      // margin-checked states are certified off the interface, so the
      // closed form is forced (interface_tol = 0)
      const euler::Triple q =
          euler::triad_canonical_flow(coeffs, up, tau, 0.0).value;
      const double m = std::min({std::fabs(q.x), std::fabs(q.y), std::fabs(q.z)});
      hits[i] = (m * delta >= eta) ? 1 : 0;
    });
    std::uint64_t successes = 0;
    for (std::uint8_t b : hits) successes += b;
    const ProportionEstimate pe = proportion_ci(successes, trials);
    scan.deltas.push_back(delta);
    scan.estimates.push_back(pe.estimate);
    scan.ci_halfwidths.push_back(pe.ci_halfwidth);
    const double scaled = pe.estimate * std::fabs(std::log(delta));
    scan.fitted_c = di == 0 ? scaled : std::min(scan.fitted_c, scaled);
  }
  return scan;
}

EntranceScaling entrance_scaling(const euler::System& sys,
                                 std::span<const double> radii, double eta,
                                 std::uint64_t trials, double h,
                                 std::uint64_t seed, unsigned workers) {
  if (euler::check_assumption(sys) == euler::Assumption::neither) {
    throw std::invalid_argument(
        "entrance_scaling: system satisfies neither DF1 nor DF2");
  }
  if (trials == 0) throw std::invalid_argument("entrance_scaling: trials >= 1");
  const Splitting s = euler::make_splitting(sys);
  const RegionSpec region = euler::dissipative_region(sys, eta);
  EntranceScaling out;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double R = radii[ri];
    if (!(R > 1)) throw std::invalid_argument("entrance_scaling: radii must exceed 1");
    std::vector<std::uint8_t> hits(trials, 0);
    parallel_for(trials, workers, [&](std::uint64_t i) {
      RngStream rng(seed, ri * trials + i);
      const StateVector q = random_sphere_state(sys.dim(), R - 1.0, rng);
      const CycleProgram program = sample_cycle(rng, s.size(), h);
      try {
        hits[i] = entrance_event_streaming(s, q, program, region,
                                           euler::kDampFieldIndex)
                      ? 1
                      : 0;
      } catch (overflow_error& e) {
        e.trajectory = i;
        throw;
      }
    });
    std::uint64_t successes = 0;
    for (std::uint8_t b : hits) successes += b;
    const ProportionEstimate pe = proportion_ci(successes, trials);
    out.radii.push_back(R);
    out.estimates.push_back(pe.estimate);
    out.ci_halfwidths.push_back(pe.ci_halfwidth);
    const double scaled = pe.estimate * std::log(R);
    out.scaled.push_back(scaled);
    out.fitted_floor = ri == 0 ? scaled : std::min(out.fitted_floor, scaled);
  }
  return out;
}

double subconservation_offset(double g_ell, double f_sum, std::size_t m,
                              std::uint64_t n, std::uint64_t k) {
  if (m == 0) throw std::invalid_argument("subconservation_offset: m >= 1");
  return g_ell + (static_cast<double>(m - 1) * static_cast<double>(n) +
                  static_cast<double>(m) + static_cast<double>(k)) *
                     f_sum;
}

StateVector random_sphere_state(std::size_t dim, double radius, RngStream& rng) {
  StateVector q(dim);
  double norm2 = 0;
  for (double& v : q) {
    v = rng.normal();
    norm2 += v * v;
  }
  const double scale = radius / std::sqrt(norm2);
  for (double& v : q) v *= scale;
  return q;
}

}  // namespace splitflow::analysis
