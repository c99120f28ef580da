#include "experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "csv.hpp"
#include "splitflow/analysis.hpp"
#include "splitflow/lorenz96.hpp"

namespace splitflow::cli {

namespace {

using nlohmann::json;
namespace an = splitflow::analysis;
namespace lz = splitflow::lorenz96;
namespace eu = splitflow::euler;
namespace fs = std::filesystem;

struct Context {
  const RunConfig* cfg;
  std::string out_dir;
  std::uint64_t seed;
  unsigned workers;
  std::vector<std::string> outputs;
  json extras;  // experiment-specific manifest fields

  std::string path(const std::string& file) {
    outputs.push_back(file);
    return (fs::path(out_dir) / file).string();
  }
  double h() const {
    return is_lorenz(*cfg) ? lorenz_block(*cfg).h : euler_block(*cfg).h;
  }
};

void require_exp_keys(const json& exp, const std::set<std::string>& required,
                      const std::set<std::string>& optional = {}) {
  std::set<std::string> req = required;
  req.insert("type");
  for (const auto& [key, value] : exp.items()) {
    if (!req.count(key) && !optional.count(key)) {
      throw config_error("/experiment/" + key, "unknown key");
    }
  }
  for (const std::string& key : req) {
    if (!exp.contains(key)) {
      throw config_error("/experiment/" + key, "missing required key");
    }
  }
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    throw config_error(path, "expected a non-empty array of numbers");
  }
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw config_error(path, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

an::Functional norm_plus_one() {
  return [](std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s) + 1.0;
  };
}

Splitting build_splitting(const RunConfig& cfg) {
  if (is_lorenz(cfg)) {
    const LorenzBlock& b = lorenz_block(cfg);
    return lz::make_splitting(lz::System(b.d, b.beta));
  }
  return eu::make_splitting(build_euler_system(euler_block(cfg)));
}

struct TriadSpec {
  eu::LatticeIndex j, k, l;
  eu::TriadCoeffs coeffs;
};

TriadSpec parse_triad(const json& exp, const eu::Lattice& lattice) {
  const json& triad = exp.at("triad");
  for (const auto& [key, value] : triad.items()) {
    if (key != "j" && key != "k") {
      throw config_error("/experiment/triad/" + key, "unknown key");
    }
  }
  auto mode = [&](const char* key) {
    const json& v = triad.at(key);
    if (!v.is_array() || v.size() != 2) {
      throw config_error(std::string("/experiment/triad/") + key,
                         "expected [j1, j2]");
    }
    return eu::LatticeIndex{v[0].get<int>(), v[1].get<int>()};
  };
  TriadSpec spec;
  spec.j = mode("j");
  spec.k = mode("k");
  spec.l = spec.j + spec.k;
  for (auto m : {spec.j, spec.k, spec.l}) {
    if (!lattice.contains(m)) {
      throw config_error("/experiment/triad", "modes must lie in the lattice");
    }
  }
  if (eu::cross(spec.j, spec.k) == 0) {
    throw config_error("/experiment/triad", "j and k must not be parallel");
  }
  spec.coeffs = eu::triad_coeffs(spec.j, spec.k, spec.l);
  return spec;
}

// ---------------------------------------------------------------- simulate

void run_simulate(Context& ctx) {
  const json& exp = ctx.cfg->experiment;
  require_exp_keys(exp, {"steps"}, {"stride", "initial_radius"});
  const std::uint64_t steps = exp.at("steps").get<std::uint64_t>();
  const std::uint64_t stride =
      exp.contains("stride") ? exp.at("stride").get<std::uint64_t>() : 1;
  if (stride == 0) throw config_error("/experiment/stride", "stride must be >= 1");
  const double radius =
      exp.contains("initial_radius") ? exp.at("initial_radius").get<double>() : 10.0;

  const Splitting s = build_splitting(*ctx.cfg);
  RngStream rng(ctx.seed, 0);
  StateVector x0 = an::random_sphere_state(s.dim(), radius, rng);

  std::vector<std::string> header{"step", "H"};
  for (std::size_t i = 0; i < s.dim(); ++i) header.push_back("x" + std::to_string(i));
  CsvWriter csv(ctx.path("trajectory.csv"), header);
  const an::Functional H = norm_plus_one();
  ChainWalker walker(s, x0, ctx.h());
  for (std::uint64_t n = 0; n <= steps; ++n) {
    if (n % stride == 0) {
      std::vector<double> row{static_cast<double>(n), H(walker.state())};
      row.insert(row.end(), walker.state().begin(), walker.state().end());
      csv.row(row);
    }
    if (n < steps) walker.advance(rng);
  }
  csv.close();
}

// ------------------------------------------------------------------- drift

void run_drift(Context& ctx) {
  const json& exp = ctx.cfg->experiment;
  require_exp_keys(exp, {"radii", "n_steps"});
  const std::vector<double> radii = number_list(exp.at("radii"), "/experiment/radii");
  const int n_steps = exp.at("n_steps").get<int>();

  const Splitting s = build_splitting(*ctx.cfg);
  const std::size_t dim = s.dim();
  const an::StateFactory factory = [dim](double radius, RngStream& rng) {
    return an::random_sphere_state(dim, radius - 1.0, rng);
  };
  const an::DriftReport rep =
      an::estimate_drift(s, norm_plus_one(), factory, radii, n_steps,
                         ctx.cfg->trials, ctx.h(), ctx.seed, ctx.workers);

  CsvWriter csv(ctx.path("drift.csv"),
                {"H0", "mean_H", "ci_halfwidth", "trials", "overflows"});
  for (const auto& pt : rep.points) {
    csv.row({pt.H0, pt.mean_H, pt.ci_halfwidth, static_cast<double>(pt.trials),
             static_cast<double>(pt.overflows)});
  }
  csv.close();
  CsvWriter fit(ctx.path("drift_fit.csv"), {"alpha_hat", "f_hat", "n_steps"});
  fit.row({rep.alpha_hat, rep.f_hat, static_cast<double>(rep.n_steps)});
  fit.close();
  ctx.extras["alpha_hat"] = rep.alpha_hat;
  ctx.extras["f_hat"] = rep.f_hat;
}

// ---------------------------------------------------------------- entrance

void run_entrance(Context& ctx) {
  const json& exp = ctx.cfg->experiment;
  if (is_lorenz(*ctx.cfg)) {
    require_exp_keys(exp, {}, {"eta"});
    const LorenzBlock& b = lorenz_block(*ctx.cfg);
    const lz::System sys(b.d, b.beta);
    const Splitting s = lz::make_splitting(sys);
    const lz::LadderConfig ladder = lz::make_ladder(sys, b.h);
    const double eta =
        exp.contains("eta") ? exp.at("eta").get<double>() : ladder.R[b.d - 1];
    // A U_1 state that already sits in D_eta: all mass on the damped mode.
    StateVector x(b.d, 0.0);
    x[0] = 2.0 * ladder.R_star;
    const EntranceEstimate e = estimate_entrance_probability(
        s, x, lz::dissipative_region(eta), lz::star_field_index(sys),
        ctx.cfg->trials, b.h, ctx.seed, 0, ctx.workers);
    const double bound = 1.0 / static_cast<double>(b.d + 1);
    CsvWriter csv(ctx.path("entrance.csv"),
                  {"H", "estimate", "ci_halfwidth", "lower_bound"});
    csv.row({lz::lyapunov_H(x), e.estimate, e.ci_halfwidth, bound});
    csv.close();
    ctx.extras["lower_bound"] = bound;
    ctx.extras["satisfied"] = e.estimate >= bound - 3.0 * e.ci_halfwidth / 1.96;
    return;
  }
  require_exp_keys(exp, {"radii", "eta"});
  const std::vector<double> radii = number_list(exp.at("radii"), "/experiment/radii");
  const double eta = exp.at("eta").get<double>();
  const eu::System sys = build_euler_system(euler_block(*ctx.cfg));
  const an::EntranceScaling es = an::entrance_scaling(
      sys, radii, eta, ctx.cfg->trials, ctx.h(), ctx.seed, ctx.workers);
  CsvWriter csv(ctx.path("entrance.csv"),
                {"H", "estimate", "ci_halfwidth", "estimate_times_logH"});
  for (std::size_t i = 0; i < es.radii.size(); ++i) {
    csv.row({es.radii[i], es.estimates[i], es.ci_halfwidths[i], es.scaled[i]});
  }
  csv.close();
  ctx.extras["fitted_floor"] = es.fitted_floor;
}

// -------------------------------------------------------------- thermalize

void run_thermalize(Context& ctx) {
  if (is_lorenz(*ctx.cfg)) {
    throw config_error("/experiment/type", "thermalize requires an euler system");
  }
  const json& exp = ctx.cfg->experiment;
  require_exp_keys(exp, {"triad", "enstrophy", "zeta", "xi", "eta", "deltas"},
                   {"kick"});
  const eu::System sys = build_euler_system(euler_block(*ctx.cfg));
  const TriadSpec triad = parse_triad(exp, sys.lattice());
  if (triad.coeffs.nj2 >= triad.coeffs.nk2) {
    throw config_error("/experiment/triad", "need |j| < |k| for the scan");
  }
  const double ens = exp.at("enstrophy").get<double>();
  const double zeta = exp.at("zeta").get<double>();
  const double xi = exp.at("xi").get<double>();
  const double eta = exp.at("eta").get<double>();
  const std::vector<double> deltas = number_list(exp.at("deltas"), "/experiment/deltas");

  // optional forcing kick applied to the rescaled base point; the kick of
  // duration tau moves the coordinates by delta * tau * beta_triple
  std::array<double, 3> kick_beta{0, 0, 0};
  double kick_tau = 0;
  if (exp.contains("kick")) {
    const json& kick = exp.at("kick");
    for (const auto& [key, value] : kick.items()) {
      if (key != "beta" && key != "tau") {
        throw config_error("/experiment/kick/" + key, "unknown key");
      }
    }
    const auto kb = number_list(kick.at("beta"), "/experiment/kick/beta");
    if (kb.size() != 3) {
      throw config_error("/experiment/kick/beta", "expected three amplitudes");
    }
    std::copy(kb.begin(), kb.end(), kick_beta.begin());
    kick_tau = kick.at("tau").get<double>();
  }

  const eu::TriadCoeffs c = triad.coeffs;
  const auto family = [c, ens, zeta, kick_beta, kick_tau](double delta) {
    const double invj = 1.0 / c.nj2, invk = 1.0 / c.nk2, invl = 1.0 / c.nl2;
    const double E = ens * invk - zeta * delta * delta;
    const double kappa1 = (E - ens * invl) / (invj - invl);
    const double kappa2 = (ens * invj - E) / (invj - invl);
    eu::Triple p{std::sqrt(kappa1), 0.0, std::sqrt(kappa2)};
    p.x += delta * kick_tau * kick_beta[0];
    p.y += delta * kick_tau * kick_beta[1];
    p.z += delta * kick_tau * kick_beta[2];
    return p;
  };

  const an::ThermalizationScan scan = an::thermalization_scan(
      c, family, {xi, zeta}, eta, deltas, ctx.cfg->trials, ctx.h(), ctx.seed,
      ctx.workers);
  CsvWriter csv(ctx.path("thermalize.csv"),
                {"delta", "estimate", "ci", "estimate_times_logdelta"});
  for (std::size_t i = 0; i < scan.deltas.size(); ++i) {
    csv.row({scan.deltas[i], scan.estimates[i], scan.ci_halfwidths[i],
             scan.estimates[i] * std::fabs(std::log(scan.deltas[i]))});
  }
  csv.close();
  ctx.extras["fitted_c"] = scan.fitted_c;
}

// ------------------------------------------------------------- return-time

void run_return_time(Context& ctx) {
  if (!is_lorenz(*ctx.cfg)) {
    throw config_error("/experiment/type", "return-time requires a lorenz96 system");
  }
  const json& exp = ctx.cfg->experiment;
  require_exp_keys(exp, {"start_H", "fit_radii", "fit_trials", "max_blocks"},
                   {"level"});
  const LorenzBlock& b = lorenz_block(*ctx.cfg);
  const lz::System sys(b.d, b.beta);
  const Splitting s = lz::make_splitting(sys);
  const unsigned block = static_cast<unsigned>(b.d + 1);
  const double start_H = exp.at("start_H").get<double>();
  const std::vector<double> fit_radii =
      number_list(exp.at("fit_radii"), "/experiment/fit_radii");
  const std::uint64_t fit_trials = exp.at("fit_trials").get<std::uint64_t>();
  const std::uint64_t max_blocks = exp.at("max_blocks").get<std::uint64_t>();

  const std::size_t dim = s.dim();
  const an::StateFactory factory = [dim](double radius, RngStream& rng) {
    return an::random_sphere_state(dim, radius - 1.0, rng);
  };
  const an::DriftReport fit =
      an::estimate_drift(s, norm_plus_one(), factory, fit_radii,
                         static_cast<int>(block), fit_trials, b.h,
                         RngStream::mix64(ctx.seed), ctx.workers);
  if (!(fit.alpha_hat < 1.0)) {
    throw std::runtime_error("return-time: fitted alpha_hat >= 1; no contraction");
  }
  const double alpha_G = 0.5 * (1.0 - fit.alpha_hat);
  double level = std::max(2.0 * fit.f_hat / (1.0 - fit.alpha_hat), 30.0);
  if (exp.contains("level") && exp.at("level").is_number()) {
    level = exp.at("level").get<double>();
  }
  const an::RateFunctions rf = an::rate_functions_power(alpha_G, 1.0);

  // initial-state stream is disjoint from the per-trial streams 0..trials-1
  RngStream rng(ctx.seed, std::uint64_t{1} << 63);
  const StateVector x = an::random_sphere_state(dim, start_H - 1.0, rng);
  const an::ReturnTimeSamples rt =
      an::return_time_samples(s, x, norm_plus_one(), level, max_blocks,
                              ctx.cfg->trials, b.h, ctx.seed, ctx.workers, block);

  std::vector<std::uint64_t> sorted(rt.samples);
  std::sort(sorted.begin(), sorted.end());
  const std::uint64_t n_max = sorted.empty() ? 0 : sorted.back();
  CsvWriter csv(ctx.path("return_time.csv"), {"n", "survival", "bound"});
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    const double survival =
        sorted.empty()
            ? 0.0
            : static_cast<double>(
                  sorted.end() -
                  std::upper_bound(sorted.begin(), sorted.end(), n)) /
                  static_cast<double>(sorted.size());
    const double bound =
        std::min((start_H + 1.0) / rf.K_inverse(static_cast<double>(n)), 1.0);
    csv.row({static_cast<double>(n), survival, bound});
  }
  csv.close();

  double mean_T = 0;
  for (auto v : rt.samples) mean_T += static_cast<double>(v);
  if (!rt.samples.empty()) mean_T /= static_cast<double>(rt.samples.size());
  CsvWriter fitcsv(ctx.path("return_fit.csv"),
                   {"alpha_hat", "f_hat", "alpha_G", "level",
                    "censored_fraction", "mean_blocks"});
  fitcsv.row({fit.alpha_hat, fit.f_hat, alpha_G, level,
              static_cast<double>(rt.censored) /
                  static_cast<double>(std::max<std::uint64_t>(rt.trials, 1)),
              mean_T});
  fitcsv.close();
  ctx.extras["censored"] = rt.censored;
  ctx.extras["level"] = level;
}

// ---------------------------------------------------------- triad-portrait

void run_portrait(Context& ctx) {
  if (is_lorenz(*ctx.cfg)) {
    throw config_error("/experiment/type", "triad-portrait requires an euler system");
  }
  const json& exp = ctx.cfg->experiment;
  require_exp_keys(exp, {"triad", "initial", "t_max", "samples"});
  const eu::System sys = build_euler_system(euler_block(*ctx.cfg));
  const TriadSpec triad = parse_triad(exp, sys.lattice());
  const std::vector<double> initial =
      number_list(exp.at("initial"), "/experiment/initial");
  if (initial.size() != 3) {
    throw config_error("/experiment/initial", "expected [x, y, z]");
  }
  const double t_max = exp.at("t_max").get<double>();
  const std::uint64_t samples = exp.at("samples").get<std::uint64_t>();
  if (samples == 0) throw config_error("/experiment/samples", "must be >= 1");

  CsvWriter csv(ctx.path("portrait.csv"),
                {"t", "x", "y", "z", "E", "enstrophy"});
  eu::Triple p{initial[0], initial[1], initial[2]};
  const double dt = t_max / static_cast<double>(samples);
  for (std::uint64_t i = 0; i <= samples; ++i) {
    const auto [E, ens] = eu::conserved_pair(triad.coeffs, p);
    csv.row({static_cast<double>(i) * dt, p.x, p.y, p.z, E, ens});
    if (i < samples) p = eu::triad_canonical_flow(triad.coeffs, p, dt).value;
  }
  csv.close();
}

// ---------------------------------------------------------------- validate

void run_validate(Context& ctx, int& exit_code) {
  const json& exp = ctx.cfg->experiment;
  require_exp_keys(exp, {}, {"states"});
  const std::size_t n_states =
      exp.contains("states") ? exp.at("states").get<std::size_t>() : 100;

  const Splitting s = build_splitting(*ctx.cfg);
  CsvWriter csv(ctx.path("validate.csv"),
                {"check", "max_error", "threshold", "status"});
  bool all_ok = true;
  auto report = [&](const std::string& name, double err, double threshold) {
    const bool ok = err <= threshold;
    all_ok = all_ok && ok;
    csv.row_mixed({name, CsvWriter::format(err), CsvWriter::format(threshold),
                   ok ? "pass" : "fail"});
  };

  RngStream rng(ctx.seed, 0);
  // splitting-sum identity
  double sum_err = 0;
  for (std::size_t rep = 0; rep < n_states; ++rep) {
    const StateVector q = an::random_sphere_state(s.dim(), 3.0, rng);
    const StateVector lhs = s.drift(q);
    const StateVector rhs = is_lorenz(*ctx.cfg)
                                ? lz::full_drift(lz::System(lorenz_block(*ctx.cfg).d,
                                                            lorenz_block(*ctx.cfg).beta),
                                                 q)
                                : eu::full_rhs(build_euler_system(euler_block(*ctx.cfg)), q);
    double scale = 1.0;
    for (double v : rhs) scale = std::max(scale, std::fabs(v));
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      sum_err = std::max(sum_err, std::fabs(lhs[i] - rhs[i]) / scale);
    }
  }
  report("splitting_sum_identity", sum_err, 1e-12);

  // conservation along the conservative flows (rotations / triads)
  double cons_err = 0;
  const an::Functional H = norm_plus_one();
  const std::size_t cons_lo =
      is_lorenz(*ctx.cfg) ? 0 : 1 + euler_block(*ctx.cfg).forcing_count;
  const std::size_t cons_count =
      is_lorenz(*ctx.cfg) ? s.size() - 1 : s.size() - cons_lo;
  for (std::size_t rep = 0; rep < n_states; ++rep) {
    const StateVector q = an::random_sphere_state(s.dim(), 2.0, rng);
    const std::size_t pick = cons_lo + rng.uniform_below(cons_count);
    StateVector y = q;
    s.apply_flow(pick, y, 100.0 * rng.uniform_open01());
    cons_err = std::max(cons_err, std::fabs(H(y) - H(q)) / H(q));
  }
  report("conservative_flow_H_invariance", cons_err, 1e-10);

  csv.close();
  ctx.extras["all_checks_passed"] = all_ok;
  if (!all_ok) exit_code = 1;
}

}  // namespace

int run(const RunConfig& cfg_in, const RunOptions& opts) {
  RunConfig cfg = cfg_in;
  if (opts.seed_override) cfg.seed = *opts.seed_override;
  if (opts.out_override) cfg.output = *opts.out_override;
  if (cfg.output.empty()) cfg.output = ".";
  cfg.normalized["seed"] = cfg.seed;
  cfg.normalized["output"] = cfg.output;

  const auto t0 = std::chrono::steady_clock::now();
  Context ctx;
  ctx.cfg = &cfg;
  ctx.out_dir = cfg.output;
  ctx.seed = cfg.seed;
  ctx.workers = opts.workers;
  int exit_code = 0;

  try {
    fs::create_directories(ctx.out_dir);
    if (cfg.experiment_type == "simulate") {
      run_simulate(ctx);
    } else if (cfg.experiment_type == "drift") {
      run_drift(ctx);
    } else if (cfg.experiment_type == "entrance") {
      run_entrance(ctx);
    } else if (cfg.experiment_type == "thermalize") {
      run_thermalize(ctx);
    } else if (cfg.experiment_type == "return-time") {
      run_return_time(ctx);
    } else if (cfg.experiment_type == "triad-portrait") {
      run_portrait(ctx);
    } else if (cfg.experiment_type == "validate") {
      run_validate(ctx, exit_code);
    } else {
      throw config_error("/experiment/type", "unknown experiment");
    }
  } catch (const config_error& e) {
    std::cerr << "configuration error at " << (e.field.empty() ? "/" : e.field)
              << ": " << e.what() << "\n";
    return 2;
  } catch (const overflow_error& e) {
    std::cerr << "numeric overflow in trajectory "
              << (e.trajectory ? *e.trajectory : 0) << ": " << e.what() << "\n";
    return 3;
  }

  const auto t1 = std::chrono::steady_clock::now();
  json manifest;
  manifest["config"] = cfg.normalized;
  manifest["version"] = kVersion;
  manifest["seed"] = cfg.seed;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(t1 - t0).count();
  manifest["outputs"] = ctx.outputs;
  if (!ctx.extras.is_null()) manifest["results"] = ctx.extras;
  std::ofstream mout(fs::path(ctx.out_dir) / "run.json");
  mout << manifest.dump(2) << "\n";
  if (!mout) {
    std::cerr << "failed to write run.json\n";
    return 1;
  }
  return exit_code;
}

}  // namespace splitflow::cli
