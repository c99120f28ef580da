#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "splitflow/lorenz96.hpp"
#include "splitflow/splitting.hpp"

using namespace splitflow;

namespace {

StateVector random_state(RngStream& rng, std::size_t d, double scale) {
  StateVector x(d);
  for (double& v : x) v = scale * rng.normal();
  return x;
}

double norm(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("sample_cycle: m = 1 has the only permutation and tau > 0") {
  RngStream rng(1, 0);
  const CycleProgram p = sample_cycle(rng, 1, 0.3);
  REQUIRE(p.order.size() == 1);
  CHECK(p.order[0] == 0);
  CHECK(p.durations[0] > 0.0);
}

TEST_CASE("sample_cycle: duration means within the CLT band") {
  // m = 5, h = 0.1, 1e6 tau draws: aggregate mean lands in [0.0997, 0.1003]
  // (3 sigma with sigma = h / sqrt(1e6)); position-wise means get a wider band.
  const std::size_t m = 5;
  const double h = 0.1;
  const std::size_t n = 200000;
  std::vector<double> sums(m, 0.0);
  RngStream rng(2718, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const CycleProgram p = sample_cycle(rng, m, h);
    for (std::size_t k = 0; k < m; ++k) sums[k] += p.durations[k];
  }
  double total = 0;
  for (std::size_t k = 0; k < m; ++k) {
    total += sums[k];
    const double mean = sums[k] / static_cast<double>(n);
    CHECK(std::fabs(mean - h) < 3.5 * h / std::sqrt(static_cast<double>(n)));
  }
  const double aggregate = total / static_cast<double>(n * m);
  CHECK(aggregate > 0.0997);
  CHECK(aggregate < 0.1003);
}

TEST_CASE("sample_cycle rejects bad arguments") {
  RngStream rng(0, 0);
  CHECK_THROWS_AS(sample_cycle(rng, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sample_cycle(rng, 3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_cycle(rng, 3, -1.0), std::invalid_argument);
}

TEST_CASE("compose_cycle: zero durations give the identity") {
  const lorenz96::System sys(5, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  RngStream rng(11, 0);
  const StateVector x = random_state(rng, 5, 2.0);
  CycleProgram p;
  p.order = {3, 1, 5, 0, 2, 4};
  p.durations.assign(6, 0.0);
  const StepTrace t = compose_cycle(s, x, p);
  REQUIRE(t.intermediates.size() == 7);
  CHECK(t.intermediates.front() == x);
  CHECK(t.intermediates.back() == x);
}

TEST_CASE("compose_cycle: conservative prefix keeps the norm") {
  // All rotation fields conserve |x|; the norm can change only after the
  // star field appears in the order.
  const int d = 6;
  const lorenz96::System sys(d, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  RngStream rng(12, 0);
  const StateVector x = random_state(rng, d, 3.0);
  const double n0 = norm(x);
  for (int rep = 0; rep < 20; ++rep) {
    const CycleProgram p = sample_cycle(rng, s.size(), 0.2);
    const StepTrace t = compose_cycle(s, x, p);
    const std::uint32_t star = lorenz96::star_field_index(sys);
    for (std::size_t k = 0; k < p.order.size(); ++k) {
      if (p.order[k] == star) break;
      CHECK(std::fabs(norm(t.intermediates[k + 1]) - n0) < 1e-12 * n0);
    }
  }
}

TEST_CASE("compose_cycle: single-field program matches the RK oracle") {
  const int d = 5;
  const lorenz96::System sys(d, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  RngStream rng(13, 0);
  for (std::size_t field = 0; field < s.size(); ++field) {
    const StateVector x = random_state(rng, d, 2.0);
    StateVector flowed = x;
    s.apply_flow(field, flowed, 1.0);
    auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy) {
      std::fill(dy.begin(), dy.end(), 0.0);
      s.field(field).eval(y, dy);
    };
    const std::vector<double> ref = oracle::rk45(rhs, x, 1.0, 1e-12, 1e-14);
    for (int i = 0; i < d; ++i) {
      CHECK(std::fabs(flowed[i] - ref[i]) < 1e-9 * (1.0 + std::fabs(ref[i])));
    }
  }
}

TEST_CASE("step: fixed seed gives bit-identical traces") {
  const lorenz96::System sys(4, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  const StateVector x{1.0, -2.0, 0.5, 3.0};
  RngStream r1(999, 4), r2(999, 4);
  const StepTrace a = step(s, x, r1, 0.05);
  const StepTrace b = step(s, x, r2, 0.05);
  CHECK(a.program.order == b.program.order);
  CHECK(a.program.durations == b.program.durations);
  CHECK(a.intermediates == b.intermediates);
}

TEST_CASE("step: pathwise subconservation bound over many cycles") {
  // H(X_n) <= H(x0) + n |beta| max(tau) since only the star flow can grow H.
  const int d = 4;
  const lorenz96::System sys(d, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  RngStream rng(31, 2);
  StateVector x = random_state(rng, d, 1.0);
  const double H0 = lorenz96::lyapunov_H(x);
  const std::uint64_t n = 1000;
  double max_tau = 0;
  StateVector cur = x;
  for (std::uint64_t k = 0; k < n; ++k) {
    const CycleProgram p = sample_cycle(rng, s.size(), 0.05);
    for (double t : p.durations) max_tau = std::max(max_tau, t);
    cur = compose_cycle_state(s, cur, p);
    const double H = lorenz96::lyapunov_H(cur);
    CHECK(std::isfinite(H));
    CHECK(H <= H0 + static_cast<double>(k + 1) * sys.beta_norm() * max_tau +
                  1e-9 * H0);
  }
}

TEST_CASE("run_chain basics") {
  const lorenz96::System sys(4, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  const StateVector x{0.1, 0.2, 0.3, 0.4};
  RngStream rng(5, 0);
  const Trajectory t0 = run_chain(s, x, 0, rng, 0.05);
  REQUIRE(t0.states.size() == 1);
  CHECK(t0.states[0] == x);

  RngStream ra(6, 1), rb(6, 1);
  const Trajectory a = run_chain(s, x, 50, ra, 0.05);
  const Trajectory b = run_chain(s, x, 50, rb, 0.05);
  CHECK(a.states == b.states);

  RngStream rc(6, 1);
  const Trajectory c = run_chain(s, x, 50, rc, 0.05, /*keep_traces=*/true);
  REQUIRE(c.traces.size() == 50);
  CHECK(c.traces.back().intermediates.back() == c.states.back());
  CHECK(c.states == a.states);
}

TEST_CASE("run_chain: walker agrees with run_chain") {
  const lorenz96::System sys(5, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  const StateVector x{1, 2, 3, 4, 5};
  RngStream ra(17, 0), rb(17, 0);
  const Trajectory t = run_chain(s, x, 25, ra, 0.1);
  ChainWalker w(s, x, 0.1);
  for (int i = 0; i < 25; ++i) w.advance(rb);
  CHECK(w.state() == t.states.back());
}

TEST_CASE("run_chain: drift pulls a large state back down (d = 6)") {
  const int d = 6;
  const lorenz96::System sys(d, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  RngStream rng(404, 0);
  StateVector x = random_state(rng, d, 1.0);
  const double target = 1000.0 / norm(x);
  for (double& v : x) v *= target;  // |x| = 1e3
  ChainWalker w(s, x, 0.05);
  bool returned = false;
  for (int k = 0; k < 10000; ++k) {
    w.advance(rng);
    if (lorenz96::lyapunov_H(w.state()) < 100.0) {
      returned = true;
      break;
    }
  }
  CHECK(returned);
}

TEST_CASE("overflow raises with the offending field id") {
  struct Doubler final : VectorField {
    void flow(std::span<double> x, double t) const override {
      for (double& v : x) v *= std::exp(t * 700.0);
    }
    void eval(std::span<const double> x, std::span<double> out) const override {
      for (std::size_t i = 0; i < x.size(); ++i) out[i] += 700.0 * x[i];
    }
    std::string_view name() const override { return "doubler"; }
  };
  std::vector<std::unique_ptr<const VectorField>> fields;
  fields.push_back(std::make_unique<Doubler>());
  const Splitting s(2, std::move(fields));
  StateVector x{1.0, 1.0};
  CycleProgram p;
  p.order = {0};
  p.durations = {2.0};
  bool threw = false;
  try {
    for (int i = 0; i < 10; ++i) x = compose_cycle_state(s, x, p);
  } catch (const overflow_error& e) {
    threw = true;
    CHECK(e.field_id == 0);
  }
  CHECK(threw);
}

TEST_CASE("entrance_event: first-entry semantics") {
  const int d = 4;
  const lorenz96::System sys(d, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  const std::uint32_t star = lorenz96::star_field_index(sys);

  // x starts inside D (all mass on coordinate 1)
  const StateVector inside{5.0, 1e-8, 1e-8, 1e-8};
  const RegionSpec D = lorenz96::dissipative_region(0.5);
  RngStream rng(88, 0);
  CycleProgram p = sample_cycle(rng, s.size(), 0.05);

  p.order = {star, 0, 1, 2, 3};
  CHECK(entrance_event(compose_cycle(s, inside, p), D, star));
  CHECK(entrance_event_streaming(s, inside, p, D, star));
  p.order = {0, star, 1, 2, 3};
  CHECK_FALSE(entrance_event(compose_cycle(s, inside, p), D, star));
  CHECK_FALSE(entrance_event_streaming(s, inside, p, D, star));
}

TEST_CASE("entrance_event: whole space succeeds iff the first flow is ell") {
  const int d = 4;
  const lorenz96::System sys(d, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  const RegionSpec whole{[](std::span<const double>) { return true; }, "all"};
  const StateVector x{1, 1, 1, 1};
  RngStream rng(3, 0);
  // exact enumeration over all 5! = 120 permutations
  std::vector<std::uint32_t> perm{0, 1, 2, 3, 4};
  int hits = 0, total = 0;
  std::sort(perm.begin(), perm.end());
  do {
    CycleProgram p;
    p.order = perm;
    p.durations.assign(5, 0.01);
    const bool ev = entrance_event_streaming(s, x, p, whole, 2);
    CHECK(ev == (perm[0] == 2));
    hits += ev ? 1 : 0;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(total == 120);
  CHECK(hits * 5 == total);  // probability exactly 1/m
}

TEST_CASE("estimate_entrance_probability: degenerate regions") {
  const lorenz96::System sys(4, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  const StateVector x{1, 1, 1, 1};
  const RegionSpec empty{[](std::span<const double>) { return false; }, "none"};
  const EntranceEstimate e0 =
      estimate_entrance_probability(s, x, empty, 0, 2000, 0.05, 42);
  CHECK(e0.estimate == 0.0);
  CHECK(e0.ci_halfwidth == 0.0);

  // whole space, m = 5: P = 1/5 with a binomial CI
  const RegionSpec whole{[](std::span<const double>) { return true; }, "all"};
  const EntranceEstimate e1 =
      estimate_entrance_probability(s, x, whole, 1, 100000, 0.05, 42);
  CHECK(std::fabs(e1.estimate - 0.2) < 0.005);

  // whole space, m = 4: P = 1/4
  struct Still final : VectorField {
    void flow(std::span<double>, double) const override {}
    void eval(std::span<const double>, std::span<double>) const override {}
    std::string_view name() const override { return "still"; }
  };
  std::vector<std::unique_ptr<const VectorField>> fields;
  for (int i = 0; i < 4; ++i) fields.push_back(std::make_unique<Still>());
  const Splitting four(2, std::move(fields));
  const EntranceEstimate e2 = estimate_entrance_probability(
      four, StateVector{1.0, 1.0}, whole, 3, 100000, 0.05, 43);
  CHECK(std::fabs(e2.estimate - 0.25) < 0.005);
}

TEST_CASE("estimate_entrance_probability is worker-count independent") {
  const lorenz96::System sys(4, 1.0);
  const Splitting s = lorenz96::make_splitting(sys);
  const StateVector x{2, 1, -1, 0.5};
  const RegionSpec D = lorenz96::dissipative_region(0.3);
  const EntranceEstimate a = estimate_entrance_probability(
      s, x, D, lorenz96::star_field_index(sys), 20000, 0.05, 7, 0, 1);
  const EntranceEstimate b = estimate_entrance_probability(
      s, x, D, lorenz96::star_field_index(sys), 20000, 0.05, 7, 0, 3);
  CHECK(a.successes == b.successes);
  CHECK(a.estimate == b.estimate);
}
