#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "splitflow/lorenz96.hpp"

using namespace splitflow;
namespace lz = splitflow::lorenz96;

namespace {

StateVector random_state(RngStream& rng, int d, double scale) {
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

TEST_CASE("system validation") {
  CHECK_THROWS_AS(lz::System(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lz::System(4, std::vector<double>{1, 0, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lz::System(4, std::vector<double>{1, 1, 1}),
                  std::invalid_argument);
  const lz::System sys(4, std::vector<double>{1, -2, 3, 4});
  CHECK(sys.beta_norm() == doctest::Approx(std::sqrt(30.0)));
}

TEST_CASE("rotation flow: zero angular rate freezes the pair") {
  const lz::System sys(5, 1.0);
  StateVector x{0.7, -1.3, 2.0, 0.0, 4.0};  // x[3] = 0 freezes field 4
  const StateVector y = lz::rotation_flow(sys, x, 4, 13.7);
  CHECK(y == x);
}

TEST_CASE("rotation flow: quarter turn example") {
  // d = 4, paper mode i = 1 (field 0): x = (1,0,0,1) rotates (x1,x2) at
  // rate x0 = x_d = 1; at t = pi/2 the pair lands on (0,-1).
  const lz::System sys(4, 1.0);
  const StateVector x{1.0, 0.0, 0.0, 1.0};
  const StateVector y = lz::rotation_flow(sys, x, 0, std::numbers::pi / 2);
  CHECK(std::fabs(y[0] - 0.0) < 1e-15);
  CHECK(std::fabs(y[1] + 1.0) < 1e-15);
  CHECK(y[2] == 0.0);
  CHECK(y[3] == 1.0);
}

TEST_CASE("rotation flow: matches the RK oracle and conserves the norm") {
  const int d = 5;
  const lz::System sys(d, 1.0);
  const Splitting s = lz::make_splitting(sys);
  RngStream rng(1001, 0);
  for (int rep = 0; rep < 30; ++rep) {
    const StateVector x = random_state(rng, d, 2.0);
    const int mode = static_cast<int>(rng.uniform_below(d));
    const double t = 5.0 * rng.uniform_open01();
    const StateVector y = lz::rotation_flow(sys, x, mode, t);
    CHECK(std::fabs(norm(y) - norm(x)) < 1e-12 * norm(x));
    auto rhs = [&](const std::vector<double>& v, std::vector<double>& dv) {
      std::fill(dv.begin(), dv.end(), 0.0);
      s.field(mode).eval(v, dv);
    };
    const std::vector<double> ref = oracle::rk45(rhs, x, t, 1e-12, 1e-14);
    for (int i = 0; i < d; ++i) {
      CHECK(std::fabs(y[i] - ref[i]) < 1e-9 * (1.0 + std::fabs(ref[i])));
    }
  }
}

TEST_CASE("rotation flow: long-time norm conservation") {
  const int d = 7;
  const lz::System sys(d, 1.0);
  RngStream rng(17, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const StateVector x = random_state(rng, d, 3.0);
    const int mode = static_cast<int>(rng.uniform_below(d));
    const double t = 100.0 * rng.uniform_open01();
    const StateVector y = lz::rotation_flow(sys, x, mode, t);
    CHECK(std::fabs(norm(y) - norm(x)) < 1e-12 * norm(x));
  }
}

TEST_CASE("rotation field derivative matches the drift at t = 0") {
  // pins the sign convention of the closed form
  const int d = 6;
  const lz::System sys(d, 1.0);
  const Splitting s = lz::make_splitting(sys);
  RngStream rng(23, 0);
  const StateVector x = random_state(rng, d, 1.5);
  const double eps = 1e-7;
  for (int mode = 0; mode < d; ++mode) {
    const StateVector y = lz::rotation_flow(sys, x, mode, eps);
    StateVector v(d, 0.0);
    s.field(mode).eval(x, v);
    for (int i = 0; i < d; ++i) {
      CHECK(std::fabs((y[i] - x[i]) / eps - v[i]) < 1e-5 * (1.0 + std::fabs(v[i])));
    }
  }
}

TEST_CASE("star flow: closed form") {
  const lz::System sys(4, 1.0);
  const StateVector zero{0, 0, 0, 0};
  CHECK(lz::star_flow(sys, zero, 0.0) == zero);
  const StateVector y = lz::star_flow(sys, zero, 1.0);
  CHECK(y[0] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(1.0));
  CHECK(y[2] == doctest::Approx(1.0));
  CHECK(y[3] == doctest::Approx(1.0));
}

TEST_CASE("star flow: H growth bounded by |beta| t") {
  const lz::System sys(5, std::vector<double>{1, -1, 2, 0.5, 1});
  RngStream rng(29, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const StateVector x = random_state(rng, 5, 10.0);
    const double t = 3.0 * rng.uniform_open01();
    const StateVector y = lz::star_flow(sys, x, t);
    CHECK(lz::lyapunov_H(y) <=
          lz::lyapunov_H(x) + sys.beta_norm() * t + 1e-12);
  }
}

TEST_CASE("star flow: partial dissipation bound on D_eta") {
  // H(phi_t(x)) <= alpha(t) H(x) + |beta| t + 1, alpha = sqrt(1-eta(1-e^{-2t}))
  const lz::System sys(4, 1.0);
  const double eta = 0.4;
  RngStream rng(31, 0);
  int checked = 0;
  while (checked < 100) {
    StateVector x = random_state(rng, 4, 5.0);
    x[0] = (3.0 + 10.0 * rng.uniform_open01()) * (rng.uniform_open01() < 0.5 ? -1 : 1);
    if (!lz::in_dissipative_region(x, eta)) continue;
    ++checked;
    const double t = 2.0 * rng.uniform_open01();
    const double alpha = std::sqrt(1.0 - eta * (1.0 - std::exp(-2.0 * t)));
    const StateVector y = lz::star_flow(sys, x, t);
    CHECK(lz::lyapunov_H(y) <=
          alpha * lz::lyapunov_H(x) + sys.beta_norm() * t + 1.0 + 1e-12);
  }
}

TEST_CASE("full drift: zero state gives beta (with damping of zero)") {
  const lz::System sys(4, std::vector<double>{1, 2, -1, 0.5});
  const StateVector v = lz::full_drift(sys, StateVector{0, 0, 0, 0});
  CHECK(v == StateVector{1, 2, -1, 0.5});
}

TEST_CASE("full drift: nonlinearity cancels on constant states") {
  // (x_{i+1}-x_{i-2}) x_{i-1} = 0 when all coordinates are equal, so
  // V(x) = beta - x_1 e_1 exactly.
  const lz::System sys(4, 1.0);
  const StateVector ones{1, 1, 1, 1};
  const StateVector v = lz::full_drift(sys, ones);
  CHECK(v[0] == doctest::Approx(1.0 - 1.0));
  CHECK(v[1] == doctest::Approx(1.0));
  CHECK(v[2] == doctest::Approx(1.0));
  CHECK(v[3] == doctest::Approx(1.0));
}

TEST_CASE("splitting-sum identity at multiple dimensions") {
  RngStream rng(37, 0);
  for (int d = 4; d <= 8; ++d) {
    const lz::System sys(d, 1.0);
    const Splitting s = lz::make_splitting(sys);
    REQUIRE(s.size() == static_cast<std::size_t>(d + 1));
    for (int rep = 0; rep < 200; ++rep) {
      const StateVector x = random_state(rng, d, 4.0);
      const StateVector lhs = s.drift(x);
      const StateVector rhs = lz::full_drift(sys, x);
      double scale = 0;
      for (double v : rhs) scale = std::max(scale, std::fabs(v));
      for (int i = 0; i < d; ++i) {
        CHECK(std::fabs(lhs[i] - rhs[i]) <= 1e-13 * std::max(scale, 1.0));
      }
    }
  }
}

TEST_CASE("lyapunov H basics") {
  CHECK(lz::lyapunov_H(StateVector{0, 0, 0, 0}) == 1.0);
  CHECK(lz::lyapunov_H(StateVector{3, 0, 0, 0}) == 4.0);
  const lz::System sys(4, 1.0);
  RngStream rng(41, 0);
  const StateVector x = random_state(rng, 4, 2.0);
  for (int mode = 0; mode < 4; ++mode) {
    const StateVector y = lz::rotation_flow(sys, x, mode, 1.7);
    CHECK(std::fabs(lz::lyapunov_H(y) - lz::lyapunov_H(x)) <
          1e-12 * lz::lyapunov_H(x));
  }
}

TEST_CASE("dissipative region predicate") {
  CHECK(lz::in_dissipative_region(StateVector{1, 0, 0, 0}, 0.999));
  CHECK_FALSE(lz::in_dissipative_region(StateVector{0, 1, 0, 0}, 0.001));
  CHECK_THROWS_AS(lz::in_dissipative_region(StateVector{1, 0}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lz::in_dissipative_region(StateVector{1, 0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("ladder: radii recursion and covering property") {
  const int d = 4;
  const double h = 0.05;
  const lz::System sys(d, 1.0);
  const lz::LadderConfig ladder = lz::make_ladder(sys, h);
  REQUIRE(ladder.R.size() == 4);
  CHECK(ladder.R[0] == doctest::Approx(0.5));
  for (int j = 1; j < d; ++j) {
    CHECK(ladder.R[j] == doctest::Approx(ladder.R[j - 1] * h / 16.0));
  }
  CHECK(ladder.outer_R ==
        doctest::Approx(std::exp2(d + 5) * std::max(sys.beta_norm(), 1.0) /
                        ladder.R[d - 1]));
  CHECK(ladder.R_star == doctest::Approx(std::exp2(d - 1) * ladder.outer_R + 1.0));

  // U_1 membership: |x| >= R and |x_1| >= R_{d-1} |x|
  RngStream rng(43, 0);
  StateVector u1(d, 0.0);
  u1[0] = 2.0 * ladder.R_star;
  u1[1] = 1.0;
  CHECK(lz::ladder_region_index(sys, ladder, u1) == 1);

  // x = 0 and small states: no index
  CHECK_FALSE(lz::ladder_region_index(sys, ladder, StateVector(d, 0.0)).has_value());

  // covering: every H > R_* state has an index
  for (int rep = 0; rep < 10000; ++rep) {
    StateVector x = random_state(rng, d, 1.0);
    const double target = ladder.R_star * (1.0 + 3.0 * rng.uniform_open01());
    const double scale = target / norm(x);
    for (double& v : x) v *= scale;
    CHECK(lz::ladder_region_index(sys, ladder, x).has_value());
  }
}

TEST_CASE("h_star_valid across the boundary") {
  CHECK(lz::h_star_valid(0.04));
  CHECK_FALSE(lz::h_star_valid(0.5));        // exceeds pi/12
  CHECK_FALSE(lz::h_star_valid(0.0));
  CHECK(lz::h_star_valid(1e-4));             // tiny h eventually valid
  // e^{-6h} >= 3/4 alone fails at h = 0.048+, before pi/12
  CHECK(std::exp(-6.0 * 0.04) >= 0.75);
  CHECK_FALSE(lz::h_star_valid(0.06));       // 1-e^{-5h}-3he^{-5h} < h here
}

TEST_CASE("downward energy transfer has the lemma's probability floor") {
  // with |x_j| >= c1 |x|, |x_{j-1}| <= c2 h |x|, |x_{j-2}| >= c3 the event
  // |pi_{j-1} phi^{j-1}_tau(x)| >= (c1 - c2) h |x| has P >= e^{-3/c3}/2.
  const int d = 5;
  const double h = 0.04;
  const lz::System sys(d, 1.0);
  const double c1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double c2 = c1 / 4.0;
  const double c3 = 1.0;
  const int j = 3;  // 0-based mode index of "x_j"
  StateVector x(d, 0.0);
  const double R = 10.0;
  x[j] = 1.2 * c1 * R;
  x[j - 1] = 0.5 * c2 * h * R;
  x[j - 2] = c3;
  x[4] = std::sqrt(R * R - x[j] * x[j] - x[j - 1] * x[j - 1] - x[j - 2] * x[j - 2]);
  REQUIRE(std::fabs(norm(x) - R) < 1e-12 * R);

  RngStream rng(47, 0);
  const std::uint64_t trials = 100000;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const double tau = rng.exponential(h);
    // field j-1 rotates (x_{j-1}, x_j) at rate x_{j-2}
    const StateVector y = lz::rotation_flow(sys, x, j - 1, tau);
    if (std::fabs(y[j - 1]) >= (c1 - c2) * h * R) ++hits;
  }
  const double p = static_cast<double>(hits) / trials;
  const double sigma = std::sqrt(p * (1.0 - p) / trials);
  const double floor = std::exp(-3.0 / c3) / 2.0;
  CHECK(p >= floor - 3.0 * sigma);
}

TEST_CASE("energy maintenance probabilities are scale independent") {
  // with |x_j| >= c |x| the events |pi_j phi^k_tau(x)| >= (c/2)|phi^k_tau(x)|
  // for k in {j-1, j, star} have scale-free probability floors; estimates at
  // |x| = 1e2, 1e4, 1e6 agree within 2 sigma.
  const int d = 5;
  const double h = 0.04;
  const lz::System sys(d, 1.0);
  const double c = 1.0 / std::sqrt(static_cast<double>(d));
  const int j = 2;
  const std::uint64_t trials = 100000;

  for (int k_case = 0; k_case < 3; ++k_case) {
    std::vector<double> ests, sigmas;
    for (double R : {1e2, 1e4, 1e6}) {
      // rotation-rate coordinates stay fixed while |x| grows and the other
      // member of the rotating pair is zero, so the event law is scale free
      StateVector x(d, 0.0);
      x[j] = 2.0 * c * R;
      if (k_case == 0) {
        x[j - 2] = 30.0;  // rate of field j-1 on the pair (x_{j-1}, x_j)
      } else if (k_case == 1) {
        x[j - 1] = 3.0;   // rate of field j on the pair (x_j, x_{j+1})
      }
      double rest = R * R;
      for (double v : x) rest -= v * v;
      x[d - 1] = std::sqrt(rest);
      RngStream rng(53, static_cast<std::uint64_t>(k_case * 10 + R));
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < trials; ++i) {
        const double tau = rng.exponential(h);
        StateVector y;
        if (k_case == 0) {
          y = lz::rotation_flow(sys, x, j - 1, tau);
        } else if (k_case == 1) {
          y = lz::rotation_flow(sys, x, j, tau);
        } else {
          y = lz::star_flow(sys, x, tau);
        }
        if (std::fabs(y[j]) >= 0.5 * c * norm(y)) ++hits;
      }
      const double p = static_cast<double>(hits) / trials;
      ests.push_back(p);
      sigmas.push_back(std::sqrt(std::max(p * (1.0 - p), 1e-9) / trials));
      CHECK(p > 0.01);
    }
    for (std::size_t a = 0; a < ests.size(); ++a) {
      for (std::size_t b = a + 1; b < ests.size(); ++b) {
        const double gap = std::fabs(ests[a] - ests[b]);
        const double tol =
            2.0 * std::sqrt(sigmas[a] * sigmas[a] + sigmas[b] * sigmas[b]);
        CHECK(gap <= std::max(tol, 0.02));
      }
    }
  }
}

TEST_CASE("subconservation holds pathwise over sampled cycles") {
  // H(X_1) <= H(x) + sum of realized F terms; only the star flow has F != 0.
  const int d = 4;
  const lz::System sys(d, 1.0);
  const Splitting s = lz::make_splitting(sys);
  const std::uint32_t star = lz::star_field_index(sys);
  RngStream rng(59, 0);
  for (int rep = 0; rep < 10000; ++rep) {
    const StateVector x = random_state(rng, d, 5.0);
    const CycleProgram p = sample_cycle(rng, s.size(), 0.05);
    double F_sum = 0;
    for (std::size_t k = 0; k < p.order.size(); ++k) {
      if (p.order[k] == star) F_sum += sys.beta_norm() * p.durations[k];
    }
    const StateVector y = compose_cycle_state(s, x, p);
    CHECK(lz::lyapunov_H(y) <=
          lz::lyapunov_H(x) + F_sum + 1e-11 * lz::lyapunov_H(x));
  }
}
