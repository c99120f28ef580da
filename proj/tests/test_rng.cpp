#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "splitflow/rng.hpp"

using namespace splitflow;

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
    vd.push_back(d.next_u64());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("uniform_open01 stays inside the open interval") {
  RngStream rng(1, 0);
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.uniform_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform mean and variance") {
  RngStream rng(9, 3);
  std::vector<double> xs(500000);
  for (double& x : xs) x = rng.uniform_open01();
  const auto mv = oracle::mean_var(xs.begin(), xs.end());
  CHECK(std::fabs(mv.mean - 0.5) < 0.002);
  CHECK(std::fabs(mv.var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("exponential draws are positive with the right law") {
  const double h = 0.1;
  RngStream rng(123, 0);
  std::vector<double> xs(1000000);
  for (double& x : xs) {
    x = rng.exponential(h);
    REQUIRE(x > 0.0);
  }
  const auto mv = oracle::mean_var(xs.begin(), xs.end());
  // CLT 3-sigma band: sigma = h / sqrt(n)
  CHECK(mv.mean > 0.0997);
  CHECK(mv.mean < 0.1003);
  // Kolmogorov-Smirnov against 1 - exp(-t/h)
  const double ks = oracle::ks_distance(
      xs, [h](double t) { return 1.0 - std::exp(-t / h); });
  CHECK(ks < 0.002);
}

TEST_CASE("permutations are uniform (chi-square over all cells)") {
  auto lehmer_code = [](const std::vector<std::uint32_t>& p) {
    // permutation -> index in 0..m!-1
    std::size_t code = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::size_t smaller = 0;
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        if (p[j] < p[i]) ++smaller;
      }
      code = code * (p.size() - i) + smaller;
    }
    return code;
  };

  for (std::size_t m : {3u, 5u}) {
    std::size_t cells = 1;
    for (std::size_t i = 2; i <= m; ++i) cells *= i;
    const std::size_t n = m == 3 ? 600000 : 1000000;
    std::vector<std::uint64_t> counts(cells, 0);
    RngStream rng(777, m);
    std::vector<std::uint32_t> p(m);
    for (std::size_t i = 0; i < n; ++i) {
      rng.fill_permutation(p);
      ++counts[lehmer_code(p)];
    }
    const double expect = static_cast<double>(n) / static_cast<double>(cells);
    double chi2 = 0;
    for (std::uint64_t c : counts) {
      const double d = static_cast<double>(c) - expect;
      chi2 += d * d / expect;
    }
    const double crit =
        oracle::chi2_quantile(static_cast<double>(cells - 1), 3.090232306167814);
    CHECK(chi2 < crit);
    if (m == 3) {
      for (std::uint64_t c : counts) {
        const double freq = static_cast<double>(c) / static_cast<double>(n);
        CHECK(std::fabs(freq - 1.0 / 6.0) < 0.002);
      }
    }
  }
}

TEST_CASE("uniform_below covers its range without bias") {
  RngStream rng(5, 5);
  std::vector<std::uint64_t> counts(7, 0);
  const int n = 700000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_below(7)];
  for (std::uint64_t c : counts) {
    const double freq = static_cast<double>(c) / n;
    CHECK(std::fabs(freq - 1.0 / 7.0) < 0.003);
  }
}

TEST_CASE("invalid arguments are rejected") {
  RngStream rng(0, 0);
  CHECK_THROWS_AS(rng.exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(rng.exponential(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(rng.uniform_below(0), std::invalid_argument);
}
