#include <benchmark/benchmark.h>

#include "splitflow/analysis.hpp"
#include "splitflow/elliptic.hpp"
#include "splitflow/lorenz96.hpp"

using namespace splitflow;
namespace lz = splitflow::lorenz96;
namespace eu = splitflow::euler;

namespace {

eu::System df1_system(int N) {
  return eu::System(
      N, {{{1, 0}, 1.0}, {{0, 1}, 1.0}, {{N, N}, 1.0}}, 2,
      {{{0, 1}, 'a', 1, 1.0}, {{1, 0}, 'a', 2, 1.0}});
}

void BM_quarter_period(benchmark::State& state) {
  double rho = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(elliptic::quarter_period(rho));
    rho = rho < 0.9 ? rho + 1e-4 : 0.1;
  }
}
BENCHMARK(BM_quarter_period);

void BM_jacobi(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(elliptic::jacobi(0.7, x));
    x += 0.37;
  }
}
BENCHMARK(BM_jacobi);

void BM_rotation_flow(benchmark::State& state) {
  const lz::System sys(8, 1.0);
  StateVector x{1, -2, 3, 0.5, -1, 2, 0.1, 4};
  double t = 0.01;
  for (auto _ : state) {
    lz::rotation_flow_inplace(sys, x, 3, t);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_rotation_flow);

void BM_triad_flow_trig(benchmark::State& state) {
  const eu::TriadCoeffs c = eu::triad_coeffs({1, 0}, {0, 1}, {1, 1});
  eu::Triple p{0.7, 0.1, 0.5};
  for (auto _ : state) {
    p = eu::triad_canonical_flow(c, p, 0.2).value;
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_triad_flow_trig);

void BM_triad_flow_elliptic(benchmark::State& state) {
  const eu::TriadCoeffs c = eu::triad_coeffs({1, 0}, {1, 1}, {2, 1});
  eu::Triple p{0.7, 0.1, 0.5};
  for (auto _ : state) {
    p = eu::triad_canonical_flow(c, p, 0.2).value;
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_triad_flow_elliptic);

void BM_lorenz_chain_step(benchmark::State& state) {
  const lz::System sys(static_cast<int>(state.range(0)), 1.0);
  const Splitting s = lz::make_splitting(sys);
  RngStream rng(1, 0);
  ChainWalker walker(s, StateVector(sys.d, 1.0), 0.05);
  for (auto _ : state) {
    walker.advance(rng);
    benchmark::DoNotOptimize(walker.state().data());
  }
}
BENCHMARK(BM_lorenz_chain_step)->Arg(4)->Arg(8)->Arg(12);

void BM_euler_cycle(benchmark::State& state) {
  const eu::System sys = df1_system(4);
  const Splitting s = eu::make_splitting(sys);
  RngStream rng(1, 0);
  ChainWalker walker(s, StateVector(sys.dim(), 0.5), 0.5);
  for (auto _ : state) {
    walker.advance(rng);
    benchmark::DoNotOptimize(walker.state().data());
  }
}
BENCHMARK(BM_euler_cycle);

void BM_euler_full_rhs(benchmark::State& state) {
  const eu::System sys = df1_system(4);
  const StateVector q(sys.dim(), 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eu::full_rhs(sys, q));
  }
}
BENCHMARK(BM_euler_full_rhs);

}  // namespace

BENCHMARK_MAIN();
