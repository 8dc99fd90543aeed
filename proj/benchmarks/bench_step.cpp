#include <benchmark/benchmark.h>

#include "chsd/stepper.hpp"

using namespace chsd;

namespace {

void BM_Factorize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh m = build_rect_karst(n, n, 1.0, 1.0, 0.5, false);
  const SpaceSet s(m);
  Params p;
  Stepper st(s, p);
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::Random;
  const State x = st.initial_state(ic);
  const BlockSystem sys = st.assemble(x, x.phi, p.dt);
  for (auto _ : state) benchmark::DoNotOptimize(solve(sys));
}
BENCHMARK(BM_Factorize)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TimeStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh m = build_rect_karst(n, n, 1.0, 1.0, 0.5, false);
  const SpaceSet s(m);
  Params p;
  p.epsilon = 0.05;
  p.dt = 1e-4;
  Stepper st(s, p);
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::Random;
  State x = st.initial_state(ic);
  st.step(x);  // warm the factorization cache
  for (auto _ : state) benchmark::DoNotOptimize(st.step(x));
}
BENCHMARK(BM_TimeStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
