#include <benchmark/benchmark.h>

#include "chsd/forms.hpp"
#include "chsd/stepper.hpp"

using namespace chsd;

namespace {

Params bench_params() {
  Params p;
  p.epsilon = 0.05;
  p.dt = 1e-4;
  return p;
}

void BM_BuildMesh(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_rect_karst(n, n, 1.0, 1.0, 0.5, false));
}
BENCHMARK(BM_BuildMesh)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_StokesViscous(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh m = build_rect_karst(n, n, 1.0, 1.0, 0.5, false);
  const SpaceSet s(m);
  const CoeffField nu = CoeffField::constant(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(asm_stokes_visc(s, nu));
}
BENCHMARK(BM_StokesViscous)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CahnHilliardLagged(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh m = build_rect_karst(n, n, 1.0, 1.0, 0.5, false);
  const SpaceSet s(m);
  const Params p = bench_params();
  const Vector lag = interpolate(s.phase, [](Vec2 x) { return std::tanh((x.x - 0.5) / 0.05); });
  const CoeffField nu = CoeffField::from_phase(s.phase, lag, p.nu);
  const CoeffField mob = CoeffField::from_phase(s.phase, lag, p.mobility);
  CahnHilliardInput in;
  in.mobility = &mob;
  in.kappa = &p.kappa;
  in.nu = &nu;
  in.epsilon = p.epsilon;
  in.dt = p.dt;
  in.phi_lag = &lag;
  in.cubic = CubicLinearization::Newton;
  for (auto _ : state) benchmark::DoNotOptimize(asm_ch_lagged(s, in));
}
BENCHMARK(BM_CahnHilliardLagged)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_AssembleSystem(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh m = build_rect_karst(n, n, 1.0, 1.0, 0.5, false);
  const SpaceSet s(m);
  Stepper st(s, bench_params());
  InitialCondition ic;
  ic.kind = InitialCondition::Kind::Random;
  const State x = st.initial_state(ic);
  for (auto _ : state) benchmark::DoNotOptimize(st.assemble(x, x.phi, 1e-4));
  state.counters["dofs"] = st.layout().total;
}
BENCHMARK(BM_AssembleSystem)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
