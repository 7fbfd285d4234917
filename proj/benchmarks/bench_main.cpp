#include <benchmark/benchmark.h>

#include <cmath>

#include <ksmode/evolution.hpp>
#include <ksmode/ggmt.hpp>
#include <ksmode/operators.hpp>
#include <ksmode/profile.hpp>
#include <ksmode/spectra.hpp>
#include <ksmode/waveop.hpp>

using namespace ksmode;

static void BM_AssembleLl(benchmark::State& st) {
  const GridPtr g = make_grid(static_cast<int>(st.range(0)), 40.0);
  for (auto _ : st) benchmark::DoNotOptimize(ops::assemble_Ll(2, g).entries.data());
}
BENCHMARK(BM_AssembleLl)->Arg(200)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

static void BM_Eigenvalues(benchmark::State& st) {
  const Eigen::MatrixXd a = ops::assemble_Ll(0, make_grid(static_cast<int>(st.range(0)), 40.0)).interior();
  for (auto _ : st) benchmark::DoNotOptimize(spectra::eigenvalues(a).data());
}
BENCHMARK(BM_Eigenvalues)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_Mu(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(ggmt::mu_functional(2, 0.2, WeightW{}).value);
}
BENCHMARK(BM_Mu)->Unit(benchmark::kMillisecond);

static void BM_NonlinearSteps(benchmark::State& st) {
  const GridPtr g = make_grid(static_cast<int>(st.range(0)), 40.0);
  const evolution::NonlinearStepper stepper(g, 0.01);
  const RadialFunction psi0 =
      profile::sample_q(g) + RadialFunction::sample(g, [](double r) { return 1e-3 * std::exp(-r * r); });
  for (auto _ : st) benchmark::DoNotOptimize(stepper.run(psi0, 0.1).norms.back());  // 10 steps
}
BENCHMARK(BM_NonlinearSteps)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_ApplyT(benchmark::State& st) {
  const GridPtr g = make_grid(static_cast<int>(st.range(0)), 40.0);
  const waveop::WaveOpContext ctx = waveop::WaveOpContext::make(g);
  const RadialFunction f = RadialFunction::sample(g, [](double r) { return r * std::exp(-r * r / 4); });
  for (auto _ : st) benchmark::DoNotOptimize(waveop::apply_T(ctx, f).values().data());
}
BENCHMARK(BM_ApplyT)->Arg(800)->Arg(3200)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
