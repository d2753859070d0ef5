#include <benchmark/benchmark.h>

#include "aei/integrators.hpp"
#include "aei/reference.hpp"
#include "aei/spectral.hpp"

namespace {

using namespace aei;

void BM_Step(benchmark::State& state) {
  const auto id = static_cast<MethodId>(state.range(0));
  const Problem prob = builtin_problem(0.05);
  const MethodSpec m = make_method(id, prob, 0.05);
  const State s = prob.initial_state();
  for (auto _ : state) {
    StepReport r = step(m, prob, s);
    benchmark::DoNotOptimize(r.next.x.data());
  }
  state.SetLabel(std::string(to_string(id)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Step)->DenseRange(static_cast<int>(MethodId::M1),
                                static_cast<int>(MethodId::SE));

void BM_MakeMethod(benchmark::State& state) {
  const auto id = static_cast<MethodId>(state.range(0));
  const Problem prob = builtin_problem(0.05);
  for (auto _ : state) {
    MethodSpec m = make_method(id, prob, 0.05);
    benchmark::DoNotOptimize(m.exp_h_omega.data());
  }
  state.SetLabel(std::string(to_string(id)));
}
BENCHMARK(BM_MakeMethod)->DenseRange(static_cast<int>(MethodId::M1),
                                      static_cast<int>(MethodId::SE));

void BM_SkewSpectral(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Mat a = Mat::Random(d, d);
  const SkewMatrix b(a - a.transpose());
  for (auto _ : state) {
    SkewSpectrum s = skew_spectral(b);
    benchmark::DoNotOptimize(s.omegas.data());
  }
}
BENCHMARK(BM_SkewSpectral)->Arg(3)->Arg(8)->Arg(32);

void BM_PhiTableFill(benchmark::State& state) {
  const SkewSpectrum s = skew_spectral(builtin_problem(0.05).b());
  for (auto _ : state) {
    PhiTable t(s, 1.0);
    for (int k = 0; k <= 2; ++k) benchmark::DoNotOptimize(t.phi(k, 1.0).data());
  }
}
BENCHMARK(BM_PhiTableFill);

void BM_Reference(benchmark::State& state) {
  const Problem prob = builtin_problem(0.05);
  for (auto _ : state) {
    State s = reference_state(prob, 1.0, 1e-12);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_Reference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
