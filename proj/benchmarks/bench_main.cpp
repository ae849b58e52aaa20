#include <benchmark/benchmark.h>

#include "pairclone/diagnostics.hpp"
#include "pairclone/estimate.hpp"
#include "pairclone/likelihood.hpp"
#include "pairclone/mcmc.hpp"
#include "pairclone/simulate.hpp"

using namespace pairclone;

namespace {

void BM_LogLikelihood(benchmark::State& state) {
  const SimData data = generate(preset("sim2"), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_likelihood(data.counts, data.truth.z, data.truth.w, data.truth.rho));
  }
  state.SetItemsProcessed(state.iterations() * data.counts.samples() * data.counts.pairs());
}
BENCHMARK(BM_LogLikelihood);

void BM_Sweep(benchmark::State& state, const char* name, bool pair_block) {
  const SimSpec spec = preset(name);
  const SimData data = generate(spec, 2);
  ModelSpec model;
  model.pair_block_z = pair_block;
  Chain chain(model, data.counts, 1.0, make_stream(3, 0));
  chain.init_from_prior(spec.C);
  for (auto _ : state) chain.sweep();
  state.SetItemsProcessed(state.iterations() * spec.T * spec.K);
}
BENCHMARK_CAPTURE(BM_Sweep, sim1, "sim1", true)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Sweep, sim3_k40, "sim3-k40", true)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Sweep, sim3_k40_entrywise, "sim3-k40", false)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Sweep, sim3, "sim3", true)->Unit(benchmark::kMicrosecond);

void BM_ZDistance(benchmark::State& state) {
  const int C = static_cast<int>(state.range(0));
  Rng rng = make_stream(4, 0);
  GenotypeMatrix a(100, C);
  GenotypeMatrix b(100, C);
  for (int k = 0; k < 100; ++k) {
    for (int c = 0; c < C; ++c) {
      a.set(k, c, GenotypeCode::from_index(static_cast<int>(uniform01(rng) * kNumGenotypes)));
      b.set(k, c, GenotypeCode::from_index(static_cast<int>(uniform01(rng) * kNumGenotypes)));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(z_distance(a, b));
}
BENCHMARK(BM_ZDistance)->Arg(3)->Arg(6)->Arg(12);

void BM_SpectralDensity(benchmark::State& state) {
  Rng rng = make_stream(5, 0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = uniform01(rng);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_density_zero(x));
}
BENCHMARK(BM_SpectralDensity)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
