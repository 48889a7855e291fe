// Aggregation kernels against the serial reference, and the per-batch
// forward/backward cost of the default classifier.
//
//   ./build/bench/sggv_bench --benchmark_filter=Sggv

#include <benchmark/benchmark.h>

#include <random>

#include "sggv/agg/aggregation.hpp"
#include "sggv/agg/reference.hpp"
#include "sggv/common/parallel.hpp"
#include "sggv/nn/network.hpp"

using namespace sggv;

namespace {

agg::GradientBundle<double> make_bundle(std::size_t l, std::size_t k) {
  Rng rng(7);
  std::normal_distribution<double> normal;
  agg::GradientBundle<double> b;
  for (std::size_t i = 0; i < l; ++i) {
    nn::GradientVector<double> g(k);
    for (auto& v : g.values) v = normal(rng);
    b.grads.push_back(std::move(g));
    b.tags.push_back({static_cast<int>(i), agg::InputKind::Raw});
  }
  return b;
}

template <auto Kernel>
void BM_Vote(benchmark::State& state) {
  const auto b = make_bundle(9, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(b, 6, agg::VoteRule::Strict));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_Sum(benchmark::State& state) {
  const auto b = make_bundle(9, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void BM_PCGrad(benchmark::State& state) {
  const auto b = make_bundle(9, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(b, nullptr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <typename Real>
void BM_LossAndGrad(benchmark::State& state) {
  const auto arch = nn::Architecture::default_classifier({3, 32, 32}, 3);
  const auto model = nn::init_params<Real>(arch, 1);
  Rng rng(3);
  nn::Batch<Real> batch;
  batch.channels = 3;
  batch.height = batch.width = 32;
  for (int i = 0; i < state.range(0); ++i) {
    for (std::size_t j = 0; j < batch.image_size(); ++j)
      batch.images.push_back(static_cast<Real>(uniform(rng, 0, 1)));
    batch.labels.push_back(i % 3);
  }
  for (auto _ : state) benchmark::DoNotOptimize(nn::loss_and_grad(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

constexpr auto sggv_par = &agg::sggv_vote<double>;
constexpr auto sggv_ref = &agg::reference::sggv_vote<double>;
constexpr auto agr_par = &agg::agr_sum<double>;
constexpr auto agr_ref = &agg::reference::agr_sum<double>;
constexpr auto pc_par = &agg::pcgrad<double>;
constexpr auto pc_ref = &agg::reference::pcgrad<double>;

}  // namespace

BENCHMARK(BM_Vote<sggv_par>)->Name("Sggv/parallel")->Arg(4467)->Arg(1 << 18);
BENCHMARK(BM_Vote<sggv_ref>)->Name("Sggv/reference")->Arg(4467)->Arg(1 << 18);
BENCHMARK(BM_Sum<agr_par>)->Name("AgrSum/parallel")->Arg(4467)->Arg(1 << 18);
BENCHMARK(BM_Sum<agr_ref>)->Name("AgrSum/reference")->Arg(4467)->Arg(1 << 18);
BENCHMARK(BM_PCGrad<pc_par>)->Name("PCGrad/parallel")->Arg(4467)->Arg(1 << 18);
BENCHMARK(BM_PCGrad<pc_ref>)->Name("PCGrad/reference")->Arg(4467)->Arg(1 << 18);
BENCHMARK(BM_LossAndGrad<double>)->Name("LossAndGrad/double")->Arg(16);
BENCHMARK(BM_LossAndGrad<float>)->Name("LossAndGrad/float")->Arg(16);

int main(int argc, char** argv) {
  apply_thread_cap_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
