#include <benchmark/benchmark.h>

#include "vidprint/encoder.hpp"

namespace {

using vidprint::Vec1D;
using vidprint::kernels::Backend;

std::vector<Vec1D> random_inputs(std::size_t n, std::size_t len, std::uint64_t seed) {
  auto rng = vidprint::make_rng(seed, {});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec1D> xs(n, Vec1D(len));
  for (auto& x : xs) {
    for (auto& v : x) v = u(rng);
  }
  return xs;
}

Backend backend_of(const benchmark::State& state) { return state.range(0) == 0 ? Backend::Serial : Backend::OpenMP; }

void BM_TripletBackward(benchmark::State& state) {
  vidprint::EncoderConfig cfg;
  cfg.seed = 3;
  const auto model = vidprint::make_encoder(cfg, 180);
  const auto xs = random_inputs(384, 180, 11);
  std::vector<vidprint::TripletInput> batch;
  for (std::size_t i = 0; i < 128; ++i) batch.push_back({&xs[3 * i], &xs[3 * i + 1], &xs[3 * i + 2]});
  for (auto _ : state) {
    benchmark::DoNotOptimize(vidprint::backward(model, batch, 1.0, 7, backend_of(state)));
  }
}
BENCHMARK(BM_TripletBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EmbedBatch(benchmark::State& state) {
  vidprint::EncoderConfig cfg;
  cfg.arch = vidprint::Arch::Cnn1d;
  const auto model = vidprint::make_encoder(cfg, 180);
  const auto xs = random_inputs(512, 180, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vidprint::kernels::embed_batch(backend_of(state), model.net, xs));
  }
}
BENCHMARK(BM_EmbedBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PairwiseDistances(benchmark::State& state) {
  const auto q = random_inputs(600, 128, 1);
  const auto r = random_inputs(600, 128, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vidprint::kernels::pairwise_sq_distances(backend_of(state), q, r));
  }
}
BENCHMARK(BM_PairwiseDistances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
