#include <benchmark/benchmark.h>

#include <random>

#include "priornet/haze.hpp"
#include "priornet/metrics.hpp"
#include "priornet/model.hpp"
#include "priornet/ops.hpp"
#include "priornet/training.hpp"

using namespace priornet;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

Image hazy_scene(std::size_t size) {
  const auto scene = haze::make_scene(1, size, size);
  haze::HazeParams params;
  params.airlight = {0.9f, 0.9f, 0.9f};
  params.transmission = haze::transmission_from_depth(scene.depth, 1.0f);
  return haze::synthesize_haze(scene.clean, params);
}

void BM_Conv2d(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({6, size, size}, 1);
  const Tensor w = random_tensor({3, 6, 5, 5}, 2);
  const Tensor b = random_tensor({3}, 3);
  for (auto _ : state) {
    Tape<float> tape;
    benchmark::DoNotOptimize(ops::conv2d(tape.constant(x), tape.constant(w), tape.constant(b)).value().data().data());
  }
}
BENCHMARK(BM_Conv2d)->Arg(32)->Arg(64)->Arg(128);

void BM_DehazeForward(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto weights = model::build(model::PriorNetConfig{}, 1);
  const Image hazy = hazy_scene(size);
  for (auto _ : state) benchmark::DoNotOptimize(model::dehaze(weights, hazy).data().data());
}
BENCHMARK(BM_DehazeForward)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto scene = haze::make_scene(2, size, size);
  const std::vector<training::TrainingPair> data{{"s", hazy_scene(size), scene.clean}};
  training::TrainConfig config;
  config.iterations = 1;
  config.batch_size = 1;
  auto weights = model::build(model::PriorNetConfig{}, 1);
  for (auto _ : state) weights = training::train(std::move(weights), data, config).weights;
}
BENCHMARK(BM_TrainStep)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const Image a = hazy_scene(size);
  const Image b = haze::make_scene(1, size, size).clean;
  for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256);

void BM_DcpDehaze(benchmark::State& state) {
  const Image hazy = hazy_scene(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(haze::dcp_dehaze(hazy).data().data());
}
BENCHMARK(BM_DcpDehaze)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
