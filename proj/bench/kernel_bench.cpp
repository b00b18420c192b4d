// Serial reference kernels vs the OpenMP kernels, plus whole-network
// forward passes for both shipped variants.
//
//   ./rtmd_kernel_bench --benchmark_filter=Conv

#include <benchmark/benchmark.h>

#include <random>

#include "rtmd/kernels.hpp"
#include "rtmd/network.hpp"
#include "rtmd/weights.hpp"

namespace {

rtmd::Tensor random_tensor(rtmd::Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  rtmd::Tensor t(s);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

rtmd::ConvWeights random_conv(int out_c, int in_c, std::uint64_t seed) {
  return {random_tensor({out_c, in_c, 3, 3}, seed), std::vector<float>(out_c, 0.1f)};
}

// Args: channels in, channels out, height, width, stride
void conv_args(benchmark::internal::Benchmark* b) {
  b->Args({3, 32, 192, 640, 2});
  b->Args({32, 32, 96, 320, 1});
  b->Args({64, 64, 48, 160, 1});
  b->Args({128, 256, 24, 80, 2});
  b->Args({256, 256, 12, 40, 1});
}

template <rtmd::Tensor (*Conv)(const rtmd::Tensor&, const rtmd::ConvWeights&, int)>
void BM_Conv(benchmark::State& state) {
  const int in_c = static_cast<int>(state.range(0));
  const int out_c = static_cast<int>(state.range(1));
  const int h = static_cast<int>(state.range(2));
  const int w = static_cast<int>(state.range(3));
  const int stride = static_cast<int>(state.range(4));
  const rtmd::Tensor x = random_tensor({1, in_c, h, w}, 1);
  const rtmd::ConvWeights wt = random_conv(out_c, in_c, 2);
  for (auto _ : state) {
    rtmd::Tensor y = Conv(x, wt, stride);
    benchmark::DoNotOptimize(y.data().data());
  }
  const double macs = static_cast<double>(out_c) * in_c * 9 *
                      rtmd::conv_out_extent(h, stride) * rtmd::conv_out_extent(w, stride);
  state.counters["GMAC/s"] =
      benchmark::Counter(macs * 1e-9, benchmark::Counter::kIsIterationInvariantRate);
}

BENCHMARK(BM_Conv<rtmd::serial::conv2d>)->Name("Conv/serial")->Apply(conv_args)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv<rtmd::conv2d>)->Name("Conv/parallel")->Apply(conv_args)
    ->Unit(benchmark::kMillisecond);

template <rtmd::Tensor (*Up)(const rtmd::Tensor&)>
void BM_Upsample(benchmark::State& state) {
  const rtmd::Tensor x = random_tensor({1, 32, 96, 320}, 3);
  for (auto _ : state) {
    rtmd::Tensor y = Up(x);
    benchmark::DoNotOptimize(y.data().data());
  }
}
BENCHMARK(BM_Upsample<rtmd::serial::upsample_nearest2x>)->Name("Upsample/serial");
BENCHMARK(BM_Upsample<rtmd::upsample_nearest2x>)->Name("Upsample/parallel");

void BM_Forward(benchmark::State& state, rtmd::ArchConfig cfg) {
  const rtmd::Network net =
      rtmd::bind(rtmd::build_network(cfg), rtmd::init_random(cfg, 0)).with_active_heads(1);
  const rtmd::Tensor image =
      random_tensor({1, 3, cfg.resolution.height, cfg.resolution.width}, 4);
  for (auto _ : state) {
    rtmd::DepthOutputs out = net.forward(image);
    benchmark::DoNotOptimize(out.disp.front().data().data());
  }
  state.counters["FPS"] =
      benchmark::Counter(1.0, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK_CAPTURE(BM_Forward, rt_monodepth, rtmd::rt_monodepth())->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, rt_monodepth_s, rtmd::rt_monodepth_s())
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
