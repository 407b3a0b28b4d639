#include <benchmark/benchmark.h>

#include "cicam/layers.hpp"
#include "cicam/network.hpp"
#include "cicam/nonlocal.hpp"
#include "cicam/rng.hpp"

using namespace cicam;

namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : t.v) v = d(rng);
  return t;
}

void BM_Conv3x3Forward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), h = 32, w = 32;
  Tensor x = random_tensor({c, h, w}, 1);
  Tensor wgt = random_tensor({c, c, 3, 3}, 2);
  Tensor b = random_tensor({c}, 3);
  Tensor y({c, h, w});
  for (auto _ : state) {
    conv3x3_forward(x.data(), c, h, w, wgt.data(), b.data(), c, y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c) * c * h * w * 9);
}
BENCHMARK(BM_Conv3x3Forward)->Arg(8)->Arg(16)->Arg(32);

void BM_Conv3x3Backward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0)), h = 32, w = 32;
  Tensor x = random_tensor({c, h, w}, 1);
  Tensor wgt = random_tensor({c, c, 3, 3}, 2);
  Tensor dy = random_tensor({c, h, w}, 4);
  Tensor dx({c, h, w}), dw({c, c, 3, 3}), db({c});
  for (auto _ : state) {
    dx.zero();
    dw.zero();
    db.zero();
    conv3x3_backward(x.data(), wgt.data(), c, c, h, w, dy.data(), dx.data(), dw.data(),
                     db.data());
    benchmark::DoNotOptimize(dx.data());
  }
}
BENCHMARK(BM_Conv3x3Backward)->Arg(8)->Arg(16);

void BM_NonLocalForward(benchmark::State& state) {
  const int c = 16, side = static_cast<int>(state.range(0));
  ParamStore store;
  NonLocalBlock nl(store, "nl", c, 2);
  Rng rng = make_rng(5);
  nl.init(rng);
  Tensor x = random_tensor({c, side, side}, 6);
  Tensor y({c, side, side});
  for (auto _ : state) {
    nl.forward(x.data(), side, side, y.data(), nullptr);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_NonLocalForward)->Arg(8)->Arg(16);

NetworkConfig bench_config() {
  NetworkConfig cfg;
  cfg.backbone.stage_channels = {4, 8, 16};
  cfg.backbone.convs_per_stage = 1;
  cfg.backbone.nonlocal_after_stage = {3};
  cfg.num_classes = 5;
  cfg.image_size = 64;
  return cfg;
}

void BM_NetworkForward(benchmark::State& state) {
  Network net(bench_config(), 7);
  Tensor img = random_tensor({3, 64, 64}, 8);
  for (double& v : img.v) v = 0.5 * (v + 1.0);
  for (auto _ : state) {
    auto f = net.forward(img, false);
    benchmark::DoNotOptimize(f.se.probs.data());
  }
}
BENCHMARK(BM_NetworkForward);

void BM_NetworkTrainStep(benchmark::State& state) {
  Network net(bench_config(), 9);
  Tensor img = random_tensor({3, 64, 64}, 10);
  for (double& v : img.v) v = 0.5 * (v + 1.0);
  for (auto _ : state) {
    net.store.zero_grad();
    auto f = net.forward(img, true);
    double loss = net.backward(f, 1, 1.0);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_NetworkTrainStep);

}  // namespace

BENCHMARK_MAIN();
