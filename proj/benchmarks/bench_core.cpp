#include <vector>

#include <benchmark/benchmark.h>

#include "hcral/assign.hpp"
#include "hcral/box.hpp"
#include "hcral/cls_loss.hpp"
#include "hcral/reg_loss.hpp"
#include "hcral/rng.hpp"
#include "hcral/scene.hpp"

namespace {

using namespace hcral;

std::vector<std::pair<Box, Box>> random_pairs(std::size_t n) {
    Rng rng(1234);
    std::vector<std::pair<Box, Box>> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(0, 100);
        const double y = rng.uniform(0, 100);
        const double w = rng.uniform(2, 30);
        const double h = rng.uniform(2, 30);
        Box a{x, y, x + w, y + h};
        Box b{x + rng.uniform(-10, 10), y + rng.uniform(-10, 10),
              x + w + rng.uniform(-10, 10), y + h + rng.uniform(-10, 10)};
        if (!b.valid()) b = a;
        pairs.emplace_back(a, b);
    }
    return pairs;
}

void BM_iou(benchmark::State& state) {
    const auto pairs = random_pairs(1024);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [a, b] = pairs[i++ & 1023];
        benchmark::DoNotOptimize(iou(a, b));
    }
}
BENCHMARK(BM_iou);

void BM_giou_gradient(benchmark::State& state) {
    const auto pairs = random_pairs(1024);
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [a, b] = pairs[i++ & 1023];
        benchmark::DoNotOptimize(giou_gradient(a, b));
    }
}
BENCHMARK(BM_giou_gradient);

// One scene's worth of one-vs-all samples: 320 anchors, 3 classes.
void BM_hcra_c_loss(benchmark::State& state) {
    Rng rng(55);
    std::vector<ClsSample> samples(960);
    for (auto& s : samples) {
        s.p = rng.uniform(0.02, 0.98);
        s.p_star = rng.uniform() < 0.03 ? 1 : 0;
        s.iou_with_gt = rng.uniform(0.0, 1.0);
    }
    ClsConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hcra_c_loss(samples, cfg).loss);
    }
}
BENCHMARK(BM_hcra_c_loss);

// A typical positive set after expansion.
void BM_hcra_r_loss(benchmark::State& state) {
    Rng rng(56);
    const auto pairs = random_pairs(16);
    std::vector<RegSample> samples;
    for (const auto& [a, b] : pairs)
        samples.push_back({a, b, rng.uniform(0.05, 0.95)});
    RegConfig cfg;
    EmaState ema;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hcra_r_loss(samples, cfg, ema).loss);
    }
}
BENCHMARK(BM_hcra_r_loss);

void BM_atss_assign(benchmark::State& state) {
    const SceneBatch scene = generate_scene(7, SceneSpec{});
    AssignConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(atss_assign(scene.anchors, scene.gts, cfg));
    }
}
BENCHMARK(BM_atss_assign);

void BM_eatss_assign(benchmark::State& state) {
    const SceneBatch scene = generate_scene(7, SceneSpec{});
    const std::vector<Box> decoded = decode_boxes(scene);
    AssignConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            eatss_assign(scene.anchors, scene.gts, cfg, Predictions{{}, decoded}));
    }
}
BENCHMARK(BM_eatss_assign);

}  // namespace

BENCHMARK_MAIN();
