#include "gc4d/agg_former.hpp"
#include "gc4d/kdtree.hpp"
#include "gc4d/losses.hpp"
#include "gc4d/metrics.hpp"
#include "gc4d/random.hpp"
#include "gc4d/scene.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace gc4d;

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  PointCloud c;
  c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  return c;
}

SceneSpec bench_scene(int res) {
  SceneSpec s;
  s.height = s.width = res;
  s.n_frames = 4;
  CameraParams cam;
  s.cameras.assign(4, cam);
  s.background = make_quad(Vec3(0, 0, 6), Vec3(6, 0, 0), Vec3(0, 6, 0));
  std::vector<SE3> poses;
  for (int t = 0; t < 4; ++t) poses.push_back(constant_velocity_pose(Vec3(0, 0, 4), Vec3(0.05, 0, 0), Vec3(0, 0.1, 0), t));
  s.objects.push_back(make_rigid_object("box", make_box(Vec3(0, 0, 4), Vec3(1, 1, 1)), poses));
  return s;
}

void BM_KdTreeBuild(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(KdTree(cloud));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Arg(1000)->Arg(20000);

void BM_NearestDistances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_cloud(n, 2), b = random_cloud(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn_distances(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NearestDistances)->Arg(1000)->Arg(20000);

void BM_ReconMetrics(benchmark::State& state) {
  const auto a = random_cloud(20000, 4), b = random_cloud(20000, 5);
  for (auto _ : state) benchmark::DoNotOptimize(recon_metrics(a, b));
}
BENCHMARK(BM_ReconMetrics)->Unit(benchmark::kMillisecond);

void BM_RenderFrame(benchmark::State& state) {
  const SceneSpec spec = bench_scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_frame(spec, 1));
}
BENCHMARK(BM_RenderFrame)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_OracleAggregate(benchmark::State& state) {
  const SceneSpec spec = bench_scene(64);
  const SequenceDataset data = generate(spec);
  for (auto _ : state) benchmark::DoNotOptimize(oracle_aggregate(spec, data, 0, 3));
}
BENCHMARK(BM_OracleAggregate)->Unit(benchmark::kMicrosecond);

void BM_PointLoss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SplitMix64 rng(6);
  Grid<Vec3> pred(n, n), gt(n, n);
  Grid<double> sigma(n, n, 1.0);
  Mask valid(n, n, 1), dynamic(n, n, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    gt[i] = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    pred[i] = gt[i] + Vec3(rng.uniform(), rng.uniform(), rng.uniform()) * 0.1;
  }
  const LossConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(point_loss(pred, gt, sigma, valid, &dynamic, cfg));
}
BENCHMARK(BM_PointLoss)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Forward(benchmark::State& state) {
  const TokenBank bank = TokenBank::create(ModelConfig{});
  SplitMix64 rng(8);
  std::vector<RgbImage> frames;
  for (int i = 0; i < state.range(0); ++i) {
    RgbImage img(64, 64);
    for (auto& p : img) p = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    frames.push_back(img);
  }
  for (auto _ : state) benchmark::DoNotOptimize(forward(frames, 0, bank));
}
BENCHMARK(BM_Forward)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
