// Microbenchmarks for the per-frame pipeline stages and the tracker loop.
// Run manually: build/benchmarks/depthtrack_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <vector>

#include "depthtrack/depth_io.hpp"
#include "depthtrack/noise_filter.hpp"
#include "depthtrack/pipeline.hpp"
#include "depthtrack/region_graph.hpp"
#include "depthtrack/tracker.hpp"

using namespace depthtrack;

namespace {

ActorSpec rect_actor(double x, double y, int w, int h, uint16_t depth,
                     double vx, double vy) {
  ActorSpec a;
  a.x = x;
  a.y = y;
  a.w = w;
  a.h = h;
  a.depth = depth;
  a.vx = vx;
  a.vy = vy;
  return a;
}

// Four 40x40 movers on a 240x240 canvas plus a small parked block. Kept
// noise-free: sensor jitter shatters the gradient into thousands of
// micro-basins and the run times then measure speckle cleanup instead of the
// pipeline's steady-state cost.
const SyntheticScene& bench_scene() {
  static const SyntheticScene scene = [] {
    SceneSpec s;
    s.frames = 30;
    s.width = 240;
    s.height = 240;
    s.background_depth = 8000;
    s.actors = {rect_actor(16, 20, 40, 40, 1500, 2, 0),
                rect_actor(184, 80, 40, 40, 1900, -2, 0),
                rect_actor(40, 130, 40, 40, 2300, 0, 2),
                rect_actor(160, 190, 40, 40, 2700, 0, -2),
                rect_actor(208, 12, 12, 12, 3200, 0, 0)};
    return synthesize_scene(s, 99);
  }();
  return scene;
}

const std::vector<RegionSet>& bench_region_sets() {
  static const std::vector<RegionSet> sets = [] {
    PipelineConfig cfg;
    std::vector<RegionSet> out;
    for (const DepthMap& frame : bench_scene().frames) {
      out.push_back(process_frame(frame, cfg));
    }
    return out;
  }();
  return sets;
}

void BM_GaussianSmooth(benchmark::State& state) {
  const DepthMap& frame = bench_scene().frames[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_smooth(frame, 1.0));
  }
}
BENCHMARK(BM_GaussianSmooth);

void BM_Watershed(benchmark::State& state) {
  const DepthMap smooth = gaussian_smooth(bench_scene().frames[0], 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(watershed_segment(smooth));
  }
}
BENCHMARK(BM_Watershed);

void BM_ProcessFrame(benchmark::State& state) {
  const DepthMap& frame = bench_scene().frames[0];
  PipelineConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(process_frame(frame, cfg));
  }
}
BENCHMARK(BM_ProcessFrame);

void BM_BuildGraph(benchmark::State& state) {
  const RegionSet& regions = bench_region_sets()[10];
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_graph(regions));
  }
}
BENCHMARK(BM_BuildGraph);

// Whole tracking pass over the precomputed region sets, segmentation cost
// excluded. The 0/1 argument toggles the direction-pruned candidate search.
void BM_TrackSequence(benchmark::State& state) {
  const std::vector<RegionSet>& sets = bench_region_sets();
  TrackerParams params;
  params.optimize = state.range(0) != 0;
  for (auto _ : state) {
    Tracker tracker({sets.data(), static_cast<size_t>(params.k + 1)}, params);
    for (size_t i = params.k + 1; i < sets.size(); ++i) {
      tracker.step(sets[i]);
    }
    benchmark::DoNotOptimize(tracker.records());
  }
}
BENCHMARK(BM_TrackSequence)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
