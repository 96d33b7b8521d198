// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "dfl/channel_sim.hpp"
#include "dfl/detection.hpp"
#include "dfl/frame.hpp"
#include "dfl/localization.hpp"

namespace {

using namespace dfl;

struct Fixture {
  Scene scene = paper_layout();
  ChannelPlan plan = ChannelPlan::ieee802154(16);
  SimConfig sim;
  ObstructionModel obstruction;
  RssTensor calibration = simulate_scene(scene, plan, obstruction, std::nullopt, sim, 7);
  RssTensor observation = simulate_scene(scene, plan, obstruction, Point{2.1, 1.8}, sim, 7, 1);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Simulate(benchmark::State& state) {
  const auto& f = fixture();
  const auto env = Environment::generate(f.scene, f.plan, f.sim, 7);
  std::uint64_t stream = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(env, f.scene, f.obstruction, Point{2.1, 1.8}, f.sim, 7, stream++));
  }
}
BENCHMARK(BM_Simulate);

void BM_DetectLinks(benchmark::State& state) {
  const auto& f = fixture();
  const DetectorConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect_links(f.scene, f.calibration, f.observation, cfg));
  }
}
BENCHMARK(BM_DetectLinks);

void BM_CoarseVote(benchmark::State& state) {
  const auto& f = fixture();
  const auto det = detect_links(f.scene, f.calibration, f.observation, DetectorConfig{});
  const CoarseGrid grid{f.scene.area(), state.range(0) / 100.0, 0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(coarse_estimate(f.scene, det, grid));
  }
}
BENCHMARK(BM_CoarseVote)->Arg(5)->Arg(10)->Arg(20);

void BM_LocalizeDetection(benchmark::State& state) {
  const auto& f = fixture();
  const auto det = detect_links(f.scene, f.calibration, f.observation, DetectorConfig{});
  const LocalizerConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(localize_detection(f.scene, det, cfg));
  }
}
BENCHMARK(BM_LocalizeDetection);

void BM_FrameRoundTrip(benchmark::State& state) {
  const auto& f = fixture();
  const auto frames = tensor_to_frames(f.observation, f.scene);
  const auto bytes = encode_stream(frames);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_stream(bytes, f.scene.sensor_count()));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_FrameRoundTrip);

}  // namespace

BENCHMARK_MAIN();
