// Batch shot fitting: serial reference vs OpenMP.
#include <benchmark/benchmark.h>

#include <random>

#include "courtside/flight.hpp"
#include "courtside/synth.hpp"

using namespace courtside;

namespace {

constexpr double kFps = 30.0;

struct Batch {
  CameraModel cam = broadcast_camera();
  std::vector<TrackSample> track;
  std::vector<ShotFitJob> jobs;
};

// Recovery trials laid end to end on one track, 10 frames apart.
const Batch& batch() {
  static const Batch b = [] {
    Batch out;
    std::mt19937_64 rng(7);
    Frame offset = 0;
    for (int i = 0; i < 32; ++i) {
      const auto t = make_recovery_trial(rng, out.cam, kFps, 1.0);
      for (auto s : t.track) {
        s.frame += offset;
        out.track.push_back(s);
      }
      ShotFitJob job;
      job.hit_frame = t.hit_frame + offset;
      job.end_frame = t.end_frame + offset;
      job.hitter_position = CourtPoint{t.truth.p0.x, t.truth.p0.y, 0.0};
      out.jobs.push_back(job);
      offset += t.end_frame + 10;
    }
    return out;
  }();
  return b;
}

void BM_FitSerial(benchmark::State& state) {
  const auto& b = batch();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_shots_serial(b.cam, b.track, kFps, b.jobs));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b.jobs.size()));
}

void BM_FitParallel(benchmark::State& state) {
  const auto& b = batch();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_shots_parallel(b.cam, b.track, kFps, b.jobs, {}, threads));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b.jobs.size()));
}

}  // namespace

BENCHMARK(BM_FitSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FitParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
