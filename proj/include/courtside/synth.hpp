// Physically simulated matches and single shots with known ground truth.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "courtside/court.hpp"
#include "courtside/flight.hpp"
#include "courtside/model.hpp"
#include "courtside/stats.hpp"

namespace courtside {

// Elevated broadcast view from behind the negative-Y baseline, 1920x1080.
CameraModel broadcast_camera();

// Corners, net-line ends, short and long service line ends on the sidelines,
// and the two net-post tops.
std::vector<CourtPoint> calibration_points(const CourtSpec& spec = {});

struct SynthOptions {
  std::uint64_t seed = 42;
  int rallies = 30;
  double fps = 30.0;
  double pixel_noise = 1.0;     // track sigma, px
  double keypoint_noise = 0.5;  // calibration sigma, px
  double occlusion = 0.03;      // chance a sample is dropped
  double net_vz_margin = 1.0;   // |vz| at the net, m/s
  ScoringRules rules;
};

struct TruthShot {
  ShotRecord record;
  FlightParams params;  // physical frame
  Tendency tendency = Tendency::Offensive;
  ShotLabel label = ShotLabel::Normal;
  Zone from_zone;
  Zone to_zone;
};

struct SynthMatch {
  MatchManifest manifest;
  std::vector<RallyRecord> rallies;
  std::vector<ShotRecord> shots;
  std::vector<TrackSample> track;
  CalibrationInput calibration;
  std::vector<PoseFrame> poses;
  CameraModel camera;
  std::vector<TruthShot> truth;
  std::vector<bool> degenerate;  // per rally
};

// Rally winners are drawn at random and scored; a match that ends early stops
// the sequence there. Throws Error{"InvalidArgument"} for rallies < 1.
SynthMatch synthesize(const SynthOptions& opt = {});

// Writes the six input files plus truth.json.
void write_synth(const std::filesystem::path& dir, const SynthMatch& m);

inline constexpr const char* kTruthFile = "truth.json";

// One isolated shot seen by `cam`: speed 10-80 m/s, elevation -30..60 deg,
// vT 6.8, from the negative-Y half across the net. Observed from the hit to
// the landing with Gaussian pixel noise.
struct RecoveryTrial {
  FlightParams truth;
  std::vector<TrajectorySample> trajectory;
  std::vector<TrackSample> track;
  Frame hit_frame = 0;
  Frame end_frame = 0;
};
RecoveryTrial make_recovery_trial(std::mt19937_64& rng, const CameraModel& cam, double fps, double noise_px);

}  // namespace courtside
