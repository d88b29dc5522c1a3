// Full analysis: raw annotated match -> immutable MatchBundle.
#pragma once

#include <array>
#include <optional>

#include "courtside/flight.hpp"
#include "courtside/ingest.hpp"
#include "courtside/model.hpp"
#include "courtside/stats.hpp"

namespace courtside {

struct AnalyzeOptions {
  bool fit = true;
  std::optional<double> vt;  // pins the terminal velocity
  CourtSpec court;
  ScoringRules rules;
  FitOptions fit_options;
  int jobs = 0;  // <= 0: all threads
  bool parallel = true;
};

// Camera from the calibration input: an explicit projection is taken as is,
// otherwise solved from keypoints.
CameraModel camera_from(const CalibrationInput& cal, const CourtSpec& court = {});

// Which player starts on the negative-Y end: the manifest when given, else
// the first pose frame that places player A. Throws Error{"MissingSideSchedule"}.
PlayerId side_schedule(const RawMatch& raw);

MatchBundle analyze(const RawMatch& raw, const AnalyzeOptions& opt = {});

}  // namespace courtside
