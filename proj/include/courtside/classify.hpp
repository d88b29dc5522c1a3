// Shot statistics: tendency at the net, rally outcome labels and from/to
// zones.
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "courtside/model.hpp"

namespace courtside {

// Defensive when the shuttle is rising as it crosses the net (vz > 0);
// Offensive otherwise, including vz == 0.
constexpr Tendency tendency(const Velocity& net_velocity) {
  return net_velocity.z > 0.0 ? Tendency::Defensive : Tendency::Offensive;
}

struct RallyShot {
  PlayerId hitter = PlayerId::A;
  std::optional<Tendency> tendency;
};

struct RallyLabels {
  std::vector<ShotLabel> labels;
  bool degenerate = false;
  std::optional<Diagnostic> warning;  // DegenerateRally
};

// Outcome rule on the last shot of a rally:
//   offensive by the scorer       -> last shot is a Winner
//   defensive by the point loser  -> penultimate shot is a Winner
//   offensive by the point loser  -> last shot is an Error
//   defensive by the scorer       -> penultimate shot is an Error
// Everything else is Normal. When the rule needs a penultimate shot that does
// not exist, or the last tendency is unknown, every shot is Normal and the
// rally is flagged degenerate.
RallyLabels label_rally(std::span<const RallyShot> shots, PlayerId rally_winner);

struct ShotZones {
  Zone from;
  Zone to;
  bool crosses_net = false;
  CourtPoint start;
  CourtPoint end;
};

// From: first sample dropped to the ground. To: the interpolated z = 0
// crossing when the trajectory reaches the ground, else the last sample.
// Requires at least two samples.
ShotZones shot_zones(std::span<const TrajectorySample> trajectory, const CourtSpec& spec = {});

// Ground landing point of a trajectory, if it reaches z <= 0.
std::optional<CourtPoint> landing_point(std::span<const TrajectorySample> trajectory);

}  // namespace courtside
