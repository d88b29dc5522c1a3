#include "courtside/classify.hpp"

#include "courtside/court.hpp"
#include "courtside/error.hpp"

namespace courtside {

RallyLabels label_rally(std::span<const RallyShot> shots, PlayerId rally_winner) {
  RallyLabels out;
  out.labels.assign(shots.size(), ShotLabel::Normal);
  auto degenerate = [&](const char* why) {
    out.labels.assign(shots.size(), ShotLabel::Normal);
    out.degenerate = true;
    Diagnostic d;
    d.severity = Severity::Warning;
    d.code = "DegenerateRally";
    d.message = why;
    out.warning = std::move(d);
    return out;
  };
  if (shots.empty()) return degenerate("rally has no shots");

  const auto& last = shots.back();
  if (!last.tendency) return degenerate("last shot has no net crossing");

  const bool by_scorer = last.hitter == rally_winner;
  const bool offensive = *last.tendency == Tendency::Offensive;
  if (offensive) {
    out.labels.back() = by_scorer ? ShotLabel::Winner : ShotLabel::Error;
    return out;
  }
  if (shots.size() < 2) return degenerate("outcome falls on a penultimate shot that does not exist");
  const auto& penultimate = shots[shots.size() - 2];
  // Defensive by the loser credits the scorer's previous shot; defensive by
  // the scorer blames the loser's previous shot.
  const PlayerId expected = by_scorer ? opponent(rally_winner) : rally_winner;
  if (penultimate.hitter != expected) {
    return degenerate("penultimate hitter does not alternate with the last hitter");
  }
  out.labels[shots.size() - 2] = by_scorer ? ShotLabel::Error : ShotLabel::Winner;
  return out;
}

std::optional<CourtPoint> landing_point(std::span<const TrajectorySample> trajectory) {
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& s = trajectory[i];
    if (s.p.z > 0.0) continue;
    if (i == 0) return CourtPoint{s.p.x, s.p.y, 0.0};
    const auto& prev = trajectory[i - 1];
    const double f = prev.p.z / (prev.p.z - s.p.z);
    CourtPoint p = prev.p + f * (s.p - prev.p);
    p.z = 0.0;
    return p;
  }
  return std::nullopt;
}

ShotZones shot_zones(std::span<const TrajectorySample> trajectory, const CourtSpec& spec) {
  if (trajectory.size() < 2) throw Error("TooFewSamples", "shot zones need at least two trajectory samples");
  ShotZones z;
  z.start = {trajectory.front().p.x, trajectory.front().p.y, 0.0};
  if (const auto land = landing_point(trajectory.subspan(1))) {
    z.end = *land;
  } else {
    z.end = {trajectory.back().p.x, trajectory.back().p.y, 0.0};
  }
  z.from = zone_of(z.start, spec);
  z.to = zone_of(z.end, spec);
  z.crosses_net = (z.start.y < 0.0) != (z.end.y < 0.0);
  return z;
}

}  // namespace courtside
