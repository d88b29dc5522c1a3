#include "courtside/pipeline.hpp"

#include <algorithm>
#include <string>

#include "courtside/classify.hpp"
#include "courtside/court.hpp"
#include "courtside/error.hpp"

namespace courtside {

CameraModel camera_from(const CalibrationInput& cal, const CourtSpec& court) {
  if (cal.projection) {
    CameraModel cam;
    cam.P = *cal.projection;
    cam.image_width = cal.image_width;
    cam.image_height = cal.image_height;
    if (!cal.keypoints.empty()) cam.rmse_px = reprojection_rmse(cam, cal.keypoints);
    return cam;
  }
  return solve_camera(cal, court);
}

PlayerId side_schedule(const RawMatch& raw) {
  if (raw.manifest.negative_y_start) return *raw.manifest.negative_y_start;
  if (raw.poses && !raw.rallies.empty()) {
    const auto& first = raw.rallies.front().record;
    for (const auto& f : raw.poses->frames) {
      if (f.frame < first.start_frame || f.frame > first.end_frame) continue;
      if (f.a && f.a->y != 0.0) return f.a->y < 0 ? PlayerId::A : PlayerId::B;
      if (f.b && f.b->y != 0.0) return f.b->y < 0 ? PlayerId::B : PlayerId::A;
    }
  }
  throw Error("MissingSideSchedule", "manifest has no negative_y_start and poses do not place the players");
}

namespace {

struct ShotSlot {
  std::size_t rally = 0;
  std::size_t shot = 0;
  Frame end_frame = 0;   // last frame of the shot's own flight
  bool last = false;
  bool a_positive = false;  // A physically on +Y during this rally
};

const PoseFrame* nearest_pose(const std::vector<PoseFrame>& poses, Frame f) {
  auto it = std::lower_bound(poses.begin(), poses.end(), f,
                             [](const PoseFrame& p, Frame x) { return p.frame < x; });
  const PoseFrame* best = nullptr;
  if (it != poses.end()) best = &*it;
  if (it != poses.begin()) {
    const auto* prev = &*std::prev(it);
    if (!best || f - prev->frame <= best->frame - f) best = prev;
  }
  return best;
}

std::optional<CourtPoint> player_at(const std::optional<PoseInput>& poses, PlayerId who, Frame f,
                                    Frame window) {
  if (!poses || poses->frames.empty()) return std::nullopt;
  const auto* p = nearest_pose(poses->frames, f);
  if (!p || std::abs(p->frame - f) > window) return std::nullopt;
  const auto& pose = who == PlayerId::A ? p->a : p->b;
  if (!pose) return std::nullopt;
  return CourtPoint{pose->x, pose->y, 0.0};
}

// Physical-frame position of the shuttle near a frame, mapped to a plane.
std::optional<CourtPoint> track_point(const CameraModel& cam, const std::vector<TrackSample>& track, Frame first,
                                      Frame last, bool from_end, double height) {
  const auto obs = observations_in(track, first, last);
  if (obs.empty()) return std::nullopt;
  const auto& s = from_end ? obs.back() : obs.front();
  auto p = backproject_to_plane(cam, {s.u, s.v}, height);
  if (p) p->z = 0.0;
  return p;
}

CourtPoint canonical(const CourtPoint& p, bool a_positive) { return a_positive ? mirror(p) : p; }

}  // namespace

MatchBundle analyze(const RawMatch& raw, const AnalyzeOptions& opt) {
  if (!opt.court.valid()) throw Error("InvalidCourtSpec", "zone bounds must increase inside the half length");
  MatchBundle b;
  b.manifest = raw.manifest;
  b.manifest.negative_y_start = side_schedule(raw);
  b.court = opt.court;
  b.camera = camera_from(raw.calibration, opt.court);
  b.warnings = raw.warnings;
  const double fps = b.manifest.fps;

  std::vector<RallyRecord> records;
  for (const auto& r : raw.rallies) records.push_back(r.record);
  const auto games = derive_games(records, opt.rules);
  for (const auto& w : games.warnings) b.warnings.push_back(w);

  // Rally -> (game, second half).
  std::vector<int> game_of(records.size(), 1);
  std::vector<bool> second_half(records.size(), false);
  std::vector<std::optional<std::size_t>> boundaries;
  for (const auto& g : games.games) {
    std::optional<std::size_t> hb;
    try {
      hb = half_boundary(g, opt.rules);
    } catch (const Error&) {
    }
    boundaries.push_back(hb);
    for (std::size_t k = 0; k < g.rally_count(); ++k) {
      game_of[g.first_rally + k] = g.number;
      second_half[g.first_rally + k] = hb && k > *hb;
    }
  }

  // Fitting jobs, one per shot.
  const Frame pose_window = std::max<Frame>(1, static_cast<Frame>(fps / 2));
  std::vector<ShotSlot> slots;
  std::vector<ShotFitJob> jobs;
  for (std::size_t ri = 0; ri < raw.rallies.size(); ++ri) {
    const auto& rr = raw.rallies[ri];
    const bool a_pos = a_on_positive_y(b.manifest, game_of[ri], second_half[ri], opt.rules);
    for (std::size_t si = 0; si < rr.shots.size(); ++si) {
      ShotSlot slot;
      slot.rally = ri;
      slot.shot = si;
      slot.last = si + 1 == rr.shots.size();
      slot.end_frame = slot.last ? rr.record.end_frame : rr.shots[si + 1].hit_frame - 1;
      slot.a_positive = a_pos;
      slots.push_back(slot);
      ShotFitJob job;
      job.hit_frame = rr.shots[si].hit_frame;
      job.end_frame = slot.end_frame;
      job.hitter_position = player_at(raw.poses, rr.shots[si].hitter, job.hit_frame, pose_window);
      jobs.push_back(job);
    }
  }

  FitOptions fit_opt = opt.fit_options;
  if (opt.vt) fit_opt.limits.min_vt = fit_opt.limits.max_vt = *opt.vt;
  std::vector<ShotFitOutcome> outcomes(jobs.size());
  if (opt.fit) {
    outcomes = opt.parallel ? fit_shots_parallel(b.camera, raw.track, fps, jobs, fit_opt, opt.jobs)
                            : fit_shots_serial(b.camera, raw.track, fps, jobs, fit_opt);
  }

  // Classified shots, physical frame for now; zones already player-relative.
  std::vector<std::vector<ClassifiedShot>> shots(raw.rallies.size());
  int next_id = 1;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& slot = slots[k];
    const auto& rr = raw.rallies[slot.rally];
    const auto& rec = rr.shots[slot.shot];
    ClassifiedShot s;
    s.shot_id = next_id++;
    s.record = rec;
    const auto& out = outcomes[k];
    if (opt.fit && !out.fit) {
      Diagnostic d;
      d.severity = Severity::Warning;
      d.code = out.error_code.empty() ? "FitFailed" : out.error_code;
      d.message = "shot left unfitted";
      d.rally_id = rec.rally_id;
      d.shot_index = rec.shot_index;
      b.warnings.push_back(std::move(d));
    }
    if (out.fit) s.fit = out.fit;
    if (out.fit && out.fit->converged) {
      const double horizon = slot.last ? 5.0 : static_cast<double>(slot.end_frame + 1 - rec.hit_frame) / fps;
      try {
        s.trajectory = simulate(out.fit->params, 1.0 / (4.0 * fps), horizon, {}, fit_opt.limits);
      } catch (const Error&) {
      }
    }
    if (s.trajectory.size() >= 2) {
      s.speed = shot_speed(out.fit->params);
      s.net = net_crossing(s.trajectory);
      if (s.net) s.tendency = tendency(s.net->v);
      std::vector<TrajectorySample> canon = s.trajectory;
      if (slot.a_positive)
        for (auto& t : canon) t.p = mirror(t.p);
      const auto z = shot_zones(canon, b.court);
      s.from_zone = z.from;
      s.to_zone = z.to;
    } else {
      if (out.fit && !out.fit->converged) {
        Diagnostic d;
        d.severity = Severity::Warning;
        d.code = "FitNotConverged";
        d.message = "zones fall back to positions";
        d.rally_id = rec.rally_id;
        d.shot_index = rec.shot_index;
        b.warnings.push_back(std::move(d));
      }
      const Frame start_end = slot.last ? rr.record.end_frame : slot.end_frame;
      auto from = player_at(raw.poses, rec.hitter, rec.hit_frame, pose_window);
      if (!from) from = track_point(b.camera, raw.track, rec.hit_frame, start_end, false, 1.8);
      std::optional<CourtPoint> to;
      if (!slot.last) {
        const auto& next = rr.shots[slot.shot + 1];
        to = player_at(raw.poses, next.hitter, next.hit_frame, pose_window);
        if (!to) to = track_point(b.camera, raw.track, next.hit_frame, next.hit_frame + pose_window, false, 1.8);
      } else {
        to = track_point(b.camera, raw.track, rec.hit_frame, rr.record.end_frame, true, 0.0);
      }
      // Own half / opposite half centers as a last resort (canonical frame).
      const bool hitter_is_a = rec.hitter == PlayerId::A;
      const CourtPoint own{0.0, hitter_is_a ? -b.court.half_length() / 2 : b.court.half_length() / 2, 0.0};
      const CourtPoint from_c = from ? canonical(*from, slot.a_positive) : own;
      const CourtPoint to_c = to ? canonical(*to, slot.a_positive) : mirror(own);
      s.from_zone = zone_of(from_c, b.court);
      s.to_zone = zone_of(to_c, b.court);
      if (out.fit) s.speed = shot_speed(out.fit->params);
    }
    shots[slot.rally].push_back(std::move(s));
  }

  // Outcome labels.
  std::vector<bool> degenerate(raw.rallies.size(), false);
  for (std::size_t ri = 0; ri < raw.rallies.size(); ++ri) {
    std::vector<RallyShot> rs;
    for (const auto& s : shots[ri]) rs.push_back({s.record.hitter, s.tendency});
    auto labels = label_rally(rs, raw.rallies[ri].record.winner);
    for (std::size_t si = 0; si < shots[ri].size(); ++si) shots[ri][si].label = labels.labels[si];
    degenerate[ri] = labels.degenerate;
    if (labels.warning) {
      labels.warning->rally_id = raw.rallies[ri].record.rally_id;
      b.warnings.push_back(std::move(*labels.warning));
    }
  }

  // Games.
  for (std::size_t gi = 0; gi < games.games.size(); ++gi) {
    const auto& gs = games.games[gi];
    Game g;
    g.number = gs.number;
    g.score = gs.score;
    g.finished = gs.finished;
    g.winner = gs.winner;
    for (std::size_t k = 0; k < gs.rally_count(); ++k) {
      const std::size_t ri = gs.first_rally + k;
      const auto& rec = raw.rallies[ri].record;
      if (boundaries[gi] && *boundaries[gi] == k) g.half_boundary_rally = rec.rally_id;
      Rally r;
      r.record = rec;
      r.score_after = gs.scores[k];
      r.second_half = second_half[ri];
      r.degenerate = degenerate[ri];
      r.shots = std::move(shots[ri]);
      if (raw.poses) {
        for (const auto& p : raw.poses->frames)
          if (p.frame >= rec.start_frame && p.frame <= rec.end_frame) r.poses.push_back(p);
      }
      g.rallies.push_back(std::move(r));
    }
    b.games.push_back(std::move(g));
  }

  b = canonicalize_sides(std::move(b), opt.rules);
  b.summary = summarize(b);
  b.summary.match_winner = games.match_winner;
  return b;
}

}  // namespace courtside
