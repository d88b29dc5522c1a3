#include "courtside/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "courtside/classify.hpp"
#include "courtside/error.hpp"
#include "courtside/ingest.hpp"

namespace courtside {

CameraModel broadcast_camera() { return look_at_camera({0.0, -14.0, 6.0}, {0.0, 0.0, 0.5}, 1500.0, 1920, 1080); }

std::vector<CourtPoint> calibration_points(const CourtSpec& spec) {
  const double hx = spec.half_width();
  const double hy = spec.half_length();
  const double short_line = 1.98;
  return {{-hx, -hy, 0.0},         {hx, -hy, 0.0},         {hx, hy, 0.0},        {-hx, hy, 0.0},
          {-hx, 0.0, 0.0},         {hx, 0.0, 0.0},         {-hx, -short_line, 0.0}, {hx, -short_line, 0.0},
          {-hx, short_line, 0.0},  {hx, short_line, 0.0},  {-hx, 0.0, spec.net_height_post},
          {hx, 0.0, spec.net_height_post}};
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool in_image(const CameraModel& cam, const CourtPoint& p, PixelPoint* px) {
  if (depth_of(cam, p) <= 0) return false;
  const auto q = project(cam, p);
  if (px) *px = q;
  return q.u >= 0 && q.v >= 0 && q.u < cam.image_width && q.v < cam.image_height;
}

Velocity aim(const CourtPoint& from, double tx, double ty, double speed, double elevation_deg) {
  const double az = std::atan2(ty - from.y, tx - from.x);
  const double e = elevation_deg * std::numbers::pi / 180.0;
  return {speed * std::cos(e) * std::cos(az), speed * std::cos(e) * std::sin(az), speed * std::sin(e)};
}

struct Flight {
  FlightParams params;
  std::vector<TrajectorySample> traj;  // truncated at the next hit or landing
  int frames = 0;                      // frames from hit to next hit / landing
  NetCrossing net;
};

// Draws one shot from `p` by a player whose half has sign `own` (-1 or +1).
Flight draw_shot(Rng& rng, const CourtPoint& p, double own, bool last, bool serve, double fps, double margin) {
  const double dt = 1.0 / (4.0 * fps);
  for (int attempt = 0; attempt < 5000; ++attempt) {
    const double elev = serve ? uniform(rng, 5.0, 60.0) : p.z >= 2.0 ? uniform(rng, -25.0, 45.0) : uniform(rng, 0.0, 60.0);
    const double speed = serve ? uniform(rng, 10.0, 35.0) : uniform(rng, 10.0, 55.0);
    const double tx = uniform(rng, -2.8, 2.8);
    const double ty = -own * uniform(rng, 1.5, 6.3);
    Flight f;
    f.params.p0 = p;
    f.params.v0 = aim(p, tx, ty, speed, elev);
    f.params.vt = 6.8;
    auto traj = simulate(f.params, dt, 4.0);
    const auto net = net_crossing(traj);
    if (!net || net->p.z < 1.65 || std::abs(net->v.z) < margin || std::abs(net->p.x) > 3.0) continue;
    if (last) {
      if (traj.back().p.z > 0) continue;
      const auto land = landing_point(traj);
      if (!land || land->y * -own < 0.5 || std::abs(land->y) > 8.0 || std::abs(land->x) > 4.0) continue;
      const int frames = static_cast<int>((traj.size() - 1 + 3) / 4);
      if (frames < 12) continue;
      f.frames = frames;
      f.traj = std::move(traj);
    } else {
      const double h_int = uniform(rng, 0.5, 2.8);
      std::size_t hit = 0;
      for (std::size_t j = 4; j < traj.size(); j += 4) {
        const auto& s = traj[j];
        if (s.p.y * -own > 0 && s.v.z < 0 && s.p.z <= h_int && s.p.z >= 0.3) {
          hit = j;
          break;
        }
      }
      if (hit == 0) continue;
      const auto& q = traj[hit].p;
      if (std::abs(q.x) > 2.9 || std::abs(q.y) < 0.6 || std::abs(q.y) > 6.5) continue;
      if (hit / 4 < 12) continue;
      traj.resize(hit + 1);
      f.frames = static_cast<int>(hit / 4);
      f.traj = std::move(traj);
    }
    f.net = *net;
    return f;
  }
  throw Error("SynthFailed", "could not draw a valid shot");
}

struct Keyframe {
  Frame frame;
  double x, y;
};

PlayerPose pose_at(const std::vector<Keyframe>& keys, Frame f) {
  PlayerPose p;
  if (f <= keys.front().frame) {
    p.x = keys.front().x;
    p.y = keys.front().y;
    return p;
  }
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (f <= keys[i].frame) {
      const double w = static_cast<double>(f - keys[i - 1].frame) / static_cast<double>(keys[i].frame - keys[i - 1].frame);
      p.x = keys[i - 1].x + w * (keys[i].x - keys[i - 1].x);
      p.y = keys[i - 1].y + w * (keys[i].y - keys[i - 1].y);
      return p;
    }
  }
  p.x = keys.back().x;
  p.y = keys.back().y;
  return p;
}

}  // namespace

SynthMatch synthesize(const SynthOptions& opt) {
  if (opt.rallies < 1) throw Error("InvalidArgument", "rallies must be at least 1");
  if (!(opt.fps > 0)) throw Error("InvalidArgument", "fps must be positive");
  Rng rng(opt.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto unit = [&] { return uniform(rng, 0.0, 1.0); };

  SynthMatch m;
  m.manifest.video_uri = "synthetic.mp4";
  m.manifest.fps = opt.fps;
  m.manifest.player_a = "Player A";
  m.manifest.player_b = "Player B";
  m.manifest.event = "Synthetic Open";
  m.manifest.round = "seed " + std::to_string(opt.seed);
  m.manifest.negative_y_start = unit() < 0.5 ? PlayerId::A : PlayerId::B;

  // Winners, stopping at the end of the match.
  std::vector<RallyRecord> records;
  for (int i = 0; i < opt.rallies; ++i) {
    RallyRecord r;
    r.rally_id = i + 1;
    r.winner = unit() < 0.5 ? PlayerId::A : PlayerId::B;
    r.server = records.empty() ? PlayerId::A : records.back().winner;
    records.push_back(r);
    if (derive_games(records, opt.rules).match_winner) break;
  }
  const auto games = derive_games(records, opt.rules);
  std::vector<int> game_of(records.size());
  std::vector<bool> second(records.size(), false);
  for (const auto& g : games.games) {
    std::optional<std::size_t> hb;
    try {
      hb = half_boundary(g, opt.rules);
    } catch (const Error&) {
    }
    for (std::size_t k = 0; k < g.rally_count(); ++k) {
      game_of[g.first_rally + k] = g.number;
      second[g.first_rally + k] = hb && k > *hb;
    }
  }

  m.camera = broadcast_camera();
  m.calibration.image_width = m.camera.image_width;
  m.calibration.image_height = m.camera.image_height;
  for (const auto& c : calibration_points()) {
    auto px = project(m.camera, c);
    px.u += opt.keypoint_noise * noise(rng);
    px.v += opt.keypoint_noise * noise(rng);
    m.calibration.keypoints.push_back({c, px});
  }

  Frame cursor = 30;
  std::vector<std::pair<Frame, PixelPoint>> visible;  // frame -> observed pixel
  for (std::size_t ri = 0; ri < records.size(); ++ri) {
    auto& rec = records[ri];
    const bool a_pos = a_on_positive_y(m.manifest, game_of[ri], second[ri], opt.rules);
    auto sign_of = [&](PlayerId p) { return (p == PlayerId::A) == a_pos ? 1.0 : -1.0; };

    const double u = unit();
    const int n_shots = u < 0.12 ? uniform_int(rng, 1, 3) : uniform_int(rng, 4, 22);
    rec.start_frame = cursor;
    Frame hit = cursor + uniform_int(rng, 20, 40);
    const double s_server = sign_of(rec.server);
    CourtPoint p{(unit() < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.4, 2.2), s_server * uniform(rng, 2.2, 3.8),
                 uniform(rng, 0.9, 1.15)};

    std::vector<Keyframe> keys[2];
    std::vector<RallyShot> rally_shots;
    const std::size_t first_truth = m.truth.size();
    for (int k = 0; k < n_shots; ++k) {
      const PlayerId hitter = k % 2 == 0 ? rec.server : opponent(rec.server);
      const bool last = k + 1 == n_shots;
      const Flight f = draw_shot(rng, p, sign_of(hitter), last, k == 0, opt.fps, opt.net_vz_margin);

      ShotRecord sr{rec.rally_id, k, hit, hitter};
      m.shots.push_back(sr);
      TruthShot t;
      t.record = sr;
      t.params = f.params;
      t.params.t0 = static_cast<double>(hit) / opt.fps;
      t.tendency = tendency(f.net.v);
      std::vector<TrajectorySample> canon = f.traj;
      if (a_pos)
        for (auto& s : canon) s.p = mirror(s.p);
      const auto z = shot_zones(canon);
      t.from_zone = z.from;
      t.to_zone = z.to;
      m.truth.push_back(t);
      rally_shots.push_back({hitter, t.tendency});
      keys[index_of(hitter)].push_back({hit, p.x, p.y});

      for (int fr = 0; fr < f.frames; ++fr) {
        const std::size_t j = static_cast<std::size_t>(fr) * 4;
        if (j >= f.traj.size() || f.traj[j].p.z < 0) break;
        PixelPoint px;
        if (!in_image(m.camera, f.traj[j].p, &px) || unit() < opt.occlusion) continue;
        px.u += opt.pixel_noise * noise(rng);
        px.v += opt.pixel_noise * noise(rng);
        visible.emplace_back(hit + fr, px);
      }
      if (!last) p = f.traj.back().p;
      hit += f.frames;
    }
    rec.end_frame = hit + uniform_int(rng, 10, 30);

    const auto labels = label_rally(rally_shots, rec.winner);
    for (std::size_t k = 0; k < labels.labels.size(); ++k) m.truth[first_truth + k].label = labels.labels[k];
    m.degenerate.push_back(labels.degenerate);

    const PlayerId receiver = opponent(rec.server);
    if (keys[index_of(receiver)].empty()) {
      keys[index_of(receiver)].push_back({rec.start_frame, 0.0, sign_of(receiver) * 3.5});
    }
    for (Frame f = rec.start_frame; f <= rec.end_frame; ++f) {
      PoseFrame pf;
      pf.frame = f;
      pf.a = pose_at(keys[0], f);
      pf.b = pose_at(keys[1], f);
      m.poses.push_back(std::move(pf));
    }
    cursor = rec.end_frame + uniform_int(rng, 60, 150);
  }
  m.rallies = records;

  // Every frame up to the last rally end, invisible unless observed.
  std::size_t vi = 0;
  for (Frame f = 0; f <= records.back().end_frame; ++f) {
    TrackSample s;
    s.frame = f;
    if (vi < visible.size() && visible[vi].first == f) {
      s.u = visible[vi].second.u;
      s.v = visible[vi].second.v;
      s.visible = true;
      ++vi;
    }
    m.track.push_back(s);
  }
  return m;
}

void write_synth(const std::filesystem::path& dir, const SynthMatch& m) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("UnwritableFile", "cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open(InputFiles::manifest);
    write_manifest(os, m.manifest);
  }
  {
    auto os = open(InputFiles::rallies);
    write_rallies(os, m.rallies);
  }
  {
    auto os = open(InputFiles::shots);
    write_shots(os, m.shots);
  }
  {
    auto os = open(InputFiles::track);
    write_track(os, m.track);
  }
  {
    auto os = open(InputFiles::calibration);
    write_calibration(os, m.calibration);
  }
  {
    auto os = open(InputFiles::poses);
    write_poses(os, m.poses);
  }
  nlohmann::json j;
  j["camera"] = m.camera.P;
  nlohmann::json shots = nlohmann::json::array();
  for (const auto& t : m.truth) {
    const auto& p = t.params;
    shots.push_back({{"rally_id", t.record.rally_id},
                     {"shot_index", t.record.shot_index},
                     {"hit_frame", t.record.hit_frame},
                     {"hitter", to_string(t.record.hitter)},
                     {"p0", {p.p0.x, p.p0.y, p.p0.z}},
                     {"v0", {p.v0.x, p.v0.y, p.v0.z}},
                     {"vt", p.vt},
                     {"speed", p.v0.norm()},
                     {"tendency", to_string(t.tendency)},
                     {"label", to_string(t.label)},
                     {"from_zone", to_string(t.from_zone)},
                     {"to_zone", to_string(t.to_zone)}});
  }
  j["shots"] = std::move(shots);
  nlohmann::json rallies = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rallies.size(); ++i) {
    rallies.push_back({{"rally_id", m.rallies[i].rally_id}, {"degenerate", static_cast<bool>(m.degenerate[i])}});
  }
  j["rallies"] = std::move(rallies);
  auto os = open(kTruthFile);
  os << j.dump(1) << '\n';
}

RecoveryTrial make_recovery_trial(std::mt19937_64& rng, const CameraModel& cam, double fps, double noise_px) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const double dt = 1.0 / (4.0 * fps);
  for (;;) {
    const double speed = uniform(rng, 10.0, 80.0);
    const double elev = uniform(rng, -30.0, 60.0);
    const double h = elev < 0 ? uniform(rng, 2.0, 3.2) : uniform(rng, 0.5, 2.5);
    const CourtPoint p0{uniform(rng, -2.5, 2.5), uniform(rng, -6.0, -1.5), h};
    const double tx = uniform(rng, -2.5, 2.5);
    const double ty = uniform(rng, 2.0, 6.0);
    RecoveryTrial t;
    t.truth.p0 = p0;
    t.truth.v0 = aim(p0, tx, ty, speed, elev);
    t.truth.vt = 6.8;
    t.trajectory = simulate(t.truth, dt, 4.0);
    const auto net = net_crossing(t.trajectory);
    if (!net || net->p.z <= 1.55) continue;
    const auto& end = t.trajectory.back().p;
    if (end.z > 0 || end.y >= 8.7 || std::abs(end.x) >= 5.0) continue;
    t.track.clear();
    int n_visible = 0;
    for (std::size_t i = 0; i < t.trajectory.size(); i += 4) {
      TrackSample s;
      s.frame = static_cast<Frame>(i / 4);
      PixelPoint px;
      if (t.trajectory[i].p.z > 0 && in_image(cam, t.trajectory[i].p, &px)) {
        s.u = px.u + noise_px * noise(rng);
        s.v = px.v + noise_px * noise(rng);
        s.visible = true;
        ++n_visible;
      }
      t.track.push_back(s);
    }
    if (n_visible < 8) continue;
    t.hit_frame = 0;
    t.end_frame = t.track.back().frame;
    return t;
  }
}

}  // namespace courtside
