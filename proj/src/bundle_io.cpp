#include "courtside/bundle_io.hpp"

#include <fstream>
#include <sstream>

#include "courtside/error.hpp"

namespace courtside {

namespace {

Json vec(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }
Json score(const std::array<int, 2>& s) { return Json::array({s[0], s[1]}); }

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}
Json opt_player(const std::optional<PlayerId>& p) { return p ? Json(to_string(*p)) : Json(nullptr); }

Vec3 read_vec(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
std::array<int, 2> read_score(const Json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

PlayerId read_player(const Json& j) {
  const auto p = parse_player(j.get<std::string>());
  if (!p) throw Error("MalformedBundle", "bad player " + j.dump());
  return *p;
}
std::optional<PlayerId> read_opt_player(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return read_player(j);
}
Zone read_zone(const Json& j) {
  const auto z = parse_zone(j.get<std::string>());
  if (!z) throw Error("MalformedBundle", "bad zone " + j.dump());
  return *z;
}

Json sample(const TrajectorySample& s) {
  return Json::array({s.t, s.p.x, s.p.y, s.p.z, s.v.x, s.v.y, s.v.z});
}
TrajectorySample read_sample(const Json& j) {
  TrajectorySample s;
  s.t = j.at(0).get<double>();
  s.p = {j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
  s.v = {j.at(4).get<double>(), j.at(5).get<double>(), j.at(6).get<double>()};
  return s;
}

Json pose(const PlayerPose& p) {
  Json j = {{"x", p.x}, {"y", p.y}};
  if (!p.joints.empty()) {
    Json joints = Json::array();
    for (const auto& q : p.joints) joints.push_back(vec(q));
    j["joints"] = std::move(joints);
  }
  return j;
}
PlayerPose read_pose(const Json& j) {
  PlayerPose p;
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  if (j.contains("joints"))
    for (const auto& q : j.at("joints")) p.joints.push_back(read_vec(q));
  return p;
}

Json pose_frame(const PoseFrame& f) {
  Json j = {{"frame", f.frame}};
  if (f.a) j["A"] = pose(*f.a);
  if (f.b) j["B"] = pose(*f.b);
  return j;
}
PoseFrame read_pose_frame(const Json& j) {
  PoseFrame f;
  f.frame = j.at("frame").get<Frame>();
  if (j.contains("A")) f.a = read_pose(j.at("A"));
  if (j.contains("B")) f.b = read_pose(j.at("B"));
  return f;
}

ClassifiedShot read_shot(const Json& j) {
  ClassifiedShot s;
  s.shot_id = j.at("shot_id").get<int>();
  s.record.rally_id = j.at("rally_id").get<int>();
  s.record.shot_index = j.at("shot_index").get<int>();
  s.record.hit_frame = j.at("hit_frame").get<Frame>();
  s.record.hitter = read_player(j.at("hitter"));
  const auto label = parse_label(j.at("label").get<std::string>());
  if (!label) throw Error("MalformedBundle", "bad label");
  s.label = *label;
  if (!j.at("tendency").is_null()) {
    const auto t = parse_tendency(j.at("tendency").get<std::string>());
    if (!t) throw Error("MalformedBundle", "bad tendency");
    s.tendency = *t;
  }
  s.from_zone = read_zone(j.at("from_zone"));
  s.to_zone = read_zone(j.at("to_zone"));
  s.speed = j.at("speed").get<double>();
  if (const auto& n = j.at("net"); !n.is_null()) {
    s.net = NetCrossing{n.at("t").get<double>(), read_vec(n.at("p")), read_vec(n.at("v"))};
  }
  if (const auto& f = j.at("fit"); !f.is_null()) {
    FitResult r;
    r.params.p0 = read_vec(f.at("p0"));
    r.params.v0 = read_vec(f.at("v0"));
    r.params.vt = f.at("vt").get<double>();
    r.params.t0 = f.at("t0").get<double>();
    r.rmse_px = f.at("rmse_px").get<double>();
    r.n_obs = f.at("n_obs").get<int>();
    r.converged = f.at("converged").get<bool>();
    r.iterations = f.at("iterations").get<int>();
    s.fit = r;
  }
  if (j.contains("trajectory"))
    for (const auto& t : j.at("trajectory")) s.trajectory.push_back(read_sample(t));
  return s;
}

Json rally_header(const MatchBundle& b, const Game& g, const Rally& r) {
  return {{"rally_id", r.record.rally_id},
          {"game", g.number},
          {"start_frame", r.record.start_frame},
          {"end_frame", r.record.end_frame},
          {"start_sec", b.frame_to_sec(r.record.start_frame)},
          {"end_sec", b.frame_to_sec(r.record.end_frame)},
          {"server", to_string(r.record.server)},
          {"winner", to_string(r.record.winner)},
          {"score_after", score(r.score_after)},
          {"second_half", r.second_half},
          {"degenerate", r.degenerate}};
}

MatchManifest read_manifest(const Json& j) {
  MatchManifest m;
  m.video_uri = j.at("video_uri").get<std::string>();
  m.fps = j.at("fps").get<double>();
  m.player_a = j.at("players").at("A").get<std::string>();
  m.player_b = j.at("players").at("B").get<std::string>();
  m.event = j.value("event", "");
  m.round = j.value("round", "");
  if (j.contains("negative_y_start")) m.negative_y_start = read_opt_player(j.at("negative_y_start"));
  return m;
}

}  // namespace

Json to_json(const Diagnostic& d) {
  return {{"severity", d.severity == Severity::Error ? "error" : "warning"},
          {"code", d.code},
          {"message", d.message},
          {"line", opt(d.line)},
          {"rally_id", opt(d.rally_id)},
          {"shot_index", opt(d.shot_index)}};
}

Json to_json(const MatchSummary& s) {
  Json scores = Json::array();
  for (const auto& g : s.game_scores) scores.push_back(score(g));
  return {{"duration_sec", s.duration_sec},
          {"rally_count", s.rally_count},
          {"shot_count", s.shot_count},
          {"avg_shots_per_rally", s.avg_shots_per_rally},
          {"empty", s.empty},
          {"rallies_won", score(s.rallies_won)},
          {"match_winner", opt_player(s.match_winner)},
          {"game_scores", std::move(scores)}};
}

Json to_json(const RallySummary& s) {
  return {{"rally_id", s.rally_id},
          {"duration", s.duration},
          {"shot_count", s.shot_count},
          {"is_short", s.is_short},
          {"score_after", score(s.score_after)}};
}

Json to_json(const OutcomeCounts& c) {
  return {{"winners", score(c.winners)},
          {"errors", score(c.errors)},
          {"short_rallies_won", score(c.short_rallies_won)},
          {"degenerate_rallies", c.degenerate}};
}

Json to_json(const HeatmapCell& c) {
  return {{"zone", to_string(c.zone)},
          {"direction", to_string(c.direction)},
          {"count", c.count},
          {"fraction", c.fraction},
          {"display_percent", c.display_percent}};
}

Json to_json(const RallyMenuItem& m) {
  return {{"rally_id", m.rally_id},
          {"game", m.game},
          {"score_after", score(m.score_after)},
          {"shot_count", m.shot_count},
          {"is_short", m.is_short},
          {"matched_shot_ids", m.matched_shot_ids}};
}

Json to_json(const ShotFilter& f) {
  Json j = Json::object();
  for (const auto& [k, v] : filter_fields(f)) j[k] = v;
  return j;
}

Json shot_json(const ClassifiedShot& s, bool with_trajectory) {
  Json j = {{"shot_id", s.shot_id},
            {"rally_id", s.record.rally_id},
            {"shot_index", s.record.shot_index},
            {"hit_frame", s.record.hit_frame},
            {"hitter", to_string(s.record.hitter)},
            {"label", to_string(s.label)},
            {"tendency", s.tendency ? Json(to_string(*s.tendency)) : Json(nullptr)},
            {"from_zone", to_string(s.from_zone)},
            {"to_zone", to_string(s.to_zone)},
            {"speed", s.speed}};
  j["net"] = s.net ? Json{{"t", s.net->t}, {"p", vec(s.net->p)}, {"v", vec(s.net->v)}} : Json(nullptr);
  if (s.fit) {
    const auto& f = *s.fit;
    j["fit"] = {{"p0", vec(f.params.p0)}, {"v0", vec(f.params.v0)}, {"vt", f.params.vt},
                {"t0", f.params.t0},      {"rmse_px", f.rmse_px},    {"n_obs", f.n_obs},
                {"converged", f.converged}, {"iterations", f.iterations}};
  } else {
    j["fit"] = nullptr;
  }
  if (with_trajectory) {
    Json t = Json::array();
    for (const auto& s2 : s.trajectory) t.push_back(sample(s2));
    j["trajectory"] = std::move(t);
  }
  return j;
}

Json rally_json(const MatchBundle& b, const Game& g, const Rally& r) {
  Json j = rally_header(b, g, r);
  Json shots = Json::array();
  for (const auto& s : r.shots) {
    Json sj = shot_json(s, true);
    sj["hit_sec"] = b.frame_to_sec(s.record.hit_frame);
    shots.push_back(std::move(sj));
  }
  j["shots"] = std::move(shots);
  Json poses = Json::array();
  for (const auto& p : r.poses) poses.push_back(pose_frame(p));
  j["poses"] = std::move(poses);
  return j;
}

Json context_json(const ShotContext& c) {
  return {{"rally_id", c.rally_id},
          {"game", c.game},
          {"clip", Json::array({c.clip_start, c.clip_end})},
          {"previous_shot_id", opt(c.previous_shot_id)},
          {"next_shot_id", opt(c.next_shot_id)},
          {"shot", shot_json(*c.shot, true)}};
}

Json shots_json(std::span<const ClassifiedShot* const> shots) {
  Json arr = Json::array();
  for (const auto* s : shots) arr.push_back(shot_json(*s, false));
  return arr;
}

Json heatmap_json(std::span<const HeatmapCell> cells) {
  Json arr = Json::array();
  for (const auto& c : cells) arr.push_back(to_json(c));
  return arr;
}

Json to_json(const MatchBundle& b) {
  Json j;
  j["format"] = kBundleFormat;
  const auto& m = b.manifest;
  j["manifest"] = {{"video_uri", m.video_uri},
                   {"fps", m.fps},
                   {"players", {{"A", m.player_a}, {"B", m.player_b}}},
                   {"event", m.event},
                   {"round", m.round},
                   {"negative_y_start", opt_player(m.negative_y_start)}};
  j["court"] = {{"length", b.court.length},
                {"width", b.court.width},
                {"net_height_center", b.court.net_height_center},
                {"net_height_post", b.court.net_height_post},
                {"zone_bounds", b.court.zone_bounds}};
  j["camera"] = {{"P", b.camera.P},
                 {"image_size", Json::array({b.camera.image_width, b.camera.image_height})},
                 {"rmse_px", b.camera.rmse_px}};
  j["canonical"] = b.canonical;
  j["summary"] = to_json(b.summary);
  Json games = Json::array();
  for (const auto& g : b.games) {
    Json gj = {{"number", g.number},
               {"score", score(g.score)},
               {"finished", g.finished},
               {"winner", opt_player(g.winner)},
               {"half_boundary_rally", opt(g.half_boundary_rally)}};
    Json rallies = Json::array();
    for (const auto& r : g.rallies) {
      Json rj = rally_header(b, g, r);
      rj.erase("game");
      rj.erase("start_sec");
      rj.erase("end_sec");
      Json shots = Json::array();
      for (const auto& s : r.shots) shots.push_back(shot_json(s, true));
      rj["shots"] = std::move(shots);
      Json poses = Json::array();
      for (const auto& p : r.poses) poses.push_back(pose_frame(p));
      rj["poses"] = std::move(poses);
      rallies.push_back(std::move(rj));
    }
    gj["rallies"] = std::move(rallies);
    games.push_back(std::move(gj));
  }
  j["games"] = std::move(games);
  Json warnings = Json::array();
  for (const auto& w : b.warnings) warnings.push_back(to_json(w));
  j["warnings"] = std::move(warnings);
  return j;
}

MatchBundle bundle_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kBundleFormat) throw Error("MalformedBundle", "unknown format");
    MatchBundle b;
    b.manifest = read_manifest(j.at("manifest"));
    const auto& c = j.at("court");
    b.court.length = c.at("length").get<double>();
    b.court.width = c.at("width").get<double>();
    b.court.net_height_center = c.at("net_height_center").get<double>();
    b.court.net_height_post = c.at("net_height_post").get<double>();
    b.court.zone_bounds = c.at("zone_bounds").get<std::array<double, 2>>();
    const auto& cam = j.at("camera");
    b.camera.P = cam.at("P").get<std::array<double, 12>>();
    b.camera.image_width = cam.at("image_size").at(0).get<int>();
    b.camera.image_height = cam.at("image_size").at(1).get<int>();
    b.camera.rmse_px = cam.at("rmse_px").get<double>();
    b.canonical = j.at("canonical").get<bool>();
    const auto& s = j.at("summary");
    b.summary.duration_sec = s.at("duration_sec").get<double>();
    b.summary.rally_count = s.at("rally_count").get<int>();
    b.summary.shot_count = s.at("shot_count").get<int>();
    b.summary.avg_shots_per_rally = s.at("avg_shots_per_rally").get<double>();
    b.summary.empty = s.at("empty").get<bool>();
    b.summary.rallies_won = read_score(s.at("rallies_won"));
    b.summary.match_winner = read_opt_player(s.at("match_winner"));
    for (const auto& g : s.at("game_scores")) b.summary.game_scores.push_back(read_score(g));
    for (const auto& gj : j.at("games")) {
      Game g;
      g.number = gj.at("number").get<int>();
      g.score = read_score(gj.at("score"));
      g.finished = gj.at("finished").get<bool>();
      g.winner = read_opt_player(gj.at("winner"));
      if (!gj.at("half_boundary_rally").is_null()) g.half_boundary_rally = gj.at("half_boundary_rally").get<int>();
      for (const auto& rj : gj.at("rallies")) {
        Rally r;
        r.record.rally_id = rj.at("rally_id").get<int>();
        r.record.start_frame = rj.at("start_frame").get<Frame>();
        r.record.end_frame = rj.at("end_frame").get<Frame>();
        r.record.server = read_player(rj.at("server"));
        r.record.winner = read_player(rj.at("winner"));
        r.score_after = read_score(rj.at("score_after"));
        r.second_half = rj.at("second_half").get<bool>();
        r.degenerate = rj.at("degenerate").get<bool>();
        for (const auto& sj : rj.at("shots")) r.shots.push_back(read_shot(sj));
        for (const auto& pj : rj.at("poses")) r.poses.push_back(read_pose_frame(pj));
        g.rallies.push_back(std::move(r));
      }
      b.games.push_back(std::move(g));
    }
    for (const auto& wj : j.at("warnings")) {
      Diagnostic d;
      d.severity = wj.at("severity").get<std::string>() == "error" ? Severity::Error : Severity::Warning;
      d.code = wj.at("code").get<std::string>();
      d.message = wj.at("message").get<std::string>();
      if (!wj.at("line").is_null()) d.line = wj.at("line").get<int>();
      if (!wj.at("rally_id").is_null()) d.rally_id = wj.at("rally_id").get<int>();
      if (!wj.at("shot_index").is_null()) d.shot_index = wj.at("shot_index").get<int>();
      b.warnings.push_back(std::move(d));
    }
    if (!(b.manifest.fps > 0)) throw Error("MalformedBundle", "fps must be positive");
    return b;
  } catch (const Json::exception& e) {
    throw Error("MalformedBundle", e.what());
  }
}

std::string dump_bundle(const MatchBundle& b) { return to_json(b).dump(1) + "\n"; }

void write_bundle(const std::filesystem::path& path, const MatchBundle& b) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("UnwritableFile", "cannot write " + path.string());
  os << dump_bundle(b);
  if (!os) throw Error("UnwritableFile", "cannot write " + path.string());
}

MatchBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("UnreadableFile", "cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw Error("MalformedBundle", e.what());
  }
  return bundle_from_json(j);
}

}  // namespace courtside
