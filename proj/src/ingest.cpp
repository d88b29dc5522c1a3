#include "courtside/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>
#include <ostream>
#include <sstream>

#include "courtside/error.hpp"
#include "json.hpp"

namespace courtside {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("UnreadableFile", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("UnreadableFile", "read failed for " + path.string());
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Line {
  int number;
  std::string_view text;
};

// Non-blank lines with 1-based numbers.
std::vector<Line> lines_of(std::string_view text) {
  std::vector<Line> out;
  int n = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto len = pos == std::string_view::npos ? text.size() - start : pos - start;
    ++n;
    const auto line = trim(text.substr(start, len));
    if (!line.empty()) out.push_back({n, line});
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view s, const char* field, int line) {
  Int v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw Error("MalformedNumber", std::string(field) + " is not an integer: '" + std::string(s) + "'", line);
  }
  return v;
}

double parse_double(std::string_view s, const char* field, int line) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw Error("MalformedNumber", std::string(field) + " is not a number: '" + std::string(s) + "'", line);
  }
  return v;
}

PlayerId parse_player_field(std::string_view s, const char* field, int line) {
  const auto p = parse_player(s);
  if (!p) throw Error("BadPlayerTag", std::string(field) + " must be A or B, got '" + std::string(s) + "'", line);
  return *p;
}

// Splits a CSV body after checking the exact header. Returns rows with their
// line numbers.
std::vector<std::pair<int, std::vector<std::string_view>>> csv_rows(std::string_view text,
                                                                   std::string_view header) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    text.remove_prefix(3);
  }
  const auto lines = lines_of(text);
  if (lines.empty()) return {};
  const auto expected = split(header, ',');
  const auto got = split(lines.front().text, ',');
  if (got != expected) {
    throw Error("BadHeader", "expected header '" + std::string(header) + "'", lines.front().number);
  }
  std::vector<std::pair<int, std::vector<std::string_view>>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = split(lines[i].text, ',');
    if (fields.size() != expected.size()) {
      throw Error("WrongFieldCount",
                  "expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(fields.size()),
                  lines[i].number);
    }
    rows.emplace_back(lines[i].number, std::move(fields));
  }
  return rows;
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

json parse_json(std::string_view text, int line = 0) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error("MalformedJson", e.what(), line > 0 ? std::optional<int>(line) : std::nullopt);
  }
}

double json_number(const json& j, const char* key, int line = 0) {
  const auto opt_line = line > 0 ? std::optional<int>(line) : std::nullopt;
  if (!j.is_object() || !j.contains(key)) throw Error("MissingField", key, opt_line);
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error("MalformedNumber", key, opt_line);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error("MalformedNumber", key, opt_line);
  return d;
}

std::string json_string(const json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw Error("MissingField", key);
    return {};
  }
  const auto& v = j.at(key);
  if (!v.is_string()) throw Error("MalformedField", std::string(key) + " must be a string");
  return v.get<std::string>();
}

}  // namespace

MatchManifest parse_manifest_text(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw Error("MalformedJson", "manifest must be an object");
  MatchManifest m;
  m.video_uri = json_string(j, "video_uri", true);
  m.fps = json_number(j, "fps");
  if (!(m.fps > 0)) throw Error("MalformedNumber", "fps");
  if (!j.contains("players")) throw Error("MissingField", "players");
  const auto& players = j.at("players");
  if (!players.is_object()) throw Error("MalformedField", "players must be an object");
  m.player_a = json_string(players, "A", true);
  m.player_b = json_string(players, "B", true);
  if (m.player_a.empty()) throw Error("MissingField", "players.A");
  if (m.player_b.empty()) throw Error("MissingField", "players.B");
  m.event = json_string(j, "event", false);
  m.round = json_string(j, "round", false);
  if (j.contains("negative_y_start")) {
    const auto s = json_string(j, "negative_y_start", true);
    const auto p = parse_player(s);
    if (!p) throw Error("BadPlayerTag", "negative_y_start must be A or B");
    m.negative_y_start = *p;
  }
  return m;
}

std::vector<RallyRecord> parse_rallies_text(std::string_view text) {
  std::vector<std::pair<int, RallyRecord>> out;
  for (const auto& [line, f] : csv_rows(text, "rally_id,start_frame,end_frame,server,winner")) {
    RallyRecord r;
    r.rally_id = parse_int<int>(f[0], "rally_id", line);
    r.start_frame = parse_int<Frame>(f[1], "start_frame", line);
    r.end_frame = parse_int<Frame>(f[2], "end_frame", line);
    r.server = parse_player_field(f[3], "server", line);
    r.winner = parse_player_field(f[4], "winner", line);
    if (r.start_frame >= r.end_frame) {
      throw Error("NonMonotoneFrames", "start_frame must be before end_frame", line);
    }
    out.emplace_back(line, r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second.start_frame < b.second.start_frame; });
  std::vector<RallyRecord> rallies;
  std::map<int, int> seen;
  for (const auto& [line, r] : out) {
    if (!seen.emplace(r.rally_id, line).second) {
      throw Error("DuplicateRallyId", "rally_id " + std::to_string(r.rally_id) + " repeated", line);
    }
    if (!rallies.empty() && r.start_frame <= rallies.back().end_frame) {
      throw Error("OverlappingRallies", "rally " + std::to_string(r.rally_id) + " overlaps rally " +
                                            std::to_string(rallies.back().rally_id),
                  line);
    }
    rallies.push_back(r);
  }
  return rallies;
}

std::vector<ShotRecord> parse_shots_text(std::string_view text) {
  std::vector<std::pair<int, ShotRecord>> rows;
  for (const auto& [line, f] : csv_rows(text, "rally_id,shot_index,hit_frame,hitter")) {
    ShotRecord s;
    s.rally_id = parse_int<int>(f[0], "rally_id", line);
    s.shot_index = parse_int<int>(f[1], "shot_index", line);
    s.hit_frame = parse_int<Frame>(f[2], "hit_frame", line);
    s.hitter = parse_player_field(f[3], "hitter", line);
    if (s.shot_index < 0) throw Error("MalformedNumber", "shot_index must be non-negative", line);
    rows.emplace_back(line, s);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second.rally_id, a.second.shot_index) < std::tie(b.second.rally_id, b.second.shot_index);
  });
  std::vector<ShotRecord> shots;
  for (const auto& [line, s] : rows) {
    if (!shots.empty() && shots.back().rally_id == s.rally_id) {
      if (shots.back().shot_index == s.shot_index) {
        throw Error("DuplicateShot", "shot " + std::to_string(s.shot_index) + " of rally " +
                                         std::to_string(s.rally_id) + " repeated",
                    line);
      }
      if (s.hit_frame <= shots.back().hit_frame) {
        throw Error("NonMonotoneFrames", "hit_frame must increase with shot_index", line);
      }
    }
    shots.push_back(s);
  }
  return shots;
}

std::vector<TrackSample> parse_track_text(std::string_view text) {
  std::vector<TrackSample> out;
  for (const auto& [line, f] : csv_rows(text, "frame,u,v,visible")) {
    TrackSample s;
    s.frame = parse_int<Frame>(f[0], "frame", line);
    if (f[3] == "1") {
      s.visible = true;
    } else if (f[3] == "0") {
      s.visible = false;
    } else {
      throw Error("BadVisibleFlag", "visible must be 0 or 1", line);
    }
    s.u = parse_double(f[1], "u", line);
    s.v = parse_double(f[2], "v", line);
    if (s.visible && (!std::isfinite(s.u) || !std::isfinite(s.v))) {
      throw Error("MalformedNumber", "visible sample needs finite u,v", line);
    }
    if (!out.empty() && s.frame <= out.back().frame) {
      throw Error("NonMonotoneFrames", "frames must be strictly increasing", line);
    }
    out.push_back(s);
  }
  return out;
}

CalibrationInput parse_calibration_text(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw Error("MalformedJson", "calibration must be an object");
  CalibrationInput cal;
  if (j.contains("image_size")) {
    const auto& s = j.at("image_size");
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer() ||
        s[0].get<long long>() <= 0 || s[1].get<long long>() <= 0 || s[0].get<long long>() > 100000 ||
        s[1].get<long long>() > 100000) {
      throw Error("MalformedField", "image_size must be [width, height] positive integers");
    }
    cal.image_width = s[0].get<int>();
    cal.image_height = s[1].get<int>();
  }
  if (j.contains("projection")) {
    const auto& p = j.at("projection");
    if (!p.is_array() || p.size() != 12) throw Error("MalformedField", "projection must hold 12 numbers");
    std::array<double, 12> P{};
    for (std::size_t i = 0; i < 12; ++i) {
      if (!p[i].is_number()) throw Error("MalformedNumber", "projection[" + std::to_string(i) + "]");
      P[i] = p[i].get<double>();
      if (!std::isfinite(P[i])) throw Error("MalformedNumber", "projection[" + std::to_string(i) + "]");
    }
    cal.projection = P;
  }
  if (j.contains("keypoints")) {
    const auto& kps = j.at("keypoints");
    if (!kps.is_array()) throw Error("MalformedField", "keypoints must be an array");
    for (const auto& k : kps) {
      Keypoint kp;
      kp.court = {json_number(k, "x"), json_number(k, "y"), json_number(k, "z")};
      kp.pixel = {json_number(k, "u"), json_number(k, "v")};
      cal.keypoints.push_back(kp);
    }
  }
  if (!cal.projection && !j.contains("keypoints")) throw Error("MissingField", "keypoints or projection");
  if (!cal.projection) {
    if (cal.keypoints.size() < 6) {
      throw Error("TooFewKeypoints", "need at least 6 keypoints, got " + std::to_string(cal.keypoints.size()));
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& k : cal.keypoints) {
      xs.push_back(k.court.x);
      ys.push_back(k.court.y);
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    if (xs.front() == xs.back() || ys.front() == ys.back()) {
      throw Error("DegenerateConfiguration", "keypoints need at least two distinct X and two distinct Y values");
    }
  }
  return cal;
}

namespace {

std::optional<PlayerPose> parse_player_pose(const json& rec, const char* key, int line, const CourtSpec& court,
                                            std::vector<Diagnostic>& warnings, Frame frame) {
  if (!rec.contains(key) || rec.at(key).is_null()) return std::nullopt;
  const auto& p = rec.at(key);
  if (!p.is_object()) throw Error("MalformedField", std::string(key) + " must be an object", line);
  PlayerPose pose;
  pose.x = json_number(p, "x", line);
  pose.y = json_number(p, "y", line);
  if (p.contains("joints")) {
    const auto& joints = p.at("joints");
    if (!joints.is_array()) throw Error("MalformedField", "joints must be an array", line);
    for (const auto& jt : joints) {
      if (!jt.is_array() || jt.size() != 3 || !jt[0].is_number() || !jt[1].is_number() || !jt[2].is_number()) {
        throw Error("MalformedField", "joint must be [x, y, z]", line);
      }
      pose.joints.push_back({jt[0].get<double>(), jt[1].get<double>(), jt[2].get<double>()});
    }
  }
  if (std::abs(pose.x) > court.half_width() + 1.0 || std::abs(pose.y) > court.half_length() + 1.0) {
    Diagnostic d;
    d.severity = Severity::Warning;
    d.code = "OutOfCourtBounds";
    d.message = std::string("player ") + key + " at frame " + std::to_string(frame) + " is off court";
    d.line = line;
    warnings.push_back(std::move(d));
  }
  return pose;
}

}  // namespace

PoseInput parse_poses_text(std::string_view text) {
  PoseInput out;
  const CourtSpec court;
  for (const auto& [line, content] : lines_of(text)) {
    const json rec = parse_json(content, line);
    if (!rec.is_object()) throw Error("MalformedJson", "pose record must be an object", line);
    if (!rec.contains("frame")) throw Error("MissingField", "frame", line);
    if (!rec.at("frame").is_number_integer()) throw Error("MalformedNumber", "frame", line);
    PoseFrame pf;
    pf.frame = rec.at("frame").get<Frame>();
    if (!out.frames.empty() && pf.frame <= out.frames.back().frame) {
      throw Error("NonMonotoneFrames", "pose frames must be strictly increasing", line);
    }
    pf.a = parse_player_pose(rec, "A", line, court, out.warnings, pf.frame);
    pf.b = parse_player_pose(rec, "B", line, court, out.warnings, pf.frame);
    out.frames.push_back(std::move(pf));
  }
  return out;
}

MatchManifest parse_manifest(const std::filesystem::path& path) { return parse_manifest_text(read_file(path)); }
std::vector<RallyRecord> parse_rallies(const std::filesystem::path& path) { return parse_rallies_text(read_file(path)); }
std::vector<ShotRecord> parse_shots(const std::filesystem::path& path) { return parse_shots_text(read_file(path)); }
std::vector<TrackSample> parse_track(const std::filesystem::path& path) { return parse_track_text(read_file(path)); }
CalibrationInput parse_calibration(const std::filesystem::path& path) {
  return parse_calibration_text(read_file(path));
}
PoseInput parse_poses(const std::filesystem::path& path) { return parse_poses_text(read_file(path)); }

void write_manifest(std::ostream& os, const MatchManifest& m) {
  json j;
  j["video_uri"] = m.video_uri;
  j["fps"] = m.fps;
  j["players"] = {{"A", m.player_a}, {"B", m.player_b}};
  if (!m.event.empty()) j["event"] = m.event;
  if (!m.round.empty()) j["round"] = m.round;
  if (m.negative_y_start) j["negative_y_start"] = to_string(*m.negative_y_start);
  os << j.dump(2) << '\n';
}

void write_rallies(std::ostream& os, const std::vector<RallyRecord>& rallies) {
  os << "rally_id,start_frame,end_frame,server,winner\n";
  for (const auto& r : rallies) {
    os << r.rally_id << ',' << r.start_frame << ',' << r.end_frame << ',' << to_string(r.server) << ','
       << to_string(r.winner) << '\n';
  }
}

void write_shots(std::ostream& os, const std::vector<ShotRecord>& shots) {
  os << "rally_id,shot_index,hit_frame,hitter\n";
  for (const auto& s : shots) {
    os << s.rally_id << ',' << s.shot_index << ',' << s.hit_frame << ',' << to_string(s.hitter) << '\n';
  }
}

void write_track(std::ostream& os, const std::vector<TrackSample>& track) {
  os << "frame,u,v,visible\n";
  for (const auto& s : track) {
    os << s.frame << ',' << fmt(s.u) << ',' << fmt(s.v) << ',' << (s.visible ? 1 : 0) << '\n';
  }
}

void write_calibration(std::ostream& os, const CalibrationInput& cal) {
  json j;
  j["image_size"] = {cal.image_width, cal.image_height};
  if (cal.projection) j["projection"] = *cal.projection;
  if (!cal.keypoints.empty() || !cal.projection) {
    json kps = json::array();
    for (const auto& k : cal.keypoints) {
      kps.push_back({{"x", k.court.x}, {"y", k.court.y}, {"z", k.court.z}, {"u", k.pixel.u}, {"v", k.pixel.v}});
    }
    j["keypoints"] = std::move(kps);
  }
  os << j.dump(2) << '\n';
}

void write_poses(std::ostream& os, const std::vector<PoseFrame>& poses) {
  auto player = [](const PlayerPose& p) {
    json j = {{"x", p.x}, {"y", p.y}};
    if (!p.joints.empty()) {
      json joints = json::array();
      for (const auto& jt : p.joints) joints.push_back({jt.x, jt.y, jt.z});
      j["joints"] = std::move(joints);
    }
    return j;
  };
  for (const auto& f : poses) {
    json j = {{"frame", f.frame}};
    if (f.a) j["A"] = player(*f.a);
    if (f.b) j["B"] = player(*f.b);
    os << j.dump() << '\n';
  }
}

std::vector<Diagnostic> assembly_diagnostics(const std::vector<RallyRecord>& rallies,
                                             const std::vector<ShotRecord>& shots) {
  std::vector<Diagnostic> out;
  auto add = [&](Severity sev, const char* code, std::string msg, std::optional<int> rally,
                 std::optional<int> shot) {
    Diagnostic d;
    d.severity = sev;
    d.code = code;
    d.message = std::move(msg);
    d.rally_id = rally;
    d.shot_index = shot;
    out.push_back(std::move(d));
  };

  std::map<int, std::vector<const ShotRecord*>> by_rally;
  std::map<int, const RallyRecord*> rally_by_id;
  for (const auto& r : rallies) rally_by_id[r.rally_id] = &r;
  for (const auto& s : shots) {
    const auto it = rally_by_id.find(s.rally_id);
    if (it == rally_by_id.end()) {
      add(Severity::Error, "OrphanShot", "shot references unknown rally " + std::to_string(s.rally_id),
          s.rally_id, s.shot_index);
      continue;
    }
    const auto& r = *it->second;
    if (s.hit_frame < r.start_frame || s.hit_frame > r.end_frame) {
      add(Severity::Error, "OrphanShot",
          "hit_frame " + std::to_string(s.hit_frame) + " outside rally frames [" + std::to_string(r.start_frame) +
              ", " + std::to_string(r.end_frame) + "]",
          s.rally_id, s.shot_index);
      continue;
    }
    by_rally[s.rally_id].push_back(&s);
  }

  const RallyRecord* prev = nullptr;
  for (const auto& r : rallies) {
    const auto it = by_rally.find(r.rally_id);
    if (it == by_rally.end() || it->second.empty()) {
      add(Severity::Error, "EmptyRally", "rally has no shots", r.rally_id, std::nullopt);
    } else {
      const auto& list = it->second;
      if (list.front()->hitter != r.server) {
        add(Severity::Warning, "HitterNotServer", "first shot not hit by the server", r.rally_id,
            list.front()->shot_index);
      }
      for (std::size_t i = 1; i < list.size(); ++i) {
        if (list[i]->hitter == list[i - 1]->hitter) {
          add(Severity::Error, "HitterNotAlternating", "consecutive shots by the same hitter", r.rally_id,
              list[i]->shot_index);
        }
      }
    }
    if (prev && r.server != prev->winner) {
      add(Severity::Warning, "ServerNotPreviousWinner", "server differs from the previous rally's winner",
          r.rally_id, std::nullopt);
    }
    prev = &r;
  }
  return out;
}

RawMatch assemble(MatchManifest manifest, const std::vector<RallyRecord>& rallies,
                  const std::vector<ShotRecord>& shots, std::vector<TrackSample> track,
                  CalibrationInput calibration, std::optional<PoseInput> poses) {
  RawMatch m;
  const auto diags = assembly_diagnostics(rallies, shots);
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) throw Error(d.code, format(d));
  }
  m.warnings = diags;
  m.manifest = std::move(manifest);
  std::map<int, std::size_t> index;
  for (const auto& r : rallies) {
    index[r.rally_id] = m.rallies.size();
    m.rallies.push_back({r, {}});
  }
  for (const auto& s : shots) m.rallies[index.at(s.rally_id)].shots.push_back(s);
  m.track = std::move(track);
  m.calibration = std::move(calibration);
  if (poses) {
    for (const auto& w : poses->warnings) m.warnings.push_back(w);
  }
  m.poses = std::move(poses);
  return m;
}

RawMatch load_match_dir(const std::filesystem::path& dir) {
  auto manifest = parse_manifest(dir / InputFiles::manifest);
  auto rallies = parse_rallies(dir / InputFiles::rallies);
  auto shots = parse_shots(dir / InputFiles::shots);
  auto track = parse_track(dir / InputFiles::track);
  auto cal = parse_calibration(dir / InputFiles::calibration);
  std::optional<PoseInput> poses;
  if (std::filesystem::exists(dir / InputFiles::poses)) poses = parse_poses(dir / InputFiles::poses);
  return assemble(std::move(manifest), rallies, shots, std::move(track), std::move(cal), std::move(poses));
}

}  // namespace courtside
