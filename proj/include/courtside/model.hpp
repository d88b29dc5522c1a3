// Core domain types shared by every stage of the analysis.
//
// Court frame: origin at court center on the ground under the net, X across
// the court width, Y along the court length, Z up. Player A canonically
// occupies the negative-Y half.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace courtside {

enum class PlayerId : std::uint8_t { A, B };

constexpr PlayerId opponent(PlayerId p) { return p == PlayerId::A ? PlayerId::B : PlayerId::A; }

const char* to_string(PlayerId p);
std::optional<PlayerId> parse_player(std::string_view s);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return s * a; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Positions in meters; velocities reuse Vec3 in m/s.
using CourtPoint = Vec3;
using Velocity = Vec3;

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

using Frame = std::int64_t;

struct RallyRecord {
  int rally_id = 0;
  Frame start_frame = 0;
  Frame end_frame = 0;
  PlayerId server = PlayerId::A;
  PlayerId winner = PlayerId::A;
  friend bool operator==(const RallyRecord&, const RallyRecord&) = default;
};

struct ShotRecord {
  int rally_id = 0;
  int shot_index = 0;
  Frame hit_frame = 0;
  PlayerId hitter = PlayerId::A;
  friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

enum class ShotLabel : std::uint8_t { Normal, Winner, Error };
enum class Tendency : std::uint8_t { Offensive, Defensive };

const char* to_string(ShotLabel l);
const char* to_string(Tendency t);
std::optional<ShotLabel> parse_label(std::string_view s);
std::optional<Tendency> parse_tendency(std::string_view s);

enum class Side : std::uint8_t { Left, Right };
enum class Depth : std::uint8_t { Front, Middle, Back };

// One of the six player-relative regions of a half-court. Left/Right is
// taken from the owning player's own viewpoint facing the net.
struct Zone {
  Side side = Side::Left;
  Depth depth = Depth::Front;
  PlayerId half = PlayerId::A;

  friend bool operator==(const Zone&, const Zone&) = default;
  friend auto operator<=>(const Zone& a, const Zone& b) { return a.index() <=> b.index(); }

  // 0..11: half-major, then depth, then side.
  int index() const {
    return static_cast<int>(half) * 6 + static_cast<int>(depth) * 2 + static_cast<int>(side);
  }
  static Zone from_index(int i);
};

// `A.back.left` style key used on the wire.
std::string to_string(const Zone& z);
std::optional<Zone> parse_zone(std::string_view s);

// Court dimensions; defaults are the BWF doubles court.
struct CourtSpec {
  double length = 13.40;
  double width = 6.10;
  double net_height_center = 1.524;
  double net_height_post = 1.55;
  // Distances from the net of the front/middle and middle/back boundaries.
  std::array<double, 2> zone_bounds{13.40 / 6.0, 13.40 / 3.0};

  double half_length() const { return length / 2.0; }
  double half_width() const { return width / 2.0; }
  bool valid() const {
    return length > 0 && width > 0 && 0 < zone_bounds[0] && zone_bounds[0] < zone_bounds[1] &&
           zone_bounds[1] < half_length();
  }
};

constexpr double kGravity = 9.81;

struct FlightParams {
  CourtPoint p0;
  Velocity v0;
  double vt = 6.8;
  double t0 = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  CourtPoint p;
  Velocity v;
};

struct FitResult {
  FlightParams params;
  double rmse_px = 0.0;
  int n_obs = 0;
  bool converged = false;
  int iterations = 0;
};

struct NetCrossing {
  double t = 0.0;
  CourtPoint p;
  Velocity v;
};

struct CameraModel {
  // Row-major 3x4 projection, court frame -> homogeneous pixels.
  std::array<double, 12> P{};
  int image_width = 1280;
  int image_height = 720;
  double rmse_px = 0.0;
};

struct PlayerPose {
  double x = 0.0;
  double y = 0.0;
  std::vector<CourtPoint> joints;
  friend bool operator==(const PlayerPose&, const PlayerPose&) = default;
};

struct PoseFrame {
  Frame frame = 0;
  std::optional<PlayerPose> a;
  std::optional<PlayerPose> b;
  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

struct MatchManifest {
  std::string video_uri;
  double fps = 30.0;
  std::string player_a;
  std::string player_b;
  std::string event;
  std::string round;
  // Which player physically starts game 1 on the negative-Y end.
  std::optional<PlayerId> negative_y_start;
};

enum class Severity : std::uint8_t { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::optional<int> line;
  std::optional<int> rally_id;
  std::optional<int> shot_index;
};

std::string format(const Diagnostic& d);

// Fully derived per-shot record.
struct ClassifiedShot {
  int shot_id = 0;
  ShotRecord record;
  ShotLabel label = ShotLabel::Normal;
  std::optional<Tendency> tendency;
  Zone from_zone;
  Zone to_zone;
  double speed = 0.0;
  std::optional<NetCrossing> net;
  std::optional<FitResult> fit;
  std::vector<TrajectorySample> trajectory;
};

struct Rally {
  RallyRecord record;
  std::array<int, 2> score_after{0, 0};
  bool second_half = false;
  bool degenerate = false;
  std::vector<ClassifiedShot> shots;
  std::vector<PoseFrame> poses;
};

struct Game {
  int number = 1;  // 1-based
  std::array<int, 2> score{0, 0};
  bool finished = false;
  std::optional<PlayerId> winner;
  // rally_id of the last first-half rally, when the leading side reached 11.
  std::optional<int> half_boundary_rally;
  std::vector<Rally> rallies;
};

struct MatchSummary {
  double duration_sec = 0.0;
  int rally_count = 0;
  int shot_count = 0;
  double avg_shots_per_rally = 0.0;
  bool empty = true;
  std::array<int, 2> rallies_won{0, 0};
  std::optional<PlayerId> match_winner;
  std::vector<std::array<int, 2>> game_scores;
};

struct MatchBundle {
  MatchManifest manifest;
  CourtSpec court;
  CameraModel camera;
  std::vector<Game> games;
  MatchSummary summary;
  bool canonical = false;
  std::vector<Diagnostic> warnings;

  double frame_to_sec(Frame f) const { return static_cast<double>(f) / manifest.fps; }
};

inline int index_of(PlayerId p) { return static_cast<int>(p); }

}  // namespace courtside
