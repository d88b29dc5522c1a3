// Parsing and cross-validation of the annotation/tracker file set:
//
//   match.json        {video_uri, fps, players:{A,B}, event?, round?, negative_y_start?}
//   rallies.csv       rally_id,start_frame,end_frame,server,winner
//   shots.csv         rally_id,shot_index,hit_frame,hitter
//   track.csv         frame,u,v,visible
//   calibration.json  {keypoints:[{x,y,z,u,v}...]} | {projection:[12 numbers]}, image_size?:[w,h]
//   poses.jsonl       {frame, A:{x,y,joints?}, B:{x,y,joints?}} per line (optional)
//
// Parsers throw courtside::Error with the offending line (1-based, header is
// line 1) or key. Frames are the canonical time axis on disk.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courtside/court.hpp"
#include "courtside/flight.hpp"
#include "courtside/model.hpp"

namespace courtside {

struct PoseInput {
  std::vector<PoseFrame> frames;
  std::vector<Diagnostic> warnings;
};

MatchManifest parse_manifest_text(std::string_view text);
std::vector<RallyRecord> parse_rallies_text(std::string_view text);
std::vector<ShotRecord> parse_shots_text(std::string_view text);
std::vector<TrackSample> parse_track_text(std::string_view text);
CalibrationInput parse_calibration_text(std::string_view text);
PoseInput parse_poses_text(std::string_view text);

MatchManifest parse_manifest(const std::filesystem::path& path);
std::vector<RallyRecord> parse_rallies(const std::filesystem::path& path);
std::vector<ShotRecord> parse_shots(const std::filesystem::path& path);
std::vector<TrackSample> parse_track(const std::filesystem::path& path);
CalibrationInput parse_calibration(const std::filesystem::path& path);
PoseInput parse_poses(const std::filesystem::path& path);

void write_manifest(std::ostream& os, const MatchManifest& m);
void write_rallies(std::ostream& os, const std::vector<RallyRecord>& rallies);
void write_shots(std::ostream& os, const std::vector<ShotRecord>& shots);
void write_track(std::ostream& os, const std::vector<TrackSample>& track);
void write_calibration(std::ostream& os, const CalibrationInput& cal);
void write_poses(std::ostream& os, const std::vector<PoseFrame>& poses);

struct RawRally {
  RallyRecord record;
  std::vector<ShotRecord> shots;
};

// Pre-analysis match record with shots grouped under their rallies.
struct RawMatch {
  MatchManifest manifest;
  std::vector<RawRally> rallies;
  std::vector<TrackSample> track;
  CalibrationInput calibration;
  std::optional<PoseInput> poses;
  std::vector<Diagnostic> warnings;
};

// Every cross-file check (orphan shots, empty rallies, hitter alternation,
// hitter == server, server == previous winner) as diagnostics.
std::vector<Diagnostic> assembly_diagnostics(const std::vector<RallyRecord>& rallies,
                                             const std::vector<ShotRecord>& shots);

// Throws Error with the first error's code (OrphanShot, EmptyRally,
// HitterNotAlternating); warnings land in RawMatch::warnings.
RawMatch assemble(MatchManifest manifest, const std::vector<RallyRecord>& rallies,
                  const std::vector<ShotRecord>& shots, std::vector<TrackSample> track,
                  CalibrationInput calibration, std::optional<PoseInput> poses = std::nullopt);

// File names inside a match input directory.
struct InputFiles {
  static constexpr const char* manifest = "match.json";
  static constexpr const char* rallies = "rallies.csv";
  static constexpr const char* shots = "shots.csv";
  static constexpr const char* track = "track.csv";
  static constexpr const char* calibration = "calibration.json";
  static constexpr const char* poses = "poses.jsonl";
};

// Parses every file in `dir` (poses.jsonl optional) and assembles.
RawMatch load_match_dir(const std::filesystem::path& dir);

}  // namespace courtside
