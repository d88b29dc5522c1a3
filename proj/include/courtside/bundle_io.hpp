// bundle.json (de)serialization and the JSON views served by the API.
//
// Trajectory samples are packed as [t, x, y, z, vx, vy, vz]; vectors as
// [x, y, z]; scores as [A, B]. Doubles are written shortest round-trip, so
// identical bundles always serialize to identical bytes.
#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"

#include "courtside/model.hpp"
#include "courtside/query.hpp"
#include "courtside/stats.hpp"

namespace courtside {

using Json = nlohmann::json;

inline constexpr const char* kBundleFormat = "courtside-bundle/1";

Json to_json(const MatchBundle& b);
// Throws Error{"MalformedBundle"}.
MatchBundle bundle_from_json(const Json& j);

std::string dump_bundle(const MatchBundle& b);
void write_bundle(const std::filesystem::path& path, const MatchBundle& b);
// Throws Error{"UnreadableFile"} or Error{"MalformedBundle"}.
MatchBundle read_bundle(const std::filesystem::path& path);

Json to_json(const Diagnostic& d);
Json to_json(const MatchSummary& s);
Json to_json(const RallySummary& s);
Json to_json(const OutcomeCounts& c);
Json to_json(const HeatmapCell& c);
Json to_json(const RallyMenuItem& m);
Json to_json(const ShotFilter& f);

// Shot with or without its trajectory samples.
Json shot_json(const ClassifiedShot& s, bool with_trajectory);
// Rally header plus shots (with trajectories), poses and clip times.
Json rally_json(const MatchBundle& b, const Game& g, const Rally& r);
Json context_json(const ShotContext& c);
Json shots_json(std::span<const ClassifiedShot* const> shots);
Json heatmap_json(std::span<const HeatmapCell> cells);

}  // namespace courtside
