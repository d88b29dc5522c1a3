// Shot Filter and Rally Menu: conjunctive filters over an analyzed bundle.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courtside/model.hpp"
#include "courtside/stats.hpp"

namespace courtside {

enum class Role : std::uint8_t { All, Winners, Errors };
const char* to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct ShotFilter {
  std::optional<int> game;  // 1-based
  std::optional<Half> half;
  std::optional<PlayerId> scorer;  // rallies won by
  Role role = Role::All;
  std::optional<PlayerId> hitter;
  std::vector<Zone> from_zones;  // empty = any
  std::vector<Zone> to_zones;

  // Only game/half/scorer set.
  bool rally_scoped() const;
};

// Throws Error{"InvalidFilter"} (half without game, game < 1).
void check_filter(const ShotFilter& f);

// Builds a filter from query-string style fields (game, half, scorer, role,
// hitter, from_zone, to_zone; zones comma separated). `get` returns the
// value of a field or nullopt. Unknown values throw Error{"InvalidFilter"}.
ShotFilter parse_filter(const std::function<std::optional<std::string>(std::string_view)>& get);

// Inverse of parse_filter; fields in a fixed order, unset fields omitted.
std::vector<std::pair<std::string, std::string>> filter_fields(const ShotFilter& f);

bool matches(const ShotFilter& f, const Game& g, const Rally& r, const ClassifiedShot& s);

// Matched shots in match order.
std::vector<const ClassifiedShot*> filter_shots(const MatchBundle& bundle, const ShotFilter& f);

struct RallyMenuItem {
  int rally_id = 0;
  int game = 1;
  std::array<int, 2> score_after{0, 0};
  int shot_count = 0;
  bool is_short = false;
  std::vector<int> matched_shot_ids;
};

std::vector<RallyMenuItem> rally_menu(const MatchBundle& bundle, const ShotFilter& f);

struct ContextOptions {
  double pre_roll = 0.5;
  double post_roll = 0.5;
};

struct ShotContext {
  int rally_id = 0;
  int game = 1;
  double clip_start = 0.0;
  double clip_end = 0.0;
  const ClassifiedShot* shot = nullptr;
  std::optional<int> previous_shot_id;
  std::optional<int> next_shot_id;
};

// Clip spans [hit - pre_roll, next hit + post_roll] clamped to the rally; the
// last shot's clip runs to the rally end. Throws Error{"UnknownShot"}.
ShotContext shot_context(const MatchBundle& bundle, int shot_id, const ContextOptions& opt = {});

// Locates a rally by id; nullptr when absent.
const Rally* find_rally(const MatchBundle& bundle, int rally_id, const Game** game = nullptr);

}  // namespace courtside
