#include "courtside/query.hpp"

#include <algorithm>
#include <charconv>

#include "courtside/error.hpp"

namespace courtside {

const char* to_string(Role r) {
  switch (r) {
    case Role::Winners: return "winners";
    case Role::Errors: return "errors";
    default: return "all";
  }
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "all") return Role::All;
  if (s == "winners") return Role::Winners;
  if (s == "errors") return Role::Errors;
  return std::nullopt;
}

bool ShotFilter::rally_scoped() const {
  return role == Role::All && !hitter && from_zones.empty() && to_zones.empty();
}

void check_filter(const ShotFilter& f) {
  if (f.half && !f.game) throw Error("InvalidFilter", "half requires game");
  if (f.game && *f.game < 1) throw Error("InvalidFilter", "game is 1-based");
}

namespace {

[[noreturn]] void bad(std::string_view field, std::string_view value) {
  throw Error("InvalidFilter", std::string(field) + "=" + std::string(value));
}

std::vector<Zone> parse_zone_list(std::string_view field, std::string_view value) {
  std::vector<Zone> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = std::min(value.find(',', pos), value.size());
    const auto item = value.substr(pos, comma - pos);
    if (!item.empty()) {
      const auto z = parse_zone(item);
      if (!z) bad(field, item);
      out.push_back(*z);
    }
    pos = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string join_zones(const std::vector<Zone>& zones) {
  std::string s;
  for (const auto& z : zones) {
    if (!s.empty()) s += ',';
    s += to_string(z);
  }
  return s;
}

bool contains(const std::vector<Zone>& set, const Zone& z) {
  return set.empty() || std::find(set.begin(), set.end(), z) != set.end();
}

}  // namespace

ShotFilter parse_filter(const std::function<std::optional<std::string>(std::string_view)>& get) {
  ShotFilter f;
  if (auto v = get("game"); v && !v->empty()) {
    int g = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), g);
    if (ec != std::errc{} || p != v->data() + v->size()) bad("game", *v);
    f.game = g;
  }
  if (auto v = get("half"); v && !v->empty()) {
    f.half = parse_half(*v);
    if (!f.half) bad("half", *v);
  }
  if (auto v = get("scorer"); v && !v->empty()) {
    f.scorer = parse_player(*v);
    if (!f.scorer) bad("scorer", *v);
  }
  if (auto v = get("role"); v && !v->empty()) {
    const auto r = parse_role(*v);
    if (!r) bad("role", *v);
    f.role = *r;
  }
  if (auto v = get("hitter"); v && !v->empty()) {
    f.hitter = parse_player(*v);
    if (!f.hitter) bad("hitter", *v);
  }
  if (auto v = get("from_zone")) f.from_zones = parse_zone_list("from_zone", *v);
  if (auto v = get("to_zone")) f.to_zones = parse_zone_list("to_zone", *v);
  check_filter(f);
  return f;
}

std::vector<std::pair<std::string, std::string>> filter_fields(const ShotFilter& f) {
  std::vector<std::pair<std::string, std::string>> out;
  if (f.game) out.emplace_back("game", std::to_string(*f.game));
  if (f.half) out.emplace_back("half", to_string(*f.half));
  if (f.scorer) out.emplace_back("scorer", to_string(*f.scorer));
  if (f.role != Role::All) out.emplace_back("role", to_string(f.role));
  if (f.hitter) out.emplace_back("hitter", to_string(*f.hitter));
  if (!f.from_zones.empty()) out.emplace_back("from_zone", join_zones(f.from_zones));
  if (!f.to_zones.empty()) out.emplace_back("to_zone", join_zones(f.to_zones));
  return out;
}

bool matches(const ShotFilter& f, const Game& g, const Rally& r, const ClassifiedShot& s) {
  if (f.game && g.number != *f.game) return false;
  if (f.half && r.second_half != (*f.half == Half::Second)) return false;
  if (f.scorer && r.record.winner != *f.scorer) return false;
  if (f.role == Role::Winners && s.label != ShotLabel::Winner) return false;
  if (f.role == Role::Errors && s.label != ShotLabel::Error) return false;
  if (f.hitter && s.record.hitter != *f.hitter) return false;
  return contains(f.from_zones, s.from_zone) && contains(f.to_zones, s.to_zone);
}

std::vector<const ClassifiedShot*> filter_shots(const MatchBundle& bundle, const ShotFilter& f) {
  check_filter(f);
  std::vector<const ClassifiedShot*> out;
  for (const auto& g : bundle.games)
    for (const auto& r : g.rallies)
      for (const auto& s : r.shots)
        if (matches(f, g, r, s)) out.push_back(&s);
  return out;
}

std::vector<RallyMenuItem> rally_menu(const MatchBundle& bundle, const ShotFilter& f) {
  check_filter(f);
  std::vector<RallyMenuItem> out;
  const bool whole_rallies = f.rally_scoped();
  for (const auto& g : bundle.games) {
    for (const auto& r : g.rallies) {
      RallyMenuItem item;
      for (const auto& s : r.shots)
        if (matches(f, g, r, s)) item.matched_shot_ids.push_back(s.shot_id);
      if (item.matched_shot_ids.empty()) {
        if (!whole_rallies) continue;
        if (f.game && g.number != *f.game) continue;
        if (f.half && r.second_half != (*f.half == Half::Second)) continue;
        if (f.scorer && r.record.winner != *f.scorer) continue;
      }
      item.rally_id = r.record.rally_id;
      item.game = g.number;
      item.score_after = r.score_after;
      item.shot_count = static_cast<int>(r.shots.size());
      item.is_short = item.shot_count < kShortRally;
      out.push_back(std::move(item));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RallyMenuItem& a, const RallyMenuItem& b) { return a.rally_id < b.rally_id; });
  return out;
}

const Rally* find_rally(const MatchBundle& bundle, int rally_id, const Game** game) {
  for (const auto& g : bundle.games)
    for (const auto& r : g.rallies)
      if (r.record.rally_id == rally_id) {
        if (game) *game = &g;
        return &r;
      }
  return nullptr;
}

ShotContext shot_context(const MatchBundle& bundle, int shot_id, const ContextOptions& opt) {
  for (const auto& g : bundle.games) {
    for (const auto& r : g.rallies) {
      for (std::size_t i = 0; i < r.shots.size(); ++i) {
        const auto& s = r.shots[i];
        if (s.shot_id != shot_id) continue;
        ShotContext c;
        c.rally_id = r.record.rally_id;
        c.game = g.number;
        c.shot = &s;
        const double rally_start = bundle.frame_to_sec(r.record.start_frame);
        const double rally_end = bundle.frame_to_sec(r.record.end_frame);
        c.clip_start = std::max(rally_start, bundle.frame_to_sec(s.record.hit_frame) - opt.pre_roll);
        if (i + 1 < r.shots.size()) {
          c.next_shot_id = r.shots[i + 1].shot_id;
          c.clip_end = std::min(rally_end, bundle.frame_to_sec(r.shots[i + 1].record.hit_frame) + opt.post_roll);
        } else {
          c.clip_end = rally_end;
        }
        if (i > 0) c.previous_shot_id = r.shots[i - 1].shot_id;
        return c;
      }
    }
  }
  throw Error("UnknownShot", "no shot with id " + std::to_string(shot_id));
}

}  // namespace courtside
