#include "courtside/model.hpp"

#include <set>
#include <sstream>

#include "courtside/error.hpp"
#include "courtside/validate.hpp"

namespace courtside {

const char* to_string(PlayerId p) { return p == PlayerId::A ? "A" : "B"; }

std::optional<PlayerId> parse_player(std::string_view s) {
  if (s == "A") return PlayerId::A;
  if (s == "B") return PlayerId::B;
  return std::nullopt;
}

const char* to_string(ShotLabel l) {
  switch (l) {
    case ShotLabel::Winner: return "winner";
    case ShotLabel::Error: return "error";
    case ShotLabel::Normal: break;
  }
  return "normal";
}

const char* to_string(Tendency t) { return t == Tendency::Offensive ? "offensive" : "defensive"; }

std::optional<ShotLabel> parse_label(std::string_view s) {
  if (s == "winner") return ShotLabel::Winner;
  if (s == "error") return ShotLabel::Error;
  if (s == "normal") return ShotLabel::Normal;
  return std::nullopt;
}

std::optional<Tendency> parse_tendency(std::string_view s) {
  if (s == "offensive") return Tendency::Offensive;
  if (s == "defensive") return Tendency::Defensive;
  return std::nullopt;
}

Zone Zone::from_index(int i) {
  if (i < 0 || i >= 12) throw Error("InvalidZone", "zone index " + std::to_string(i) + " out of range");
  Zone z;
  z.half = static_cast<PlayerId>(i / 6);
  z.depth = static_cast<Depth>((i % 6) / 2);
  z.side = static_cast<Side>(i % 2);
  return z;
}

namespace {
constexpr const char* kDepthNames[] = {"front", "middle", "back"};
constexpr const char* kSideNames[] = {"left", "right"};
}  // namespace

std::string to_string(const Zone& z) {
  std::string out = to_string(z.half);
  out += '.';
  out += kDepthNames[static_cast<int>(z.depth)];
  out += '.';
  out += kSideNames[static_cast<int>(z.side)];
  return out;
}

std::optional<Zone> parse_zone(std::string_view s) {
  const auto d1 = s.find('.');
  if (d1 == std::string_view::npos) return std::nullopt;
  const auto d2 = s.find('.', d1 + 1);
  if (d2 == std::string_view::npos) return std::nullopt;
  const auto half = parse_player(s.substr(0, d1));
  if (!half) return std::nullopt;
  const auto depth_s = s.substr(d1 + 1, d2 - d1 - 1);
  const auto side_s = s.substr(d2 + 1);
  Zone z;
  z.half = *half;
  bool ok = false;
  for (int i = 0; i < 3; ++i) {
    if (depth_s == kDepthNames[i]) {
      z.depth = static_cast<Depth>(i);
      ok = true;
    }
  }
  if (!ok) return std::nullopt;
  if (side_s == "left") {
    z.side = Side::Left;
  } else if (side_s == "right") {
    z.side = Side::Right;
  } else {
    return std::nullopt;
  }
  return z;
}

std::string format(const Diagnostic& d) {
  std::ostringstream os;
  os << (d.severity == Severity::Error ? "error" : "warning") << " [" << d.code << "]";
  if (d.line) os << " line " << *d.line;
  if (d.rally_id) os << " rally " << *d.rally_id;
  if (d.shot_index) os << " shot " << *d.shot_index;
  os << ": " << d.message;
  return os.str();
}

bool ValidationReport::has_errors() const {
  for (const auto& e : entries) {
    if (e.severity == Severity::Error) return true;
  }
  return false;
}

namespace {

void add(ValidationReport& r, Severity sev, std::string code, std::string msg,
         std::optional<int> rally = {}, std::optional<int> shot = {}) {
  Diagnostic d;
  d.severity = sev;
  d.code = std::move(code);
  d.message = std::move(msg);
  d.rally_id = rally;
  d.shot_index = shot;
  r.entries.push_back(std::move(d));
}

}  // namespace

ValidationReport validate_bundle(const MatchBundle& bundle) {
  ValidationReport r;
  if (!(bundle.manifest.fps > 0)) {
    add(r, Severity::Error, "BadFps", "fps must be positive");
  }

  const RallyRecord* prev = nullptr;
  std::set<int> shot_ids;
  int rally_total = 0;
  int shot_total = 0;
  for (const auto& game : bundle.games) {
    const Rally* prev_in_game = nullptr;
    for (const auto& rally : game.rallies) {
      const auto& rec = rally.record;
      ++rally_total;
      if (rec.start_frame >= rec.end_frame) {
        add(r, Severity::Error, "BadRallyRange", "start_frame must precede end_frame", rec.rally_id);
      }
      if (prev && rec.start_frame <= prev->end_frame) {
        add(r, Severity::Error, "OverlappingRallies", "rally overlaps or precedes the previous rally",
            rec.rally_id);
      }
      if (prev_in_game && rec.server != prev_in_game->record.winner) {
        add(r, Severity::Warning, "ServerNotPreviousWinner",
            "server differs from the previous rally's winner", rec.rally_id);
      }
      prev = &rec;
      prev_in_game = &rally;

      if (rally.shots.empty()) {
        add(r, Severity::Error, "EmptyRally", "rally has no shots", rec.rally_id);
      }
      int winners = 0;
      int errors = 0;
      for (std::size_t i = 0; i < rally.shots.size(); ++i) {
        const auto& shot = rally.shots[i];
        const auto& s = shot.record;
        ++shot_total;
        if (!shot_ids.insert(shot.shot_id).second) {
          add(r, Severity::Error, "DuplicateShotId", "shot id reused", rec.rally_id, s.shot_index);
        }
        if (s.rally_id != rec.rally_id) {
          add(r, Severity::Error, "ShotRallyMismatch", "shot filed under the wrong rally", rec.rally_id,
              s.shot_index);
        }
        if (s.hit_frame < rec.start_frame || s.hit_frame > rec.end_frame) {
          add(r, Severity::Error, "HitOutsideRally", "hit_frame outside the rally's frame range",
              rec.rally_id, s.shot_index);
        }
        if (i > 0) {
          const auto& p = rally.shots[i - 1].record;
          if (s.shot_index <= p.shot_index || s.hit_frame <= p.hit_frame) {
            add(r, Severity::Error, "NonMonotoneShots", "shot order not strictly increasing",
                rec.rally_id, s.shot_index);
          }
          if (s.hitter == p.hitter) {
            add(r, Severity::Error, "HitterNotAlternating", "consecutive shots by the same hitter",
                rec.rally_id, s.shot_index);
          }
        } else if (s.hitter != rec.server) {
          add(r, Severity::Warning, "HitterNotServer", "first shot not hit by the server", rec.rally_id,
              s.shot_index);
        }
        if (shot.tendency && !shot.net) {
          add(r, Severity::Error, "TendencyWithoutCrossing", "tendency set without a net crossing",
              rec.rally_id, s.shot_index);
        }
        if (bundle.canonical && shot.fit && shot.fit->converged && shot.from_zone.half != s.hitter) {
          add(r, Severity::Warning, "FromZoneHalf", "from zone not in the hitter's half", rec.rally_id,
              s.shot_index);
        }
        winners += shot.label == ShotLabel::Winner;
        errors += shot.label == ShotLabel::Error;
      }
      if (winners + errors > 1) {
        add(r, Severity::Error, "LabelCount", "more than one winner/error in a rally", rec.rally_id);
      } else if (winners + errors == 0 && !rally.degenerate && !rally.shots.empty()) {
        add(r, Severity::Error, "LabelCount", "non-degenerate rally has no winner or error",
            rec.rally_id);
      } else if (winners + errors == 1 && rally.degenerate) {
        add(r, Severity::Error, "LabelCount", "degenerate rally carries an outcome label",
            rec.rally_id);
      }
    }
  }
  if (bundle.summary.rally_count != rally_total) {
    add(r, Severity::Error, "SummaryRallyCount", "summary rally_count disagrees with games");
  }
  if (bundle.summary.shot_count != shot_total) {
    add(r, Severity::Error, "SummaryShotCount", "summary shot_count disagrees with games");
  }
  return r;
}

}  // namespace courtside
