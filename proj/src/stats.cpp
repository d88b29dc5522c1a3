#include "courtside/stats.hpp"

#include <algorithm>
#include <string>

#include "courtside/court.hpp"
#include "courtside/error.hpp"

namespace courtside {

bool game_over(const std::array<int, 2>& s, const ScoringRules& rules) {
  const int hi = std::max(s[0], s[1]);
  const int lo = std::min(s[0], s[1]);
  return hi >= rules.cap || (hi >= rules.points && hi - lo >= rules.win_by);
}

GameDerivation derive_games(std::span<const RallyRecord> rallies, const ScoringRules& rules) {
  GameDerivation out;
  std::array<int, 2> games_won{0, 0};
  for (std::size_t i = 0; i < rallies.size(); ++i) {
    if (out.match_winner) {
      throw Error("RalliesAfterMatchEnd",
                  "rally " + std::to_string(rallies[i].rally_id) + " follows the end of the match");
    }
    if (out.games.empty() || out.games.back().finished) {
      GameState g;
      g.number = static_cast<int>(out.games.size()) + 1;
      g.first_rally = i;
      out.games.push_back(g);
    }
    auto& g = out.games.back();
    ++g.score[index_of(rallies[i].winner)];
    g.scores.push_back(g.score);
    if (game_over(g.score, rules)) {
      g.finished = true;
      g.winner = g.score[0] > g.score[1] ? PlayerId::A : PlayerId::B;
      if (++games_won[index_of(*g.winner)] == rules.games_to_win()) out.match_winner = g.winner;
    }
  }
  if (!out.games.empty() && !out.games.back().finished) {
    Diagnostic d;
    d.severity = Severity::Warning;
    d.code = "UnfinishedFinalGame";
    d.message = "game " + std::to_string(out.games.back().number) + " ends at " +
                std::to_string(out.games.back().score[0]) + "-" + std::to_string(out.games.back().score[1]);
    out.warnings.push_back(std::move(d));
  }
  return out;
}

std::size_t half_boundary(const GameState& game, const ScoringRules& rules) {
  for (std::size_t i = 0; i < game.scores.size(); ++i) {
    if (std::max(game.scores[i][0], game.scores[i][1]) == rules.half_points()) return i;
  }
  throw Error("NoMidpoint", "game " + std::to_string(game.number) + " never reaches " +
                                std::to_string(rules.half_points()));
}

const char* to_string(Half h) { return h == Half::First ? "first" : "second"; }

std::optional<Half> parse_half(std::string_view s) {
  if (s == "first" || s == "1") return Half::First;
  if (s == "second" || s == "2") return Half::Second;
  return std::nullopt;
}

bool a_on_positive_y(const MatchManifest& m, int game_number, bool second_half, const ScoringRules& rules) {
  if (!m.negative_y_start) throw Error("MissingSideSchedule", "manifest has no negative_y_start");
  int flips = game_number - 1;
  if (game_number == rules.max_games && second_half) ++flips;
  const bool a_starts_positive = *m.negative_y_start == PlayerId::B;
  return a_starts_positive != (flips % 2 == 1);
}

namespace {

void mirror_samples(std::vector<TrajectorySample>& samples) {
  for (auto& s : samples) {
    s.p = mirror(s.p);
    s.v = mirror_velocity(s.v);
  }
}

void mirror_pose(std::optional<PlayerPose>& pose) {
  if (!pose) return;
  pose->x = -pose->x;
  pose->y = -pose->y;
  for (auto& j : pose->joints) j = mirror(j);
}

}  // namespace

MatchBundle canonicalize_sides(MatchBundle bundle, const ScoringRules& rules) {
  if (bundle.canonical) return bundle;
  for (auto& g : bundle.games) {
    for (auto& r : g.rallies) {
      if (!a_on_positive_y(bundle.manifest, g.number, r.second_half, rules)) continue;
      for (auto& s : r.shots) {
        mirror_samples(s.trajectory);
        if (s.net) {
          s.net->p = mirror(s.net->p);
          s.net->v = mirror_velocity(s.net->v);
        }
        if (s.fit) {
          s.fit->params.p0 = mirror(s.fit->params.p0);
          s.fit->params.v0 = mirror_velocity(s.fit->params.v0);
        }
      }
      for (auto& p : r.poses) {
        mirror_pose(p.a);
        mirror_pose(p.b);
      }
    }
  }
  bundle.canonical = true;
  return bundle;
}

bool in_scope(const Game& g, const Rally& r, const Scope& s) {
  if (s.game && g.number != *s.game) return false;
  if (s.half && r.second_half != (*s.half == Half::Second)) return false;
  return true;
}

MatchSummary summarize(const MatchBundle& bundle, const Scope& scope) {
  MatchSummary m;
  Frame frames = 0;
  for (const auto& g : bundle.games) {
    const Rally* last = nullptr;
    for (const auto& r : g.rallies) {
      if (!in_scope(g, r, scope)) continue;
      frames += r.record.end_frame - r.record.start_frame;
      ++m.rally_count;
      m.shot_count += static_cast<int>(r.shots.size());
      ++m.rallies_won[index_of(r.record.winner)];
      last = &r;
    }
    if (last) m.game_scores.push_back(last->score_after);
  }
  m.duration_sec = bundle.frame_to_sec(frames);
  m.empty = m.rally_count == 0;
  m.avg_shots_per_rally = m.empty ? 0.0 : static_cast<double>(m.shot_count) / m.rally_count;
  m.match_winner = bundle.summary.match_winner;
  return m;
}

RallySummary summarize_rally(const Rally& r, double fps) {
  RallySummary s;
  s.rally_id = r.record.rally_id;
  s.duration = static_cast<double>(r.record.end_frame - r.record.start_frame) / fps;
  s.shot_count = static_cast<int>(r.shots.size());
  s.is_short = s.shot_count < kShortRally;
  s.score_after = r.score_after;
  return s;
}

OutcomeCounts outcome_counts(const MatchBundle& bundle, const Scope& scope) {
  OutcomeCounts c;
  for (const auto& g : bundle.games) {
    for (const auto& r : g.rallies) {
      if (!in_scope(g, r, scope)) continue;
      if (r.degenerate) ++c.degenerate;
      if (static_cast<int>(r.shots.size()) < kShortRally) ++c.short_rallies_won[index_of(r.record.winner)];
      for (const auto& s : r.shots) {
        if (s.label == ShotLabel::Winner) ++c.winners[index_of(s.record.hitter)];
        if (s.label == ShotLabel::Error) ++c.errors[index_of(s.record.hitter)];
      }
    }
  }
  return c;
}

const char* to_string(Direction d) { return d == Direction::From ? "from" : "to"; }

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "from") return Direction::From;
  if (s == "to") return Direction::To;
  return std::nullopt;
}

std::vector<HeatmapCell> heatmap(std::span<const ClassifiedShot* const> shots, Direction dir) {
  std::vector<HeatmapCell> cells(12);
  for (int i = 0; i < 12; ++i) {
    cells[i].zone = Zone::from_index(i);
    cells[i].direction = dir;
  }
  for (const auto* s : shots) {
    const Zone& z = dir == Direction::From ? s->from_zone : s->to_zone;
    ++cells[z.index()].count;
  }
  const int total = static_cast<int>(shots.size());
  for (auto& c : cells) {
    if (total == 0) continue;
    c.fraction = static_cast<double>(c.count) / total;
    c.display_percent = display_percent(c.count, total);
  }
  return cells;
}

}  // namespace courtside
