// Rally-point scoring, game halves, side canonicalization, summaries and the
// 12-cell zone heatmap.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "courtside/model.hpp"

namespace courtside {

struct ScoringRules {
  int points = 21;     // target score
  int win_by = 2;      // required lead at or above the target
  int cap = 30;        // first to reach this wins outright
  int max_games = 3;   // best of
  int games_to_win() const { return max_games / 2 + 1; }
  int half_points() const { return (points + 1) / 2; }
};

struct GameState {
  int number = 1;                  // 1-based
  std::size_t first_rally = 0;     // index into the input rally list
  std::vector<std::array<int, 2>> scores;  // running score after each rally
  std::array<int, 2> score{0, 0};
  bool finished = false;
  std::optional<PlayerId> winner;

  std::size_t rally_count() const { return scores.size(); }
};

struct GameDerivation {
  std::vector<GameState> games;
  std::optional<PlayerId> match_winner;
  std::vector<Diagnostic> warnings;  // UnfinishedFinalGame
};

bool game_over(const std::array<int, 2>& score, const ScoringRules& rules = {});

// Splits rallies into games by running rally-point scoring. Throws
// Error{"RalliesAfterMatchEnd"} when rallies follow a decided match.
GameDerivation derive_games(std::span<const RallyRecord> rallies, const ScoringRules& rules = {});

// 0-based position within the game of the first rally after which the leading
// side has exactly 11 (ScoringRules::half_points). Throws Error{"NoMidpoint"}.
std::size_t half_boundary(const GameState& game, const ScoringRules& rules = {});

enum class Half : std::uint8_t { First, Second };
const char* to_string(Half h);
std::optional<Half> parse_half(std::string_view s);

// Whether player A is physically on the positive-Y end for a rally: ends
// change after every game and at the midpoint of the deciding game. Throws
// Error{"MissingSideSchedule"} without MatchManifest::negative_y_start.
bool a_on_positive_y(const MatchManifest& m, int game_number, bool second_half,
                     const ScoringRules& rules = {});

// Mirrors trajectories, net crossings, fit parameters and poses so player A
// always occupies the negative-Y half. Zones are player-relative and stay as
// they are. No-op on an already canonical bundle.
MatchBundle canonicalize_sides(MatchBundle bundle, const ScoringRules& rules = {});

struct Scope {
  std::optional<int> game;  // 1-based
  std::optional<Half> half;
};

bool in_scope(const Game& g, const Rally& r, const Scope& s);

// Duration is the sum of rally spans. An empty scope reports zeros with
// `empty` set. game_scores lists each game in scope with its score at the
// end of the scope.
MatchSummary summarize(const MatchBundle& bundle, const Scope& scope = {});

struct RallySummary {
  int rally_id = 0;
  double duration = 0.0;
  int shot_count = 0;
  bool is_short = false;
  std::array<int, 2> score_after{0, 0};
};

constexpr int kShortRally = 10;
RallySummary summarize_rally(const Rally& r, double fps);

struct OutcomeCounts {
  std::array<int, 2> winners{0, 0};  // by hitter
  std::array<int, 2> errors{0, 0};
  std::array<int, 2> short_rallies_won{0, 0};
  int degenerate = 0;
};
OutcomeCounts outcome_counts(const MatchBundle& bundle, const Scope& scope = {});

enum class Direction : std::uint8_t { From, To };
const char* to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

struct HeatmapCell {
  Zone zone;
  Direction direction = Direction::From;
  int count = 0;
  double fraction = 0.0;
  int display_percent = 0;
};

// Round-half-up integer percent of count/total, computed exactly.
constexpr int display_percent(int count, int total) {
  return total > 0 ? (200 * count + total) / (2 * total) : 0;
}

// Twelve cells ordered by Zone::index().
std::vector<HeatmapCell> heatmap(std::span<const ClassifiedShot* const> shots, Direction dir);

}  // namespace courtside
