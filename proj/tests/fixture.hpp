// Hand-built bundles for stats/query/service tests.
#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "courtside/classify.hpp"
#include "courtside/model.hpp"
#include "courtside/query.hpp"
#include "courtside/stats.hpp"

namespace fixture {

using namespace courtside;

struct ShotSpec {
  ShotLabel label = ShotLabel::Normal;
  Zone from;
  Zone to;
  std::optional<Tendency> tendency;
};

struct RallySpec {
  PlayerId winner = PlayerId::A;
  std::vector<ShotSpec> shots;  // hitters alternate from the server
};

// Rallies of 150 frames at 30 fps separated by 50 frames; server is the
// previous winner. Shots are spaced 12 frames apart from start + 10.
inline MatchBundle make_bundle(const std::vector<RallySpec>& specs, double fps = 30.0) {
  MatchBundle b;
  b.manifest.fps = fps;
  b.manifest.player_a = "Alpha";
  b.manifest.player_b = "Bravo";
  b.manifest.video_uri = "match.mp4";
  b.manifest.negative_y_start = PlayerId::A;
  b.canonical = true;
  std::vector<RallyRecord> recs;
  Frame cursor = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    RallyRecord r;
    r.rally_id = static_cast<int>(i) + 1;
    r.start_frame = cursor;
    r.end_frame = cursor + 150;
    r.winner = specs[i].winner;
    r.server = recs.empty() ? PlayerId::A : recs.back().winner;
    recs.push_back(r);
    cursor += 200;
  }
  const auto d = derive_games(recs);
  int next_id = 1;
  for (const auto& gs : d.games) {
    Game g;
    g.number = gs.number;
    g.score = gs.score;
    g.finished = gs.finished;
    g.winner = gs.winner;
    std::optional<std::size_t> hb;
    try {
      hb = half_boundary(gs);
    } catch (...) {
    }
    for (std::size_t k = 0; k < gs.rally_count(); ++k) {
      const auto& rec = recs[gs.first_rally + k];
      if (hb && *hb == k) g.half_boundary_rally = rec.rally_id;
      Rally r;
      r.record = rec;
      r.score_after = gs.scores[k];
      r.second_half = hb && k > *hb;
      const auto& spec = specs[gs.first_rally + k];
      bool labeled = false;
      for (std::size_t s = 0; s < spec.shots.size(); ++s) {
        ClassifiedShot cs;
        cs.shot_id = next_id++;
        cs.record.rally_id = rec.rally_id;
        cs.record.shot_index = static_cast<int>(s);
        cs.record.hit_frame = rec.start_frame + 10 + 12 * static_cast<Frame>(s);
        cs.record.hitter = s % 2 == 0 ? rec.server : opponent(rec.server);
        cs.label = spec.shots[s].label;
        cs.tendency = spec.shots[s].tendency;
        cs.from_zone = spec.shots[s].from;
        cs.to_zone = spec.shots[s].to;
        if (cs.tendency) {
          const double vz = *cs.tendency == Tendency::Defensive ? 2.0 : -2.0;
          const double dir = cs.record.hitter == PlayerId::A ? 1.0 : -1.0;
          cs.net = NetCrossing{static_cast<double>(cs.record.hit_frame) / fps + 0.2, {0, 0, 2.0}, {0, 15 * dir, vz}};
        }
        labeled = labeled || cs.label != ShotLabel::Normal;
        r.shots.push_back(cs);
      }
      r.degenerate = !labeled;
      g.rallies.push_back(std::move(r));
    }
    b.games.push_back(std::move(g));
  }
  b.summary = summarize(b);
  b.summary.match_winner = d.match_winner;
  return b;
}

// Winners drawn at random until the match is decided or `rallies` run out.
// Shot counts 1..14, random tendencies, labels from the outcome rule, zones
// in the hitter's half (from) and the opponent's (to).
inline MatchBundle random_bundle(std::uint64_t seed, int rallies = 60) {
  std::mt19937_64 rng(seed);
  std::vector<RallySpec> specs;
  std::vector<RallyRecord> recs;
  PlayerId server = PlayerId::A;
  for (int i = 0; i < rallies; ++i) {
    RallyRecord r;
    r.rally_id = i + 1;
    r.winner = rng() % 2 ? PlayerId::A : PlayerId::B;
    recs.push_back(r);
    bool over = false;
    try {
      over = derive_games(recs).match_winner.has_value();
    } catch (...) {
      recs.pop_back();
      break;
    }
    RallySpec spec{r.winner, {}};
    const int n = 1 + static_cast<int>(rng() % 14);
    std::vector<RallyShot> rs;
    for (int k = 0; k < n; ++k) {
      const PlayerId hitter = k % 2 == 0 ? server : opponent(server);
      ShotSpec sh;
      sh.tendency = rng() % 5 == 0 && k + 1 == n ? std::nullopt
                                                 : std::optional<Tendency>(rng() % 2 ? Tendency::Offensive
                                                                                     : Tendency::Defensive);
      sh.from = Zone::from_index(index_of(hitter) * 6 + static_cast<int>(rng() % 6));
      sh.to = Zone::from_index(index_of(opponent(hitter)) * 6 + static_cast<int>(rng() % 6));
      spec.shots.push_back(sh);
      rs.push_back({hitter, sh.tendency});
    }
    const auto labels = label_rally(rs, r.winner);
    for (int k = 0; k < n; ++k) spec.shots[k].label = labels.labels[k];
    specs.push_back(spec);
    server = r.winner;
    if (over) break;
  }
  return make_bundle(specs);
}

inline ShotFilter random_filter(std::mt19937_64& rng) {
  ShotFilter f;
  auto coin = [&](int p) { return static_cast<int>(rng() % 100) < p; };
  auto player = [&] { return rng() % 2 ? PlayerId::A : PlayerId::B; };
  if (coin(50)) f.game = 1 + static_cast<int>(rng() % 3);
  if (f.game && coin(40)) f.half = rng() % 2 ? Half::First : Half::Second;
  if (coin(40)) f.scorer = player();
  if (coin(50)) f.role = rng() % 2 ? Role::Winners : Role::Errors;
  if (coin(40)) f.hitter = player();
  auto zones = [&] {
    std::vector<Zone> z;
    const int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) z.push_back(Zone::from_index(static_cast<int>(rng() % 12)));
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    return z;
  };
  if (coin(30)) f.from_zones = zones();
  if (coin(30)) f.to_zones = zones();
  return f;
}

}  // namespace fixture
