#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "courtside/error.hpp"
#include "courtside/query.hpp"
#include "fixture.hpp"

using namespace courtside;

namespace {

constexpr auto A = PlayerId::A;
constexpr auto B = PlayerId::B;

std::set<int> ids(const std::vector<const ClassifiedShot*>& v) {
  std::set<int> out;
  for (const auto* s : v) out.insert(s->shot_id);
  return out;
}

// A won 17 rallies: 9 by A's winners, 8 by B's errors. B won 5.
MatchBundle seventeen() {
  using fixture::RallySpec;
  using fixture::ShotSpec;
  const Zone za{Side::Right, Depth::Back, A};
  const Zone zb{Side::Left, Depth::Middle, B};
  std::vector<RallySpec> specs;
  auto rally = [&](PlayerId winner, int n, bool by_winner) {
    // Server is the previous winner; choose n so the last hitter fits.
    RallySpec r{winner, {}};
    for (int i = 0; i < n; ++i) r.shots.push_back({ShotLabel::Normal, za, zb, Tendency::Defensive});
    r.shots.back().tendency = Tendency::Offensive;
    r.shots.back().label = by_winner ? ShotLabel::Winner : ShotLabel::Error;
    return r;
  };
  // Server A throughout A's run: odd counts end on A, even counts on B.
  for (int i = 0; i < 9; ++i) specs.push_back(rally(A, i % 2 ? 13 : 3, true));
  for (int i = 0; i < 8; ++i) specs.push_back(rally(A, i % 2 ? 12 : 4, false));
  // B wins 5: first served by A, then by B.
  specs.push_back(rally(B, 2, true));
  for (int i = 0; i < 4; ++i) specs.push_back(rally(B, 1, true));
  return fixture::make_bundle(specs);
}

}  // namespace

TEST_CASE("winners of the scorer") {
  const auto b = seventeen();
  ShotFilter f;
  f.scorer = A;
  CHECK(summarize(b).rallies_won[0] == 17);
  f.role = Role::Winners;
  const auto w = filter_shots(b, f);
  CHECK(w.size() == 9);
  for (const auto* s : w) CHECK(s->record.hitter == A);
  f.role = Role::Errors;
  const auto e = filter_shots(b, f);
  CHECK(e.size() == 8);
  for (const auto* s : e) CHECK(s->record.hitter == B);
}

TEST_CASE("empty filter selects every shot") {
  const auto b = fixture::random_bundle(5);
  std::size_t total = 0;
  for (const auto& g : b.games)
    for (const auto& r : g.rallies) total += r.shots.size();
  CHECK(filter_shots(b, {}).size() == total);
}

TEST_CASE("winners plus opponent errors equal points won") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto b = fixture::random_bundle(seed);
    for (PlayerId p : {A, B}) {
      ShotFilter w;
      w.role = Role::Winners;
      w.hitter = p;
      ShotFilter e;
      e.role = Role::Errors;
      e.hitter = opponent(p);
      int won = 0;
      for (const auto& g : b.games)
        for (const auto& r : g.rallies) won += r.record.winner == p && !r.degenerate;
      CHECK(filter_shots(b, w).size() + filter_shots(b, e).size() == static_cast<std::size_t>(won));
    }
  }
}

TEST_CASE("rally menu short rallies") {
  using fixture::RallySpec;
  const Zone za{Side::Right, Depth::Back, A};
  const Zone zb{Side::Left, Depth::Middle, B};
  std::vector<RallySpec> specs;
  // Nine rallies won by A with winners; counts 3,5,7,9 are short.
  for (int n : {3, 5, 7, 9, 11, 13, 15, 17, 19}) {
    RallySpec r{A, {}};
    for (int i = 0; i < n; ++i) r.shots.push_back({ShotLabel::Normal, za, zb, Tendency::Defensive});
    r.shots.back() = {ShotLabel::Winner, za, zb, Tendency::Offensive};
    specs.push_back(r);
  }
  const auto b = fixture::make_bundle(specs);
  ShotFilter f;
  f.role = Role::Winners;
  const auto menu = rally_menu(b, f);
  REQUIRE(menu.size() == 9);
  CHECK(std::count_if(menu.begin(), menu.end(), [](const auto& m) { return m.is_short; }) == 4);
  for (std::size_t i = 1; i < menu.size(); ++i) CHECK(menu[i - 1].rally_id < menu[i].rally_id);

  f.role = Role::Errors;
  CHECK(rally_menu(b, f).empty());
}

TEST_CASE("menu agrees with filter_shots") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto b = fixture::random_bundle(rng() % 1000);
    const auto f = fixture::random_filter(rng);
    const auto shots = ids(filter_shots(b, f));
    std::size_t matched = 0;
    for (const auto& item : rally_menu(b, f)) {
      for (int id : item.matched_shot_ids) CHECK(shots.count(id) == 1);
      matched += item.matched_shot_ids.size();
      if (!f.rally_scoped()) CHECK_FALSE(item.matched_shot_ids.empty());
    }
    CHECK(matched == shots.size());
  }
}

TEST_CASE("adding a constraint never enlarges the result") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto b = fixture::random_bundle(rng() % 1000);
    const auto f = fixture::random_filter(rng);
    const auto base = ids(filter_shots(b, f));
    auto g = fixture::random_filter(rng);
    // Tighten f with one field from g.
    ShotFilter t = f;
    // Only fields f leaves open, so t is strictly tighter.
    switch (rng() % 5) {
      case 0:
        if (!t.scorer) t.scorer = g.scorer.value_or(A);
        break;
      case 1:
        if (!t.hitter) t.hitter = g.hitter.value_or(B);
        break;
      case 2:
        if (t.role == Role::All) t.role = g.role == Role::All ? Role::Winners : g.role;
        break;
      case 3:
        if (!t.game) t.game = 1;
        if (!t.half) t.half = Half::Second;
        break;
      default:
        if (t.from_zones.empty()) {
          t.from_zones = {Zone::from_index(static_cast<int>(rng() % 12))};
        } else {
          t.from_zones.resize(1);
        }
        break;
    }
    const auto narrow = ids(filter_shots(b, t));
    CHECK(std::includes(base.begin(), base.end(), narrow.begin(), narrow.end()));
  }
}

TEST_CASE("a filter equals the intersection of its single-field parts") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const auto b = fixture::random_bundle(rng() % 1000);
    const auto f = fixture::random_filter(rng);
    std::vector<ShotFilter> parts;
    ShotFilter p;
    p.game = f.game;
    p.half = f.half;
    parts.push_back(p);
    p = {};
    p.scorer = f.scorer;
    parts.push_back(p);
    p = {};
    p.role = f.role;
    parts.push_back(p);
    p = {};
    p.hitter = f.hitter;
    parts.push_back(p);
    p = {};
    p.from_zones = f.from_zones;
    parts.push_back(p);
    p = {};
    p.to_zones = f.to_zones;
    parts.push_back(p);
    std::shuffle(parts.begin(), parts.end(), rng);
    auto acc = ids(filter_shots(b, parts[0]));
    for (std::size_t k = 1; k < parts.size(); ++k) {
      const auto next = ids(filter_shots(b, parts[k]));
      std::set<int> both;
      std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(), std::inserter(both, both.end()));
      acc = both;
    }
    CHECK(acc == ids(filter_shots(b, f)));
  }
}

TEST_CASE("filter validation and parsing") {
  ShotFilter bad;
  bad.half = Half::First;
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  CHECK(code([&] { check_filter(bad); }) == "InvalidFilter");
  CHECK(code([&] { filter_shots(fixture::random_bundle(1), bad); }) == "InvalidFilter");
  bad = {};
  bad.game = 0;
  CHECK(code([&] { check_filter(bad); }) == "InvalidFilter");

  std::map<std::string, std::string, std::less<>> q{{"game", "2"},
                                                    {"half", "second"},
                                                    {"scorer", "A"},
                                                    {"role", "winners"},
                                                    {"hitter", "B"},
                                                    {"from_zone", "B.back.left,A.front.right,A.front.right"}};
  auto get = [&](std::string_view k) -> std::optional<std::string> {
    const auto it = q.find(k);
    if (it == q.end()) return std::nullopt;
    return it->second;
  };
  const auto f = parse_filter(get);
  CHECK(f.game == 2);
  CHECK(f.half == Half::Second);
  CHECK(f.scorer == A);
  CHECK(f.role == Role::Winners);
  CHECK(f.hitter == B);
  REQUIRE(f.from_zones.size() == 2);
  CHECK(f.from_zones[0] == Zone{Side::Right, Depth::Front, A});
  CHECK(f.to_zones.empty());

  const auto fields = filter_fields(f);
  std::map<std::string, std::string, std::less<>> back(fields.begin(), fields.end());
  auto get2 = [&](std::string_view k) -> std::optional<std::string> {
    const auto it = back.find(k);
    if (it == back.end()) return std::nullopt;
    return it->second;
  };
  const auto f2 = parse_filter(get2);
  CHECK(filter_fields(f2) == fields);

  q["role"] = "smashes";
  CHECK(code([&] { parse_filter(get); }) == "InvalidFilter");
  q["role"] = "all";
  q["game"] = "two";
  CHECK(code([&] { parse_filter(get); }) == "InvalidFilter");
  q["game"] = "2";
  q["to_zone"] = "C.back.left";
  CHECK(code([&] { parse_filter(get); }) == "InvalidFilter");
}

TEST_CASE("shot context clip") {
  auto b = seventeen();
  auto& r = b.games[0].rallies[0];
  r.record.start_frame = 250;
  r.record.end_frame = 450;
  r.shots[0].record.hit_frame = 300;
  r.shots[1].record.hit_frame = 360;
  r.shots[2].record.hit_frame = 420;
  const auto c = shot_context(b, r.shots[0].shot_id);
  CHECK(c.clip_start == doctest::Approx(9.5));
  CHECK(c.clip_end == doctest::Approx(12.5));
  CHECK(c.rally_id == r.record.rally_id);
  CHECK_FALSE(c.previous_shot_id);
  CHECK(c.next_shot_id == r.shots[1].shot_id);
  REQUIRE(c.shot);
  CHECK(c.shot->shot_id == r.shots[0].shot_id);

  const auto last = shot_context(b, r.shots[2].shot_id);
  CHECK(last.clip_end == doctest::Approx(450.0 / 30.0));
  CHECK(last.previous_shot_id == r.shots[1].shot_id);

  // Pre-roll clamps to the rally start.
  r.shots[0].record.hit_frame = 255;
  CHECK(shot_context(b, r.shots[0].shot_id).clip_start == doctest::Approx(250.0 / 30.0));

  try {
    shot_context(b, 99999);
    FAIL("expected UnknownShot");
  } catch (const Error& e) {
    CHECK(e.code() == "UnknownShot");
  }
}
