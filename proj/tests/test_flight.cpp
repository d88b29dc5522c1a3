#include "doctest.h"

#include <cmath>
#include <random>

#include "courtside/error.hpp"
#include "courtside/flight.hpp"
#include "courtside/synth.hpp"

using namespace courtside;

namespace {

std::vector<TrackSample> track_of(const CameraModel& cam, const std::vector<TrajectorySample>& traj, Frame first,
                                  double noise, std::mt19937_64* rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<TrackSample> out;
  for (std::size_t i = 0; i < traj.size(); i += 4) {
    if (traj[i].p.z <= 0) break;
    const auto px = project(cam, traj[i].p);
    TrackSample s{first + static_cast<Frame>(i / 4), px.u, px.v, true};
    if (rng) {
      s.u += noise * n(*rng);
      s.v += noise * n(*rng);
    }
    out.push_back(s);
  }
  return out;
}

double mech_energy(const TrajectorySample& s) { return 0.5 * s.v.norm() * s.v.norm() + kGravity * s.p.z; }

}  // namespace

TEST_CASE("drag-free limit matches the analytic parabola") {
  FlightParams p;
  p.p0 = {0, 0, 1};
  p.v0 = {0, 10, 10};
  p.vt = 1e9;
  const auto traj = simulate(p, 1e-3, 2.5);
  double worst = 0;
  for (const auto& s : traj) {
    const double t = s.t;
    worst = std::max(worst, std::abs(s.p.z - (1 + 10 * t - 0.5 * kGravity * t * t)));
    worst = std::max(worst, std::abs(s.p.y - 10 * t));
  }
  CHECK(worst < 1e-6);
  CHECK(traj.back().p.z <= 0.0);
  CHECK(traj[traj.size() - 2].p.z > 0.0);
}

TEST_CASE("vertical drop approaches terminal speed from below, monotonically") {
  FlightParams p;
  p.p0 = {0, 0, 3.0};
  p.vt = 6.8;
  const auto traj = simulate(p, 1e-3, 6.0, {.stop_at_ground = false});
  double prev = 0;
  for (const auto& s : traj) {
    const double sp = s.v.norm();
    CHECK(sp >= prev);
    CHECK(sp <= 6.8);
    prev = sp;
  }
  CHECK(prev == doctest::Approx(6.8).epsilon(1e-4));
}

TEST_CASE("horizontal speed decays and energy never grows") {
  FlightParams p;
  p.p0 = {0, -5, 1.5};
  p.v0 = {0, 30, 5};
  const auto traj = simulate(p, 1.0 / 120, 3.0);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    CHECK(std::hypot(traj[i].v.x, traj[i].v.y) < std::hypot(traj[i - 1].v.x, traj[i - 1].v.y));
    CHECK(mech_energy(traj[i]) <= mech_energy(traj[i - 1]) + 1e-12);
  }
}

TEST_CASE("RK4 error falls by at least 8x when dt halves") {
  // Drag-limited free fall: v = vT tanh(g t / vT), z = z0 - vT^2/g ln cosh(g t / vT).
  const double vt = 6.8, z0 = 3.0, T = 0.6;
  auto err = [&](double dt) {
    FlightParams p;
    p.p0 = {0, 0, z0};
    p.vt = vt;
    const auto traj = simulate(p, dt, T, {.stop_at_ground = false});
    const double t = traj.back().t;
    const double z = z0 - vt * vt / kGravity * std::log(std::cosh(kGravity * t / vt));
    return std::abs(traj.back().p.z - z);
  };
  const double e1 = err(0.04), e2 = err(0.02), e3 = err(0.01);
  CHECK(e1 / e2 >= 8.0);
  CHECK(e2 / e3 >= 8.0);
}

TEST_CASE("simulate rejects non-physical input") {
  FlightParams p;
  p.p0 = {0, 0, 1};
  p.v0 = {0, 10, 0};
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  CHECK(code([&] { simulate(p, 0.0, 1.0); }) == "NonPhysicalParams");
  auto q = p;
  q.vt = -1;
  CHECK(code([&] { simulate(q, 0.01, 1.0); }) == "NonPhysicalParams");
  q = p;
  q.p0.z = 5.0;
  CHECK(code([&] { simulate(q, 0.01, 1.0); }) == "NonPhysicalParams");
  q = p;
  q.v0 = {0, 200, 0};
  CHECK(code([&] { simulate(q, 0.01, 1.0); }) == "NonPhysicalParams");
}

TEST_CASE("shot_speed") {
  FlightParams p;
  p.v0 = {3, 4, 0};
  CHECK(shot_speed(p) == 5.0);
  p.v0 = {0, 0, 0};
  CHECK(shot_speed(p) == 0.0);
}

TEST_CASE("noiseless fit recovers the initial speed within 1%") {
  const auto cam = broadcast_camera();
  const double fps = 30;
  FlightParams truth;
  truth.p0 = {0.5, -4.0, 2.4};
  const double e = -10.0 * M_PI / 180.0;
  truth.v0 = {0.0, 30 * std::cos(e), 30 * std::sin(e)};
  const auto traj = simulate(truth, 1 / (4 * fps), 3.0);
  const auto track = track_of(cam, traj, 100, 0.0, nullptr);
  REQUIRE(track.size() >= 8);
  FitOptions opt;
  opt.hitter_position = CourtPoint{0.5, -4.0, 0.0};
  FitDiagnostics diag;
  const auto fit = fit_shot(cam, track, fps, 100, track.back().frame, opt, &diag);
  INFO(fit.params.p0.x, " ", fit.params.p0.y, " ", fit.params.p0.z, " v ", fit.params.v0.x, " ", fit.params.v0.y, " ",
       fit.params.v0.z, " vt ", fit.params.vt, " conv ", fit.converged, " it ", fit.iterations, " n ", fit.n_obs);
  CHECK(std::abs(shot_speed(fit.params) - 30.0) / 30.0 < 0.01);
  CHECK(fit.rmse_px < 1e-3);
  CHECK(fit.params.t0 == doctest::Approx(100 / fps));
  for (double c : diag.start_costs) CHECK(diag.final_cost <= c);
}

TEST_CASE("fit never returns worse than any start, under noise") {
  const auto cam = broadcast_camera();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    const auto trial = make_recovery_trial(rng, cam, 30, 1.0);
    FitDiagnostics diag;
    fit_shot(cam, trial.track, 30, trial.hit_frame, trial.end_frame, {}, &diag);
    REQUIRE(diag.start_costs.size() == 4);
    for (double c : diag.start_costs) CHECK(diag.final_cost <= c);
  }
}

TEST_CASE("five observations are too few") {
  const auto cam = broadcast_camera();
  FlightParams p;
  p.p0 = {0, -3, 1.5};
  p.v0 = {0, 15, 8};
  auto track = track_of(cam, simulate(p, 1 / 120.0, 3.0), 0, 0, nullptr);
  track.resize(5);
  try {
    fit_shot(cam, track, 30, 0, 100);
    FAIL("expected TooFewObservations");
  } catch (const Error& e) {
    CHECK(e.code() == "TooFewObservations");
  }
}

TEST_CASE("fitter Jacobian matches an independent central difference") {
  const auto cam = broadcast_camera();
  std::mt19937_64 rng(9);
  const auto trial = make_recovery_trial(rng, cam, 30, 1.0);
  const auto obs = observations_in(trial.track, trial.hit_frame, trial.end_frame);
  const auto model = make_residual_model(cam, obs, 30, trial.hit_frame);
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  for (int k = 0; k < 5; ++k) {
    std::array<double, 7> x{trial.truth.p0.x, trial.truth.p0.y, trial.truth.p0.z, trial.truth.v0.x,
                            trial.truth.v0.y, trial.truth.v0.z, trial.truth.vt};
    for (auto& e : x) e *= 1.0 + jitter(rng);
    const auto J = model.jacobian(x);
    for (int j = 0; j < 7; ++j) {
      // Richardson-extrapolated central difference with a different step.
      auto col = [&](double h) {
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const auto rp = model.residual(xp), rm = model.residual(xm);
        std::vector<double> c(rp.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = (rp[i] - rm[i]) / (2 * h);
        return c;
      };
      const double h = 1e-4 * std::max(1.0, std::abs(x[j]));
      const auto c1 = col(h), c2 = col(h / 2);
      double num = 0, den = 0;
      for (std::size_t i = 0; i < c1.size(); ++i) {
        const double ref = (4 * c2[i] - c1[i]) / 3;
        num += (J[j][i] - ref) * (J[j][i] - ref);
        den += ref * ref;
      }
      CHECK(std::sqrt(num) <= 1e-4 * std::sqrt(den) + 1e-9);
    }
  }
}

TEST_CASE("parallel batch fitting equals the serial reference") {
  const auto cam = broadcast_camera();
  std::mt19937_64 rng(21);
  std::vector<TrackSample> track;
  std::vector<ShotFitJob> jobs;
  Frame offset = 0;
  for (int i = 0; i < 6; ++i) {
    auto t = make_recovery_trial(rng, cam, 30, 1.0);
    for (auto s : t.track) {
      s.frame += offset;
      track.push_back(s);
    }
    jobs.push_back({offset, offset + t.end_frame, std::nullopt});
    offset += t.end_frame + 10;
  }
  jobs.push_back({offset + 100, offset + 200, std::nullopt});  // no observations
  const auto serial = fit_shots_serial(cam, track, 30, jobs);
  const auto parallel = fit_shots_parallel(cam, track, 30, jobs, {}, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].error_code == parallel[i].error_code);
    REQUIRE(serial[i].fit.has_value() == parallel[i].fit.has_value());
    if (!serial[i].fit) continue;
    const auto& a = serial[i].fit->params;
    const auto& b = parallel[i].fit->params;
    CHECK(a.p0 == b.p0);
    CHECK(a.v0 == b.v0);
    CHECK(a.vt == b.vt);
  }
  CHECK(serial.back().error_code == "TooFewObservations");
}

TEST_CASE("net_crossing interpolates between straddling samples") {
  std::vector<TrajectorySample> s{{0.0, {0, -1, 2}, {0, 2, 1}}, {1.0, {0, 1, 3}, {0, 2, 5}}};
  const auto c = net_crossing(s);
  REQUIRE(c);
  CHECK(c->t == doctest::Approx(0.5));
  CHECK(c->p.y == doctest::Approx(0.0));
  CHECK(c->p.z == doctest::Approx(2.5));
  CHECK(c->v.z == doctest::Approx(3.0));

  std::vector<TrajectorySample> one_half{{0.0, {0, -3, 2}, {}}, {1.0, {0, -1, 2}, {}}};
  CHECK_FALSE(net_crossing(one_half));

  std::vector<TrajectorySample> exact{{0.0, {0, -1, 2}, {}}, {0.5, {0, 0, 2.2}, {0, 1, -1}}, {1.0, {0, 1, 2}, {}}};
  const auto e = net_crossing(exact);
  REQUIRE(e);
  CHECK(e->t == 0.5);
  CHECK(e->v.z == -1.0);
}

TEST_CASE("segment_hits with provided hits passes them through") {
  const auto cam = broadcast_camera();
  std::vector<TrackSample> track;
  for (Frame f = 100; f <= 200; ++f) track.push_back({f, 900.0, 500.0 + f, true});
  const auto hits = segment_hits(track, cam, 30, std::vector<Frame>{120, 155, 190});
  CHECK(hits == std::vector<Frame>{120, 155, 190});
  track[20].visible = false;  // frame 120
  const auto snapped = segment_hits(track, cam, 30, std::vector<Frame>{120});
  CHECK(std::abs(snapped[0] - 120) == 1);
}

TEST_CASE("segment_hits finds the hits of a synthetic 3-shot rally") {
  SynthOptions opt;
  opt.seed = 4;
  opt.rallies = 20;
  opt.occlusion = 0.0;
  const auto m = synthesize(opt);
  int checked = 0;
  for (const auto& r : m.rallies) {
    std::vector<Frame> truth;
    for (const auto& s : m.shots)
      if (s.rally_id == r.rally_id) truth.push_back(s.hit_frame);
    if (truth.size() < 4) continue;
    const Frame end = truth[3] - 1;
    truth.resize(3);
    std::vector<TrackSample> track;
    for (const auto& s : m.track)
      if (s.frame >= r.start_frame && s.frame <= end) track.push_back(s);
    const auto hits = segment_hits(track, m.camera, opt.fps);
    REQUIRE(hits.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(hits[i] - truth[i]) <= 2);
    if (++checked == 5) break;
  }
  CHECK(checked == 5);
}

TEST_CASE("monotone track has no hits") {
  const auto cam = broadcast_camera();
  FlightParams p;
  p.p0 = {0, -5, 2};
  p.v0 = {0, 20, 6};
  const auto track = track_of(cam, simulate(p, 1 / 120.0, 3.0), 0, 0, nullptr);
  // A single flight has an onset but no reversal.
  try {
    segment_hits(track, cam, 30);
    FAIL("expected NoHitsDetected");
  } catch (const Error& e) {
    CHECK(e.code() == "NoHitsDetected");
  }
}
