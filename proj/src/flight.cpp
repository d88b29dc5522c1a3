#include "courtside/flight.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "courtside/court.hpp"
#include "courtside/error.hpp"
#include "courtside/lm.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace courtside {

namespace {

constexpr double kSeedHeight = 1.8;
constexpr double kElevationSeedsDeg[] = {-20.0, 0.0, 20.0, 45.0};
// Residual assigned to observations the model puts behind the camera.
constexpr double kBehindPenalty = 1e4;

inline Velocity accel(const Velocity& v, double k) {
  const double s = v.norm();
  return {-k * s * v.x, -k * s * v.y, -kGravity - k * s * v.z};
}

FlightParams unpack(const std::array<double, 7>& x) {
  FlightParams p;
  p.p0 = {x[0], x[1], x[2]};
  p.v0 = {x[3], x[4], x[5]};
  p.vt = x[6];
  return p;
}

std::array<double, 7> pack(const FlightParams& p) {
  return {p.p0.x, p.p0.y, p.p0.z, p.v0.x, p.v0.y, p.v0.z, p.vt};
}

void clamp_params(std::array<double, 7>& x, const FlightLimits& lim) {
  x[2] = std::clamp(x[2], lim.min_hit_height, lim.max_hit_height);
  const double s = std::sqrt(x[3] * x[3] + x[4] * x[4] + x[5] * x[5]);
  if (s > lim.max_speed) {
    const double f = lim.max_speed / s;
    x[3] *= f;
    x[4] *= f;
    x[5] *= f;
  }
  x[6] = std::clamp(x[6], lim.min_vt, lim.max_vt);
}

Eigen::VectorXd to_eigen(const std::array<double, 7>& x) { return Eigen::Map<const Eigen::VectorXd>(x.data(), 7); }

std::array<double, 7> from_eigen(const Eigen::VectorXd& v) {
  std::array<double, 7> x{};
  for (int i = 0; i < 7; ++i) x[i] = v(i);
  return x;
}

}  // namespace

void rk4_step(CourtPoint& p, Velocity& v, double vt, double dt) {
  const double k = kGravity / (vt * vt);
  const Velocity a1 = accel(v, k);
  const Velocity v2 = v + (0.5 * dt) * a1;
  const Velocity a2 = accel(v2, k);
  const Velocity v3 = v + (0.5 * dt) * a2;
  const Velocity a3 = accel(v3, k);
  const Velocity v4 = v + dt * a3;
  const Velocity a4 = accel(v4, k);
  p = p + (dt / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
  v = v + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
}

std::vector<TrajectorySample> simulate(const FlightParams& params, double dt, double t_end,
                                       const SimulateOptions& opt, const FlightLimits& limits) {
  if (!(dt > 0) || !std::isfinite(dt)) throw Error("NonPhysicalParams", "dt must be positive");
  if (!(params.vt > 0)) throw Error("NonPhysicalParams", "terminal velocity must be positive");
  if (!(params.p0.z >= limits.min_hit_height && params.p0.z <= limits.max_hit_height)) {
    throw Error("NonPhysicalParams", "hit height outside plausible range");
  }
  if (!(params.v0.norm() <= limits.max_speed * (1.0 + 1e-12))) {
    throw Error("NonPhysicalParams", "initial speed above plausible maximum");
  }
  std::vector<TrajectorySample> out;
  CourtPoint p = params.p0;
  Velocity v = params.v0;
  out.push_back({params.t0, p, v});
  const auto steps = static_cast<long>(std::floor(t_end / dt + 1e-9));
  for (long i = 1; i <= steps; ++i) {
    rk4_step(p, v, params.vt, dt);
    out.push_back({params.t0 + static_cast<double>(i) * dt, p, v});
    if (opt.stop_at_ground && p.z <= 0.0) break;
  }
  return out;
}

std::vector<TrackSample> observations_in(std::span<const TrackSample> track, Frame first, Frame last) {
  std::vector<TrackSample> out;
  for (const auto& s : track) {
    if (s.visible && s.frame >= first && s.frame <= last) out.push_back(s);
  }
  return out;
}

ShotResidualModel make_residual_model(const CameraModel& cam, std::span<const TrackSample> obs, double fps,
                                      Frame hit_frame) {
  ShotResidualModel m;
  m.cam = &cam;
  m.dt = 1.0 / (4.0 * fps);
  for (const auto& s : obs) {
    m.steps.push_back(static_cast<int>(4 * (s.frame - hit_frame)));
    m.pixels.push_back({s.u, s.v});
  }
  return m;
}

std::vector<double> ShotResidualModel::residual(const std::array<double, 7>& x) const {
  std::vector<double> r(2 * steps.size());
  CourtPoint p{x[0], x[1], x[2]};
  Velocity v{x[3], x[4], x[5]};
  const double vt = x[6];
  int at = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    while (at < steps[i]) {
      rk4_step(p, v, vt, dt);
      ++at;
    }
    const double w = depth_of(*cam, p);
    if (w > 0 && std::isfinite(w)) {
      const auto px = project(*cam, p);
      r[2 * i] = px.u - pixels[i].u;
      r[2 * i + 1] = px.v - pixels[i].v;
    } else {
      r[2 * i] = kBehindPenalty;
      r[2 * i + 1] = kBehindPenalty;
    }
  }
  return r;
}

std::vector<std::vector<double>> ShotResidualModel::jacobian(const std::array<double, 7>& x,
                                                             double rel_step) const {
  std::vector<std::vector<double>> cols(7);
  for (int j = 0; j < 7; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    auto xp = x;
    auto xm = x;
    xp[j] += h;
    xm[j] -= h;
    const auto rp = residual(xp);
    const auto rm = residual(xm);
    cols[j].resize(rp.size());
    for (std::size_t i = 0; i < rp.size(); ++i) cols[j][i] = (rp[i] - rm[i]) / (2.0 * h);
  }
  return cols;
}

namespace {

std::vector<FlightParams> seeds(const CameraModel& cam, std::span<const TrackSample> obs, double fps,
                                const FitOptions& opt) {
  std::optional<CourtPoint> start;
  if (opt.hitter_position) {
    start = CourtPoint{opt.hitter_position->x, opt.hitter_position->y, kSeedHeight};
  }
  if (!start) start = backproject_to_plane(cam, {obs.front().u, obs.front().v}, kSeedHeight);
  if (!start) start = CourtPoint{0.0, 0.0, kSeedHeight};

  // Horizontal velocity from the ground-mapped displacement of the first
  // three observations.
  Velocity horizontal{0.0, 0.0, 0.0};
  const std::size_t last = std::min<std::size_t>(2, obs.size() - 1);
  const auto q0 = backproject_to_plane(cam, {obs[0].u, obs[0].v}, 0.0);
  const auto q2 = backproject_to_plane(cam, {obs[last].u, obs[last].v}, 0.0);
  const double span_t = static_cast<double>(obs[last].frame - obs[0].frame) / fps;
  if (q0 && q2 && span_t > 0) {
    horizontal = {(q2->x - q0->x) / span_t, (q2->y - q0->y) / span_t, 0.0};
  }
  double h = std::hypot(horizontal.x, horizontal.y);
  if (!(h > 1e-3) || !std::isfinite(h)) {
    // No usable displacement: aim across the net at a moderate pace.
    horizontal = {0.0, start->y < 0 ? 10.0 : -10.0, 0.0};
    h = 10.0;
  }

  std::vector<FlightParams> out;
  for (double deg : kElevationSeedsDeg) {
    FlightParams p;
    p.p0 = *start;
    p.v0 = {horizontal.x, horizontal.y, h * std::tan(deg * std::numbers::pi / 180.0)};
    p.vt = 6.8;
    out.push_back(p);
  }
  return out;
}

}  // namespace

FitResult fit_shot(const CameraModel& cam, std::span<const TrackSample> track, double fps, Frame hit_frame,
                   Frame end_frame, const FitOptions& opt, FitDiagnostics* diag) {
  const auto obs = observations_in(track, hit_frame, end_frame);
  if (static_cast<int>(obs.size()) < opt.min_observations) {
    throw Error("TooFewObservations", "need " + std::to_string(opt.min_observations) +
                                          " visible samples, got " + std::to_string(obs.size()));
  }
  const ShotResidualModel model = make_residual_model(cam, obs, fps, hit_frame);
  const auto& limits = opt.limits;

  auto residual = [&](const Eigen::VectorXd& x) {
    const auto r = model.residual(from_eigen(x));
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
  };
  auto jacobian = [&](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    const auto cols = model.jacobian(from_eigen(x));
    Eigen::MatrixXd J(static_cast<Eigen::Index>(cols[0].size()), 7);
    for (int j = 0; j < 7; ++j) {
      J.col(j) = Eigen::Map<const Eigen::VectorXd>(cols[j].data(), static_cast<Eigen::Index>(cols[j].size()));
    }
    return J;
  };
  auto clamp = [&](Eigen::VectorXd& x) {
    auto a = from_eigen(x);
    clamp_params(a, limits);
    x = to_eigen(a);
  };

  lm::Options lm_opt;
  lm_opt.gradient_tol = opt.gradient_tol;
  lm_opt.step_tol = opt.step_tol;
  lm_opt.max_iterations = opt.max_iterations;

  lm::Result best;
  best.cost = std::numeric_limits<double>::infinity();
  if (diag) diag->start_costs.clear();
  for (const auto& seed : seeds(cam, obs, fps, opt)) {
    Eigen::VectorXd x0 = to_eigen(pack(seed));
    clamp(x0);
    if (diag) diag->start_costs.push_back(residual(x0).squaredNorm());
    auto res = lm::minimize(x0, residual, jacobian, clamp, lm_opt);
    if (res.cost < best.cost) best = std::move(res);
  }

  FitResult out;
  out.n_obs = static_cast<int>(obs.size());
  if (!std::isfinite(best.cost)) {
    out.converged = false;
    out.rmse_px = std::numeric_limits<double>::infinity();
    out.params.p0 = {0, 0, limits.min_hit_height};
    out.params.t0 = static_cast<double>(hit_frame) / fps;
    return out;
  }
  out.params = unpack(from_eigen(best.x));
  out.params.t0 = static_cast<double>(hit_frame) / fps;
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.rmse_px = std::sqrt(best.cost / static_cast<double>(obs.size()));
  if (diag) diag->final_cost = best.cost;
  return out;
}

namespace {

ShotFitOutcome run_job(const CameraModel& cam, std::span<const TrackSample> track, double fps,
                       const ShotFitJob& job, FitOptions opt) {
  ShotFitOutcome out;
  opt.hitter_position = job.hitter_position;
  try {
    out.fit = fit_shot(cam, track, fps, job.hit_frame, job.end_frame, opt);
  } catch (const Error& e) {
    out.error_code = e.code();
  }
  return out;
}

}  // namespace

std::vector<ShotFitOutcome> fit_shots_serial(const CameraModel& cam, std::span<const TrackSample> track,
                                             double fps, std::span<const ShotFitJob> jobs,
                                             const FitOptions& opt) {
  std::vector<ShotFitOutcome> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) out.push_back(run_job(cam, track, fps, job, opt));
  return out;
}

std::vector<ShotFitOutcome> fit_shots_parallel(const CameraModel& cam, std::span<const TrackSample> track,
                                               double fps, std::span<const ShotFitJob> jobs,
                                               const FitOptions& opt, int jobs_limit) {
  std::vector<ShotFitOutcome> out(jobs.size());
  const auto n = static_cast<long>(jobs.size());
#ifdef _OPENMP
  const int threads = jobs_limit > 0 ? jobs_limit : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = run_job(cam, track, fps, jobs[static_cast<std::size_t>(i)], opt);
  }
  (void)jobs_limit;
  return out;
}

std::vector<Frame> segment_hits(std::span<const TrackSample> track, const CameraModel& cam, double fps,
                                const std::optional<std::vector<Frame>>& provided, const SegmentOptions& opt) {
  std::vector<TrackSample> vis;
  for (const auto& s : track) {
    if (s.visible) vis.push_back(s);
  }
  if (vis.empty()) throw Error("NoHitsDetected", "track has no visible samples");

  if (provided) {
    if (provided->empty()) throw Error("NoHitsDetected", "no hits provided");
    std::vector<Frame> out;
    for (Frame f : *provided) {
      const auto it = std::min_element(vis.begin(), vis.end(), [f](const TrackSample& a, const TrackSample& b) {
        const auto da = std::abs(a.frame - f);
        const auto db = std::abs(b.frame - f);
        return da < db || (da == db && a.frame < b.frame);
      });
      out.push_back(it->frame);
    }
    return out;
  }

  const std::size_t n = vis.size();
  if (n < 3) throw Error("NoHitsDetected", "too few visible samples");

  // Per-interval velocities, attributed to the later sample: image space in
  // px/frame and ground-mapped Y in m/s.
  std::vector<double> du(n, 0.0), dv(n, 0.0), dy(n, 0.0);
  std::vector<std::optional<double>> gy(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (auto g = backproject_to_plane(cam, {vis[i].u, vis[i].v}, 0.0)) gy[i] = g->y;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double df = static_cast<double>(vis[i].frame - vis[i - 1].frame);
    du[i] = (vis[i].u - vis[i - 1].u) / df;
    dv[i] = (vis[i].v - vis[i - 1].v) / df;
    if (gy[i] && gy[i - 1]) dy[i] = (*gy[i] - *gy[i - 1]) * fps / df;
  }
  auto contiguous = [&](std::size_t first, std::size_t last) {
    for (std::size_t k = first + 1; k <= last; ++k) {
      if (vis[k].frame - vis[k - 1].frame > opt.max_frame_gap) return false;
    }
    return true;
  };
  auto mean = [](const std::vector<double>& x, std::size_t first, std::size_t last) {
    double sum = 0.0;
    for (std::size_t k = first; k <= last; ++k) sum += x[k];
    return sum / static_cast<double>(last - first + 1);
  };

  // Sample i is a hit when the flight is cut there: the image velocity jumps
  // by much more than it drifts over the neighbouring samples. Optionally the
  // ground-mapped Y velocity must turn around as well.
  struct Candidate {
    Frame frame;
    double jump;
  };
  std::vector<Candidate> found;
  for (std::size_t i = 3; i + 4 < n; ++i) {
    if (!contiguous(i - 3, i + 4)) continue;
    const double iu = mean(du, i - 1, i), iv = mean(dv, i - 1, i);
    const double ou = mean(du, i + 1, i + 2), ov = mean(dv, i + 1, i + 2);
    const double jump = std::hypot(ou - iu, ov - iv);
    if (jump < opt.min_jump_px) continue;
    const double before = std::hypot(iu - mean(du, i - 3, i - 2), iv - mean(dv, i - 3, i - 2));
    const double after = std::hypot(mean(du, i + 3, i + 4) - ou, mean(dv, i + 3, i + 4) - ov);
    if (jump < opt.min_sharpness * std::max({before, after, 1.0})) continue;
    if (opt.min_reversal_speed > 0) {
      bool mapped = true;
      for (std::size_t k = i - 2; k <= i + 2; ++k) mapped = mapped && gy[k].has_value();
      if (!mapped) continue;
      const double yin = mean(dy, i - 1, i), yout = mean(dy, i + 1, i + 2);
      if ((yin > 0) == (yout > 0) || std::abs(yout - yin) < opt.min_reversal_speed) continue;
    }
    if (!found.empty() && vis[i].frame - found.back().frame < opt.min_gap) {
      if (jump > found.back().jump) found.back() = {vis[i].frame, jump};
      continue;
    }
    found.push_back({vis[i].frame, jump});
  }
  std::vector<Frame> hits;
  for (const auto& c : found) hits.push_back(c.frame);
  if (hits.empty()) throw Error("NoHitsDetected", "no velocity reversal in the track");

  // Motion onset is the opening hit.
  const Frame onset = vis.front().frame;
  if (hits.front() - onset >= opt.min_gap) hits.insert(hits.begin(), onset);
  return hits;
}

std::optional<NetCrossing> net_crossing(std::span<const TrajectorySample> samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.p.y == 0.0) return NetCrossing{s.t, s.p, s.v};
    if (i == 0) continue;
    const auto& prev = samples[i - 1];
    if ((prev.p.y < 0.0) != (s.p.y < 0.0)) {
      const double f = prev.p.y / (prev.p.y - s.p.y);
      NetCrossing c;
      c.t = prev.t + f * (s.t - prev.t);
      c.p = prev.p + f * (s.p - prev.p);
      c.p.y = 0.0;
      c.v = prev.v + f * (s.v - prev.v);
      return c;
    }
  }
  return std::nullopt;
}

}  // namespace courtside
