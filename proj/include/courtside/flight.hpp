// Shuttlecock flight: drag-model integration, monocular trajectory fitting,
// hit segmentation and net-crossing extraction.
//
// Flight model: dv/dt = -g z_hat - (g / vT^2) |v| v,  dp/dt = v.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtside/model.hpp"

namespace courtside {

struct TrackSample {
  Frame frame = 0;
  double u = 0.0;
  double v = 0.0;
  bool visible = false;
  friend bool operator==(const TrackSample&, const TrackSample&) = default;
};

// Plausibility window for fitted shots.
struct FlightLimits {
  double min_hit_height = 0.3;
  double max_hit_height = 3.5;
  double max_speed = 120.0;
  double min_vt = 4.0;
  double max_vt = 12.0;
};

struct SimulateOptions {
  bool stop_at_ground = true;
};

// Classical RK4 from (p0, v0) at t0 until t0 + t_end or, when requested,
// the first step that reaches z <= 0 (that step is included). Throws
// Error{"NonPhysicalParams"} for dt <= 0, vT <= 0, hit height or speed outside
// the limits. vT itself is only required to be positive so the drag-free
// limit (vT -> infinity) stays reachable; the [min_vt, max_vt] window binds
// the fitter.
std::vector<TrajectorySample> simulate(const FlightParams& params, double dt, double t_end,
                                       const SimulateOptions& opt = {}, const FlightLimits& limits = {});

// Single RK4 step of the drag ODE.
void rk4_step(CourtPoint& p, Velocity& v, double vt, double dt);

struct FitOptions {
  int max_iterations = 100;
  double gradient_tol = 1e-8;
  double step_tol = 1e-10;
  int min_observations = 8;
  // Hitter position from poses; seeds start there at 1.8 m. Without it the
  // first observation is back-projected to that height.
  std::optional<CourtPoint> hitter_position;
  FlightLimits limits;
};

struct FitDiagnostics {
  // Cost (sum of squared pixel residuals) at each multi-start seed after
  // clamping, and at the returned parameters.
  std::vector<double> start_costs;
  double final_cost = 0.0;
};

// Least-squares reconstruction of one shot from its pixel track. Observations
// are the visible samples in [hit_frame, end_frame]. Throws
// Error{"TooFewObservations"}. A non-converged fit is returned with
// converged = false rather than thrown.
FitResult fit_shot(const CameraModel& cam, std::span<const TrackSample> track, double fps, Frame hit_frame,
                   Frame end_frame, const FitOptions& opt = {}, FitDiagnostics* diag = nullptr);

// Visible samples in [first, last].
std::vector<TrackSample> observations_in(std::span<const TrackSample> track, Frame first, Frame last);

// Stacked pixel residuals (u, v per observation) and the forward-model
// Jacobian the fitter uses, with parameters ordered
// (p0.x, p0.y, p0.z, v0.x, v0.y, v0.z, vT).
struct ShotResidualModel {
  const CameraModel* cam = nullptr;
  std::vector<int> steps;  // integrator steps since the hit, one per observation
  std::vector<PixelPoint> pixels;
  double dt = 0.0;

  std::vector<double> residual(const std::array<double, 7>& x) const;
  // Central differences; column j uses step h_j = 1e-6 * max(1, |x_j|) unless
  // `rel_step` overrides the 1e-6.
  std::vector<std::vector<double>> jacobian(const std::array<double, 7>& x, double rel_step = 1e-6) const;
};

ShotResidualModel make_residual_model(const CameraModel& cam, std::span<const TrackSample> obs, double fps,
                                      Frame hit_frame);

// One fitting job for batch fitting.
struct ShotFitJob {
  Frame hit_frame = 0;
  Frame end_frame = 0;
  std::optional<CourtPoint> hitter_position;
};

struct ShotFitOutcome {
  std::optional<FitResult> fit;  // empty when there were too few observations
  std::string error_code;
};

// Reference implementation: one job after another.
std::vector<ShotFitOutcome> fit_shots_serial(const CameraModel& cam, std::span<const TrackSample> track,
                                             double fps, std::span<const ShotFitJob> jobs,
                                             const FitOptions& opt = {});

// OpenMP over jobs; `jobs_limit` <= 0 uses all available threads. Results are
// identical to fit_shots_serial.
std::vector<ShotFitOutcome> fit_shots_parallel(const CameraModel& cam, std::span<const TrackSample> track,
                                               double fps, std::span<const ShotFitJob> jobs,
                                               const FitOptions& opt = {}, int jobs_limit = 0);

// Hit frames of a rally. With `provided`, each hit is snapped to the nearest
// visible sample. Otherwise hits are the first visible sample plus every
// sample where the image velocity jumps sharply: by at least `min_jump_px`
// px/frame and `min_sharpness` times its change over the neighbouring
// samples. Velocities are two-frame means, compared only across runs without
// gaps longer than `max_frame_gap`. A positive `min_reversal_speed` (m/s)
// additionally requires the ground-mapped Y velocity to reverse by that much.
// Hits are at least `min_gap` frames apart. Throws Error{"NoHitsDetected"}.
struct SegmentOptions {
  double min_jump_px = 7.0;
  double min_sharpness = 2.5;
  double min_reversal_speed = 0.0;
  int max_frame_gap = 2;
  int min_gap = 5;
};
std::vector<Frame> segment_hits(std::span<const TrackSample> track, const CameraModel& cam, double fps,
                                const std::optional<std::vector<Frame>>& provided = std::nullopt,
                                const SegmentOptions& opt = {});

// First sign change of y between consecutive samples, linearly interpolated
// in t to y = 0. A sample exactly at y = 0 counts as the crossing.
std::optional<NetCrossing> net_crossing(std::span<const TrajectorySample> samples);

inline double shot_speed(const FlightParams& p) { return p.v0.norm(); }

}  // namespace courtside
