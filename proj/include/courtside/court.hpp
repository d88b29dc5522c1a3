// Court geometry: camera calibration from court keypoints, projection, the
// six-zone partition of each half and the side-switch mirror.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "courtside/model.hpp"

namespace courtside {

struct Keypoint {
  CourtPoint court;
  PixelPoint pixel;
  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct CalibrationInput {
  std::vector<Keypoint> keypoints;
  std::optional<std::array<double, 12>> projection;
  int image_width = 1280;
  int image_height = 720;
};

// Estimates the 3x4 projection: Hartley-normalized DLT (and, when enough
// ground points exist, a ground homography plus vertical column) followed by
// Levenberg-Marquardt refinement of the total squared reprojection error.
// Throws Error{"TooFewKeypoints"} for < 6 correspondences and
// Error{"DegenerateConfiguration"} when the points do not pin the vertical.
CameraModel solve_camera(const CalibrationInput& cal, const CourtSpec& spec = {});

// Throws Error{"BehindCamera"} when the homogeneous depth is <= 0.
PixelPoint project(const CameraModel& cam, const CourtPoint& p);

// Homogeneous depth w of p (positive in front of the camera).
double depth_of(const CameraModel& cam, const CourtPoint& p);

double reprojection_rmse(const CameraModel& cam, std::span<const Keypoint> points);

CourtPoint camera_center(const CameraModel& cam);

// Intersects the viewing ray of `px` with the horizontal plane z = height.
std::optional<CourtPoint> backproject_to_plane(const CameraModel& cam, const PixelPoint& px,
                                               double height);

// Rank 3 and the four court corners land inside a guard box four times the
// image size around the image.
bool camera_plausible(const CameraModel& cam, const CourtSpec& spec = {});

// Player-relative zone. Off-court points are clamped to the court boundary
// first. Boundaries belong to the side farther from the net; y == 0 is half B.
// For half A, x < 0 is Right; for half B, x < 0 is Left.
Zone zone_of(const CourtPoint& p, const CourtSpec& spec = {});

// 180 degree rotation about the vertical axis through the net center.
constexpr CourtPoint mirror(const CourtPoint& p) { return {-p.x, -p.y, p.z}; }
constexpr Velocity mirror_velocity(const Velocity& v) { return {-v.x, -v.y, v.z}; }

// Pinhole camera at `eye` looking at `target` (Z up), focal length in pixels
// and principal point at the image center.
CameraModel look_at_camera(const CourtPoint& eye, const CourtPoint& target, double focal_px, int width,
                           int height);

// Court center of a zone on the ground, useful as a position prior.
CourtPoint zone_center(const Zone& z, const CourtSpec& spec = {});

}  // namespace courtside
