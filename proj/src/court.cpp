#include "courtside/court.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "courtside/error.hpp"
#include "courtside/lm.hpp"

namespace courtside {

namespace {

using Mat34 = Eigen::Matrix<double, 3, 4, Eigen::RowMajor>;

Mat34 to_mat(const std::array<double, 12>& P) { return Eigen::Map<const Mat34>(P.data()); }

std::array<double, 12> from_mat(const Mat34& M) {
  std::array<double, 12> out{};
  Eigen::Map<Mat34>(out.data()) = M;
  return out;
}

// Similarity taking the points to zero mean and RMS distance sqrt(dim).
template <int Dim>
Eigen::Matrix<double, Dim + 1, Dim + 1> normalizer(const std::vector<Eigen::Matrix<double, Dim, 1>>& pts) {
  Eigen::Matrix<double, Dim, 1> mean = Eigen::Matrix<double, Dim, 1>::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double msd = 0.0;
  for (const auto& p : pts) msd += (p - mean).squaredNorm();
  msd /= static_cast<double>(pts.size());
  const double s = msd > 0 ? std::sqrt(Dim / msd) : 1.0;
  Eigen::Matrix<double, Dim + 1, Dim + 1> T = Eigen::Matrix<double, Dim + 1, Dim + 1>::Identity();
  T.template topLeftCorner<Dim, Dim>() *= s;
  T.template topRightCorner<Dim, 1>() = -s * mean;
  return T;
}

struct Normalized {
  std::vector<Eigen::Vector4d> X;  // homogeneous normalized world
  std::vector<Eigen::Vector2d> x;  // normalized pixels
  Eigen::Matrix4d T3;
  Eigen::Matrix3d T2;
};

Normalized normalize(std::span<const Keypoint> kps) {
  std::vector<Eigen::Vector3d> w;
  std::vector<Eigen::Vector2d> px;
  for (const auto& k : kps) {
    w.emplace_back(k.court.x, k.court.y, k.court.z);
    px.emplace_back(k.pixel.u, k.pixel.v);
  }
  Normalized n;
  n.T3 = normalizer<3>(w);
  n.T2 = normalizer<2>(px);
  for (std::size_t i = 0; i < w.size(); ++i) {
    n.X.push_back(n.T3 * w[i].homogeneous());
    n.x.push_back((n.T2 * px[i].homogeneous()).hnormalized());
  }
  return n;
}

Mat34 denormalize(const Mat34& Pn, const Normalized& n) { return n.T2.inverse() * Pn * n.T3; }

// Full 11-dof DLT. Returns the normalized matrix and the singular values.
Mat34 dlt(const Normalized& n, Eigen::VectorXd* singular_values) {
  const auto count = static_cast<Eigen::Index>(n.X.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * count, 12);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::RowVector4d X = n.X[i].transpose();
    const double u = n.x[i].x();
    const double v = n.x[i].y();
    A.block<1, 4>(2 * i, 0) = X;
    A.block<1, 4>(2 * i, 8) = -u * X;
    A.block<1, 4>(2 * i + 1, 4) = X;
    A.block<1, 4>(2 * i + 1, 8) = -v * X;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  if (singular_values) *singular_values = svd.singularValues();
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Mat34 Pn;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) Pn(r, c) = p(4 * r + c);
  return Pn;
}

// Ground homography from the z = 0 points, then the z column of P from the
// elevated points by linear least squares.
std::optional<Mat34> homography_route(std::span<const Keypoint> kps) {
  std::vector<Keypoint> ground;
  std::vector<Keypoint> raised;
  for (const auto& k : kps) (k.court.z == 0.0 ? ground : raised).push_back(k);
  if (ground.size() < 4 || raised.size() < 2) return std::nullopt;

  std::vector<Eigen::Vector2d> g;
  std::vector<Eigen::Vector2d> px;
  for (const auto& k : ground) {
    g.emplace_back(k.court.x, k.court.y);
    px.emplace_back(k.pixel.u, k.pixel.v);
  }
  const Eigen::Matrix3d Tg = normalizer<2>(g);
  const Eigen::Matrix3d Tp = normalizer<2>(px);
  const auto count = static_cast<Eigen::Index>(ground.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * count, 9);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::RowVector3d X = (Tg * g[i].homogeneous()).transpose();
    const Eigen::Vector2d x = (Tp * px[i].homogeneous()).hnormalized();
    A.block<1, 3>(2 * i, 0) = X;
    A.block<1, 3>(2 * i, 6) = -x.x() * X;
    A.block<1, 3>(2 * i + 1, 3) = X;
    A.block<1, 3>(2 * i + 1, 6) = -x.y() * X;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d H = Tp.inverse() * Hn * Tg;
  H /= H.norm();

  // u * (H2.g + z c2) = H0.g + z c0, same for v.
  Eigen::MatrixXd B(2 * raised.size(), 3);
  Eigen::VectorXd rhs(2 * raised.size());
  for (std::size_t i = 0; i < raised.size(); ++i) {
    const auto& k = raised[i];
    const Eigen::Vector3d gh(k.court.x, k.court.y, 1.0);
    const Eigen::Vector3d q = H * gh;
    const double z = k.court.z;
    const auto r = static_cast<Eigen::Index>(2 * i);
    B.row(r) << z, 0.0, -k.pixel.u * z;
    rhs(r) = k.pixel.u * q(2) - q(0);
    B.row(r + 1) << 0.0, z, -k.pixel.v * z;
    rhs(r + 1) = k.pixel.v * q(2) - q(1);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  if (qr.rank() < 3) return std::nullopt;
  const Eigen::Vector3d c = qr.solve(rhs);
  Mat34 P;
  P.col(0) = H.col(0);
  P.col(1) = H.col(1);
  P.col(2) = c;
  P.col(3) = H.col(2);
  return P;
}

CameraModel make_camera(const Mat34& P, const CalibrationInput& cal) {
  Mat34 M = P / P.norm();
  CameraModel cam;
  cam.P = from_mat(M);
  cam.image_width = cal.image_width;
  cam.image_height = cal.image_height;
  // Orient so the court center lies in front of the camera.
  if (depth_of(cam, {0, 0, 0}) < 0) cam.P = from_mat(-M);
  return cam;
}

double rmse_or_inf(const CameraModel& cam, std::span<const Keypoint> kps) {
  double sum = 0.0;
  for (const auto& k : kps) {
    const Eigen::Vector4d X(k.court.x, k.court.y, k.court.z, 1.0);
    const Eigen::Vector3d q = to_mat(cam.P) * X;
    if (q.z() <= 0) return std::numeric_limits<double>::infinity();
    const double du = q.x() / q.z() - k.pixel.u;
    const double dv = q.y() / q.z() - k.pixel.v;
    sum += du * du + dv * dv;
  }
  return std::sqrt(sum / static_cast<double>(kps.size()));
}

// Refines in normalized coordinates; residuals are scaled back to pixels.
Mat34 refine(const Mat34& P, const Normalized& n) {
  const double pixel_scale = 1.0 / n.T2(0, 0);
  Mat34 Pn = n.T2 * P * n.T3.inverse();
  Pn /= Pn.norm();
  Eigen::VectorXd x0(12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) x0(4 * r + c) = Pn(r, c);

  const auto count = static_cast<Eigen::Index>(n.X.size());
  auto residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(2 * count);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::Vector4d& X = n.X[i];
      const double a = p.segment<4>(0).dot(X);
      const double b = p.segment<4>(4).dot(X);
      const double w = p.segment<4>(8).dot(X);
      r(2 * i) = (a / w - n.x[i].x()) * pixel_scale;
      r(2 * i + 1) = (b / w - n.x[i].y()) * pixel_scale;
    }
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& p, const Eigen::VectorXd&) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * count, 12);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Eigen::Vector4d& X = n.X[i];
      const double w = p.segment<4>(8).dot(X);
      const double u = p.segment<4>(0).dot(X) / w;
      const double v = p.segment<4>(4).dot(X) / w;
      J.block<1, 4>(2 * i, 0) = X.transpose() / w * pixel_scale;
      J.block<1, 4>(2 * i, 8) = -u * X.transpose() / w * pixel_scale;
      J.block<1, 4>(2 * i + 1, 4) = X.transpose() / w * pixel_scale;
      J.block<1, 4>(2 * i + 1, 8) = -v * X.transpose() / w * pixel_scale;
    }
    return J;
  };
  // Keep the overall scale fixed; it is a gauge freedom of P.
  auto clamp = [](Eigen::VectorXd& p) { p /= p.norm(); };

  lm::Options opt;
  opt.gradient_tol = 1e-10;
  opt.max_iterations = 200;
  opt.step_tol = 1e-14;
  const auto res = lm::minimize(x0, residual, jacobian, clamp, opt);
  Mat34 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) out(r, c) = res.x(4 * r + c);
  return denormalize(out, n);
}

}  // namespace

double depth_of(const CameraModel& cam, const CourtPoint& p) {
  const auto& P = cam.P;
  return P[8] * p.x + P[9] * p.y + P[10] * p.z + P[11];
}

PixelPoint project(const CameraModel& cam, const CourtPoint& p) {
  const auto& P = cam.P;
  const double w = depth_of(cam, p);
  if (!(w > 0.0)) throw Error("BehindCamera", "point projects with non-positive depth");
  return {(P[0] * p.x + P[1] * p.y + P[2] * p.z + P[3]) / w,
          (P[4] * p.x + P[5] * p.y + P[6] * p.z + P[7]) / w};
}

double reprojection_rmse(const CameraModel& cam, std::span<const Keypoint> points) {
  if (points.empty()) return 0.0;
  return rmse_or_inf(cam, points);
}

CourtPoint camera_center(const CameraModel& cam) {
  const Mat34 P = to_mat(cam.P);
  Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(P);
  const Eigen::Vector4d C = lu.kernel().col(0);
  return {C(0) / C(3), C(1) / C(3), C(2) / C(3)};
}

std::optional<CourtPoint> backproject_to_plane(const CameraModel& cam, const PixelPoint& px,
                                               double height) {
  const Mat34 P = to_mat(cam.P);
  Eigen::Matrix3d H;
  H.col(0) = P.col(0);
  H.col(1) = P.col(1);
  H.col(2) = P.col(2) * height + P.col(3);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(H);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::Vector3d g = lu.solve(Eigen::Vector3d(px.u, px.v, 1.0));
  if (std::abs(g.z()) < 1e-15) return std::nullopt;
  return CourtPoint{g.x() / g.z(), g.y() / g.z(), height};
}

bool camera_plausible(const CameraModel& cam, const CourtSpec& spec) {
  const Mat34 P = to_mat(cam.P);
  Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(P);
  if (lu.rank() != 3) return false;
  const double hx = spec.half_width();
  const double hy = spec.half_length();
  const double w = cam.image_width;
  const double h = cam.image_height;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const CourtPoint c{sx * hx, sy * hy, 0.0};
      if (!(depth_of(cam, c) > 0)) return false;
      const auto px = project(cam, c);
      if (!std::isfinite(px.u) || !std::isfinite(px.v)) return false;
      if (px.u < -1.5 * w || px.u > 2.5 * w || px.v < -1.5 * h || px.v > 2.5 * h) return false;
    }
  }
  return true;
}

CameraModel solve_camera(const CalibrationInput& cal, const CourtSpec& spec) {
  if (cal.projection) {
    CameraModel cam = make_camera(to_mat(*cal.projection), cal);
    if (!cal.keypoints.empty()) cam.rmse_px = reprojection_rmse(cam, cal.keypoints);
    if (!camera_plausible(cam, spec)) {
      throw Error("DegenerateConfiguration", "projection matrix is rank-deficient or misses the court");
    }
    return cam;
  }
  const auto& kps = cal.keypoints;
  if (kps.size() < 6) {
    throw Error("TooFewKeypoints", "need at least 6 correspondences, got " + std::to_string(kps.size()));
  }
  std::set<double> heights;
  std::set<double> xs;
  std::set<double> ys;
  for (const auto& k : kps) {
    heights.insert(k.court.z);
    xs.insert(k.court.x);
    ys.insert(k.court.y);
  }
  if (xs.size() < 2 || ys.size() < 2) {
    throw Error("DegenerateConfiguration", "keypoints need at least two distinct X and Y values");
  }
  if (heights.size() < 2) {
    throw Error("DegenerateConfiguration",
                "all keypoints share one height; add net-post-top correspondences to fix the vertical");
  }

  const Normalized n = normalize(kps);
  Eigen::VectorXd sv;
  const Mat34 dlt_n = dlt(n, &sv);
  // A one-dimensional null space is required; a second near-zero singular
  // value means the vertical direction is not constrained.
  const bool dlt_ok = sv.size() == 12 && sv(10) > 1e-9 * sv(0);

  std::vector<Mat34> candidates;
  if (dlt_ok) candidates.push_back(denormalize(dlt_n, n));
  if (auto h = homography_route(kps)) candidates.push_back(*h);
  if (candidates.empty()) {
    throw Error("DegenerateConfiguration",
                "keypoints do not constrain the vertical; need two or more elevated correspondences");
  }

  CameraModel best;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (const auto& init : candidates) {
    CameraModel seed = make_camera(init, cal);
    CameraModel cam = make_camera(refine(to_mat(seed.P), n), cal);
    const double e = rmse_or_inf(cam, kps);
    if (e < best_rmse) {
      best_rmse = e;
      best = cam;
    }
  }
  if (!std::isfinite(best_rmse)) {
    throw Error("DegenerateConfiguration", "no camera places every keypoint in front of it");
  }
  best.rmse_px = best_rmse;
  return best;
}

CameraModel look_at_camera(const CourtPoint& eye, const CourtPoint& target, double focal_px, int width,
                           int height) {
  const Eigen::Vector3d c(eye.x, eye.y, eye.z);
  const Eigen::Vector3d fwd = (Eigen::Vector3d(target.x, target.y, target.z) - c).normalized();
  const Eigen::Vector3d right = fwd.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = fwd.cross(right);
  Eigen::Matrix3d R;
  R.row(0) = right.transpose();
  R.row(1) = down.transpose();
  R.row(2) = fwd.transpose();
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  K(0, 0) = focal_px;
  K(1, 1) = focal_px;
  K(0, 2) = width / 2.0;
  K(1, 2) = height / 2.0;
  Mat34 Rt;
  Rt.leftCols<3>() = R;
  Rt.col(3) = -R * c;
  CameraModel cam;
  cam.P = from_mat(K * Rt);
  cam.image_width = width;
  cam.image_height = height;
  return cam;
}

Zone zone_of(const CourtPoint& p, const CourtSpec& spec) {
  const double x = std::clamp(p.x, -spec.half_width(), spec.half_width());
  const double y = std::clamp(p.y, -spec.half_length(), spec.half_length());
  Zone z;
  z.half = y < 0.0 ? PlayerId::A : PlayerId::B;
  const double d = std::abs(y);
  if (d < spec.zone_bounds[0]) {
    z.depth = Depth::Front;
  } else if (d < spec.zone_bounds[1]) {
    z.depth = Depth::Middle;
  } else {
    z.depth = Depth::Back;
  }
  if (z.half == PlayerId::A) {
    z.side = x < 0.0 ? Side::Right : Side::Left;
  } else {
    z.side = x < 0.0 ? Side::Left : Side::Right;
  }
  return z;
}

CourtPoint zone_center(const Zone& z, const CourtSpec& spec) {
  const double d0 = z.depth == Depth::Front ? 0.0 : spec.zone_bounds[static_cast<int>(z.depth) - 1];
  const double d1 = z.depth == Depth::Back ? spec.half_length() : spec.zone_bounds[static_cast<int>(z.depth)];
  const double depth = 0.5 * (d0 + d1);
  const double lateral = spec.half_width() / 2.0;
  double x = 0.0;
  double y = 0.0;
  if (z.half == PlayerId::A) {
    y = -depth;
    x = z.side == Side::Right ? -lateral : lateral;
  } else {
    y = depth;
    x = z.side == Side::Left ? -lateral : lateral;
  }
  return {x, y, 0.0};
}

}  // namespace courtside
