#pragma once

#include <utility>

#include "posegeom/transforms.hpp"

namespace posegeom {

struct Intrinsics {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 1, height = 1;

  Intrinsics() = default;
  Intrinsics(double fx_, double fy_, double cx_, double cy_, int width_, int height_);
};

// Camera head output: extrinsics as a quaternion + translation, intrinsics
// as horizontal/vertical field of view in radians, open interval (0, pi).
struct CameraPoseEncoding {
  UnitQuaternion q;
  Vec3 t = Vec3::Zero();
  double fov_x = 1.0, fov_y = 1.0;

  CameraPoseEncoding() = default;
  CameraPoseEncoding(const UnitQuaternion& q_, const Vec3& t_, double fov_x_, double fov_y_);
};

// H x W depth in meters; entries <= 0 mean invalid.
struct DepthMap {
  MatX values;

  int height() const { return static_cast<int>(values.rows()); }
  int width() const { return static_cast<int>(values.cols()); }
};

// Per-pixel 3D points with confidences, flattened row-major by pixel
// (index = v * width + u).
struct PointMap {
  int height = 0, width = 0;
  PointsX3 points;
  VecX confidence;

  static PointMap zeros(int height, int width);

  Eigen::Index index(int v, int u) const {
    return static_cast<Eigen::Index>(v) * width + u;
  }
  Vec3 point(int v, int u) const { return points.row(index(v, u)).transpose(); }
  double conf(int v, int u) const { return confidence(index(v, u)); }
};

using PixelsX2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// FoV decode with the principal point at the image center:
// fx = (width/2) / tan(fov_x/2), cx = width/2 (likewise vertically).
Intrinsics fov_to_intrinsics(const CameraPoseEncoding& enc, int width, int height);

// (fov_x, fov_y) recovered from focal lengths; inverse of fov_to_intrinsics.
std::pair<double, double> intrinsics_to_fov(const Intrinsics& k);

// Pinhole lift X = (u - cx) z / fx, Y = (v - cy) z / fy, Z = z. Pixels with
// non-positive depth get a zero point and zero confidence; valid pixels get
// confidence 1.
PointMap backproject(const DepthMap& d, const Intrinsics& k);

// Pinhole projection to pixel coordinates; results may fall outside the
// image. Throws BehindCamera when any Z <= 1e-9.
PixelsX2 project(const PointsX3& pts, const Intrinsics& k);

// Component-wise Huber distance between encodings, summed over the
// sign-aligned quaternion, translation, and both fov entries.
double camera_loss(const CameraPoseEncoding& pred, const CameraPoseEncoding& gt, double delta);

// Same loss over raw 9-vectors [qw qx qy qz tx ty tz fov_x fov_y] with the
// analytic gradient w.r.t. pred. The quaternion block is sign-aligned but
// not normalized, which keeps the function smooth in all 9 coordinates for
// finite-difference checks.
double camera_loss_raw(const Eigen::Matrix<double, 9, 1>& pred,
                       const Eigen::Matrix<double, 9, 1>& gt, double delta,
                       Eigen::Matrix<double, 9, 1>* grad = nullptr);

}  // namespace posegeom
