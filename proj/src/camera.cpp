#include "posegeom/camera.hpp"

#include <cmath>

namespace posegeom {

namespace {

double huber(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 0.5 * x * x : delta * (a - 0.5 * delta);
}

double huber_grad(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? x : (x > 0.0 ? delta : -delta);
}

}  // namespace

Intrinsics::Intrinsics(double fx_, double fy_, double cx_, double cy_, int width_, int height_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw DegenerateInput("focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw DegenerateInput("image dimensions must be at least 1");
  }
}

CameraPoseEncoding::CameraPoseEncoding(const UnitQuaternion& q_, const Vec3& t_, double fov_x_,
                                       double fov_y_)
    : q(q_), t(t_), fov_x(fov_x_), fov_y(fov_y_) {
  if (!(fov_x > 0.0 && fov_x < M_PI) || !(fov_y > 0.0 && fov_y < M_PI)) {
    throw DegenerateInput("fov components must lie in (0, pi)");
  }
}

PointMap PointMap::zeros(int height, int width) {
  PointMap pm;
  pm.height = height;
  pm.width = width;
  pm.points = PointsX3::Zero(static_cast<Eigen::Index>(height) * width, 3);
  pm.confidence = VecX::Zero(static_cast<Eigen::Index>(height) * width);
  return pm;
}

Intrinsics fov_to_intrinsics(const CameraPoseEncoding& enc, int width, int height) {
  const double fx = (width / 2.0) / std::tan(enc.fov_x / 2.0);
  const double fy = (height / 2.0) / std::tan(enc.fov_y / 2.0);
  return Intrinsics(fx, fy, width / 2.0, height / 2.0, width, height);
}

std::pair<double, double> intrinsics_to_fov(const Intrinsics& k) {
  return {2.0 * std::atan((k.width / 2.0) / k.fx), 2.0 * std::atan((k.height / 2.0) / k.fy)};
}

PointMap backproject(const DepthMap& d, const Intrinsics& k) {
  if (d.height() != k.height || d.width() != k.width) {
    throw DimensionMismatch("depth map size does not match intrinsics");
  }
  PointMap pm = PointMap::zeros(d.height(), d.width());
  for (int v = 0; v < d.height(); ++v) {
    for (int u = 0; u < d.width(); ++u) {
      const double z = d.values(v, u);
      if (z <= 0.0) continue;
      const Eigen::Index i = pm.index(v, u);
      pm.points(i, 0) = (u - k.cx) * z / k.fx;
      pm.points(i, 1) = (v - k.cy) * z / k.fy;
      pm.points(i, 2) = z;
      pm.confidence(i) = 1.0;
    }
  }
  return pm;
}

PixelsX2 project(const PointsX3& pts, const Intrinsics& k) {
  if ((pts.col(2).array() <= 1e-9).any()) {
    throw BehindCamera("cannot project points at or behind the camera");
  }
  PixelsX2 px(pts.rows(), 2);
  px.col(0) = k.fx * pts.col(0).cwiseQuotient(pts.col(2)).array() + k.cx;
  px.col(1) = k.fy * pts.col(1).cwiseQuotient(pts.col(2)).array() + k.cy;
  return px;
}

double camera_loss(const CameraPoseEncoding& pred, const CameraPoseEncoding& gt, double delta) {
  if (!(delta > 0.0)) {
    throw DegenerateInput("huber threshold must be positive");
  }
  Eigen::Matrix<double, 9, 1> p, g;
  p << pred.q.w, pred.q.x, pred.q.y, pred.q.z, pred.t, pred.fov_x, pred.fov_y;
  g << gt.q.w, gt.q.x, gt.q.y, gt.q.z, gt.t, gt.fov_x, gt.fov_y;
  return camera_loss_raw(p, g, delta);
}

double camera_loss_raw(const Eigen::Matrix<double, 9, 1>& pred,
                       const Eigen::Matrix<double, 9, 1>& gt, double delta,
                       Eigen::Matrix<double, 9, 1>* grad) {
  if (!(delta > 0.0)) {
    throw DegenerateInput("huber threshold must be positive");
  }
  Eigen::Matrix<double, 9, 1> target = gt;
  if (pred.head<4>().dot(gt.head<4>()) < 0.0) {
    target.head<4>() = -gt.head<4>();
  }
  double loss = 0.0;
  for (int i = 0; i < 9; ++i) {
    const double r = pred(i) - target(i);
    loss += huber(r, delta);
    if (grad) (*grad)(i) = huber_grad(r, delta);
  }
  return loss;
}

}  // namespace posegeom
