#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <utility>

#include "oracles.hpp"
#include "posegeom/camera.hpp"
#include "posegeom/errors.hpp"
#include "posegeom/rng.hpp"

using namespace posegeom;

namespace {

CameraPoseEncoding enc_with_fov(double fov_x, double fov_y) {
  return CameraPoseEncoding(UnitQuaternion(), Vec3::Zero(), fov_x, fov_y);
}

}  // namespace

TEST_CASE("fov decode at 90 degrees") {
  const Intrinsics k = fov_to_intrinsics(enc_with_fov(M_PI / 2, M_PI / 2), 518, 518);
  CHECK(k.fx == doctest::Approx(259.0).epsilon(1e-12));
  CHECK(k.fy == doctest::Approx(259.0).epsilon(1e-12));
  CHECK(k.cx == 259.0);
  CHECK(k.cy == 259.0);
}

TEST_CASE("fov to focal round-trips") {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const double fx = rng.uniform(0.05, M_PI - 0.05);
    const double fy = rng.uniform(0.05, M_PI - 0.05);
    const int w = rng.uniform_int(2, 4096);
    const int h = rng.uniform_int(2, 4096);
    const Intrinsics k = fov_to_intrinsics(enc_with_fov(fx, fy), w, h);
    const auto [gx, gy] = intrinsics_to_fov(k);
    CHECK(std::abs(gx - fx) / fx < 1e-10);
    CHECK(std::abs(gy - fy) / fy < 1e-10);
  }
}

TEST_CASE("narrower fov means longer focal length") {
  double prev = 0.0;
  for (double fov = 2.8; fov > 0.1; fov -= 0.1) {
    const double fx = fov_to_intrinsics(enc_with_fov(fov, fov), 640, 480).fx;
    CHECK(fx > prev);
    prev = fx;
  }
}

TEST_CASE("backproject principal ray and invalid pixels") {
  const Intrinsics k(100, 100, 3, 2, 8, 6);
  DepthMap d;
  d.values = MatX::Zero(6, 8);
  d.values(2, 3) = 2.0;   // principal point
  d.values(0, 0) = -1.0;  // negative stays invalid
  const PointMap pm = backproject(d, k);
  CHECK((pm.point(2, 3) - Vec3(0, 0, 2)).norm() == 0.0);
  CHECK(pm.conf(2, 3) == 1.0);
  CHECK(pm.point(0, 0).norm() == 0.0);
  CHECK(pm.conf(0, 0) == 0.0);
  CHECK(pm.conf(5, 7) == 0.0);

  DepthMap wrong;
  wrong.values = MatX::Ones(5, 8);
  CHECK_THROWS_AS(backproject(wrong, k), DimensionMismatch);
}

TEST_CASE("backprojected tilted plane stays planar") {
  const Intrinsics k(120, 110, 32, 24, 64, 48);
  const Vec3 n = Vec3(0.2, -0.3, 0.93).normalized();
  const double h = 2.0;
  DepthMap d;
  d.values.resize(48, 64);
  for (int v = 0; v < 48; ++v) {
    for (int u = 0; u < 64; ++u) {
      const double denom = n.x() * (u - k.cx) / k.fx + n.y() * (v - k.cy) / k.fy + n.z();
      d.values(v, u) = h / denom;
    }
  }
  const PointMap pm = backproject(d, k);
  for (Eigen::Index i = 0; i < pm.points.rows(); ++i) {
    CHECK(std::abs(n.dot(pm.points.row(i).transpose()) - h) < 1e-9);
  }
}

TEST_CASE("projection basics") {
  const Intrinsics k(200, 180, 30, 20, 60, 40);
  PointsX3 p(1, 3);
  p << 0, 0, 1;
  const PixelsX2 px = project(p, k);
  CHECK(px(0, 0) == 30.0);
  CHECK(px(0, 1) == 20.0);

  PointsX3 two(2, 3);
  two << 0.3, -0.2, 1.0, 0.3, -0.2, 2.0;
  const PixelsX2 q = project(two, k);
  CHECK(std::abs(q(1, 0) - k.cx) < std::abs(q(0, 0) - k.cx));
  CHECK(std::abs(q(1, 1) - k.cy) < std::abs(q(0, 1) - k.cy));

  PointsX3 behind(2, 3);
  behind << 0, 0, 1, 0, 0, -0.5;
  CHECK_THROWS_AS(project(behind, k), BehindCamera);
  PointsX3 at_zero(1, 3);
  at_zero << 0, 0, 0;
  CHECK_THROWS_AS(project(at_zero, k), BehindCamera);
}

TEST_CASE("project inverts backproject at pixel centers") {
  Rng rng(22);
  const Intrinsics k(150, 140, 24, 16, 48, 32);
  DepthMap d;
  d.values.resize(32, 48);
  for (int v = 0; v < 32; ++v) {
    for (int u = 0; u < 48; ++u) {
      d.values(v, u) = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.5, 5.0);
    }
  }
  const PointMap pm = backproject(d, k);
  for (int v = 0; v < 32; ++v) {
    for (int u = 0; u < 48; ++u) {
      if (pm.conf(v, u) == 0.0) continue;
      PointsX3 one(1, 3);
      one.row(0) = pm.point(v, u).transpose();
      const PixelsX2 px = project(one, k);
      CHECK(std::abs(px(0, 0) - u) < 1e-6);
      CHECK(std::abs(px(0, 1) - v) < 1e-6);
    }
  }
}

TEST_CASE("encoding validation") {
  CHECK_THROWS_AS(enc_with_fov(0.0, 1.0), DegenerateInput);
  CHECK_THROWS_AS(enc_with_fov(1.0, M_PI), DegenerateInput);
  CHECK_THROWS_AS(Intrinsics(0.0, 1.0, 0, 0, 4, 4), DegenerateInput);
  CHECK_THROWS_AS(Intrinsics(1.0, 1.0, 0, 0, 0, 4), DegenerateInput);
}

TEST_CASE("camera loss zero at equality and under quaternion negation") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    Eigen::Matrix<double, 9, 1> v;
    const Eigen::Vector4d q = rng.unit_quaternion_wxyz();
    v << q(0), q(1), q(2), q(3), rng.normal3(), rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5);
    CHECK(camera_loss_raw(v, v, 0.1) == 0.0);
    Eigen::Matrix<double, 9, 1> neg = v;
    neg.head<4>() = -v.head<4>();
    CHECK(camera_loss_raw(neg, v, 0.1) == 0.0);
  }
}

TEST_CASE("camera loss single-component deviations") {
  const double delta = 0.05;
  Eigen::Matrix<double, 9, 1> gt;
  gt << 1, 0, 0, 0, 0.1, -0.2, 0.3, 1.0, 1.2;

  // One fov off by 2 delta lands on the linear branch.
  Eigen::Matrix<double, 9, 1> pred = gt;
  pred(7) += 2 * delta;
  CHECK(camera_loss_raw(pred, gt, delta) ==
        doctest::Approx(1.5 * delta * delta).epsilon(1e-12));
  CHECK(camera_loss_raw(pred, gt, delta) ==
        doctest::Approx(oracle::huber(2 * delta, delta)).epsilon(1e-12));

  // Loss increases with the size of a single-coordinate residual.
  double prev = 0.0;
  for (double step = 0.01; step < 0.2; step += 0.01) {
    Eigen::Matrix<double, 9, 1> p2 = gt;
    p2(4) += step;
    const double loss = camera_loss_raw(p2, gt, delta);
    CHECK(loss > prev);
    prev = loss;
  }
}

TEST_CASE("camera loss matches the per-component reference") {
  Rng rng(24);
  for (int i = 0; i < 200; ++i) {
    Eigen::Matrix<double, 9, 1> pred, gt;
    const Eigen::Vector4d qp = rng.unit_quaternion_wxyz();
    const Eigen::Vector4d qg = rng.unit_quaternion_wxyz();
    pred << qp(0), qp(1), qp(2), qp(3), rng.normal3(), rng.uniform(0.3, 2.5),
        rng.uniform(0.3, 2.5);
    gt << qg(0), qg(1), qg(2), qg(3), rng.normal3(), rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5);
    const double delta = rng.uniform(0.01, 0.5);

    Eigen::Matrix<double, 9, 1> target = gt;
    if (pred.head<4>().dot(gt.head<4>()) < 0.0) target.head<4>() = -gt.head<4>();
    double expect = 0.0;
    for (int c = 0; c < 9; ++c) expect += oracle::huber(pred(c) - target(c), delta);
    CHECK(camera_loss_raw(pred, gt, delta) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("struct and raw entry points agree") {
  Rng rng(25);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector4d qp = rng.unit_quaternion_wxyz();
    const Eigen::Vector4d qg = rng.unit_quaternion_wxyz();
    const CameraPoseEncoding pred(UnitQuaternion(qp(0), qp(1), qp(2), qp(3)), rng.normal3(),
                                  rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5));
    const CameraPoseEncoding gt(UnitQuaternion(qg(0), qg(1), qg(2), qg(3)), rng.normal3(),
                                rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5));
    Eigen::Matrix<double, 9, 1> p, g;
    p << pred.q.w, pred.q.x, pred.q.y, pred.q.z, pred.t, pred.fov_x, pred.fov_y;
    g << gt.q.w, gt.q.x, gt.q.y, gt.q.z, gt.t, gt.fov_x, gt.fov_y;
    const double delta = rng.uniform(0.01, 0.5);
    CHECK(camera_loss(pred, gt, delta) == camera_loss_raw(p, g, delta));
  }
  CHECK_THROWS_AS(camera_loss_raw(Eigen::Matrix<double, 9, 1>::Zero(),
                                  Eigen::Matrix<double, 9, 1>::Zero(), 0.0),
                  DegenerateInput);
}
