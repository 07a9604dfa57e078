#include "posegeom/transforms.hpp"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/LU>

namespace posegeom {

namespace {

constexpr double kOrthoTol = 1e-9;

}  // namespace

Rotation3::Rotation3(const Mat3& m) : m_(m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  if (ortho > kOrthoTol) {
    throw DegenerateInput("rotation matrix is not orthonormal");
  }
  if (std::abs(m.determinant() - 1.0) > kOrthoTol) {
    throw DegenerateInput("rotation matrix determinant is not +1");
  }
}

Rotation3 Rotation3::transposed() const {
  Rotation3 out;
  out.m_ = m_.transpose();
  return out;
}

UnitQuaternion::UnitQuaternion(double w_, double x_, double y_, double z_)
    : w(w_), x(x_), y(y_), z(z_) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(n - 1.0) > 1e-9) {
    throw NotNormalized("quaternion norm deviates from 1");
  }
  const bool flip = w < 0.0 ||
                    (w == 0.0 && (x < 0.0 || (x == 0.0 && (y < 0.0 || (y == 0.0 && z < 0.0)))));
  if (flip) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
}

UnitQuaternion UnitQuaternion::normalized(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (n <= 1e-12) {
    throw DegenerateInput("cannot normalize a zero quaternion");
  }
  return UnitQuaternion(w / n, x / n, y / n, z / n);
}

PointsX3 RigidTransform::apply(const PointsX3& pts) const {
  PointsX3 out = pts * r.matrix().transpose();
  out.rowwise() += t.transpose();
  return out;
}

Similarity::Similarity(double s_, const Rotation3& r_, const Vec3& t_) : s(s_), r(r_), t(t_) {
  if (!(s > 0.0)) {
    throw NonPositiveScale("similarity scale must be positive");
  }
}

PointsX3 Similarity::apply(const PointsX3& pts) const {
  PointsX3 out = (s * (pts * r.matrix().transpose()));
  out.rowwise() += t.transpose();
  return out;
}

AnisoSimilarity::AnisoSimilarity(const Rotation3& r_, const Vec3& scale_, const Vec3& t_)
    : r(r_), scale(scale_), t(t_) {
  if (!(scale.minCoeff() > 0.0)) {
    throw NonPositiveScale("anisotropic scale components must be positive");
  }
}

Rotation3 rot_from_6d(const SixDRotation& v) {
  const double na = v.a.norm();
  if (na <= 1e-12) {
    throw DegenerateInput("first 6d seed has near-zero norm");
  }
  const Vec3 c1 = v.a / na;
  const Vec3 b_perp = v.b - c1.dot(v.b) * c1;
  // |b_perp| = |b| sin(angle between seeds); reject within 1e-6 rad of
  // either parallel configuration.
  const double nb = v.b.norm();
  if (nb <= 1e-12 || b_perp.norm() <= nb * 1e-6) {
    throw DegenerateInput("6d seeds are parallel");
  }
  const Vec3 c2 = b_perp / b_perp.norm();
  const Vec3 c3 = c1.cross(c2);
  Mat3 m;
  m.col(0) = c1;
  m.col(1) = c2;
  m.col(2) = c3;
  return Rotation3(m);
}

SixDRotation rot_to_6d(const Rotation3& r) {
  SixDRotation out;
  out.a = r.matrix().col(0);
  out.b = r.matrix().col(1);
  return out;
}

Rotation3 rotation_from_quaternion(const UnitQuaternion& q) {
  // Re-normalize so the matrix is orthonormal to machine precision even for
  // quaternions at the edge of the construction tolerance. All terms are
  // quadratic in q, so the double cover is exact: +-q give identical bits.
  const double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  const double w = q.w / n, x = q.x / n, y = q.y / n, z = q.z / n;
  Mat3 m;
  m(0, 0) = w * w + x * x - y * y - z * z;
  m(0, 1) = 2.0 * (x * y - w * z);
  m(0, 2) = 2.0 * (x * z + w * y);
  m(1, 0) = 2.0 * (x * y + w * z);
  m(1, 1) = w * w - x * x + y * y - z * z;
  m(1, 2) = 2.0 * (y * z - w * x);
  m(2, 0) = 2.0 * (x * z - w * y);
  m(2, 1) = 2.0 * (y * z + w * x);
  m(2, 2) = w * w - x * x - y * y + z * z;
  return Rotation3(m);
}

UnitQuaternion quaternion_from_rotation(const Rotation3& r) {
  // Shepperd's method: branch on the largest of the four squared components
  // for numerical stability near 180-degree rotations.
  const Mat3& m = r.matrix();
  const double tr = m.trace();
  double w, x, y, z;
  if (tr > m(0, 0) && tr > m(1, 1) && tr > m(2, 2)) {
    const double s = std::sqrt(tr + 1.0) * 2.0;
    w = 0.25 * s;
    x = (m(2, 1) - m(1, 2)) / s;
    y = (m(0, 2) - m(2, 0)) / s;
    z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    w = (m(2, 1) - m(1, 2)) / s;
    x = 0.25 * s;
    y = (m(0, 1) + m(1, 0)) / s;
    z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    w = (m(0, 2) - m(2, 0)) / s;
    x = (m(0, 1) + m(1, 0)) / s;
    y = 0.25 * s;
    z = (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    w = (m(1, 0) - m(0, 1)) / s;
    x = (m(0, 2) + m(2, 0)) / s;
    y = (m(1, 2) + m(2, 1)) / s;
    z = 0.25 * s;
  }
  return UnitQuaternion::normalized(w, x, y, z);
}

PointsX3 sa3_apply(const AnisoSimilarity& p, const PointsX3& pts) {
  PointsX3 out = (pts * p.scale.asDiagonal()) * p.r.matrix().transpose();
  out.rowwise() += p.t.transpose();
  return out;
}

PointsX3 sa3_inverse_apply(const AnisoSimilarity& p, const PointsX3& pts) {
  PointsX3 centered = pts;
  centered.rowwise() -= p.t.transpose();
  PointsX3 out = centered * p.r.matrix();
  out.array().rowwise() /= p.scale.transpose().array();
  return out;
}

RigidTransform se3_compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.r = a.r * b.r;
  out.t = a.r * b.t + a.t;
  return out;
}

RigidTransform se3_inverse(const RigidTransform& a) {
  RigidTransform out;
  out.r = a.r.transposed();
  out.t = -(out.r * a.t);
  return out;
}

double geodesic_angle_deg(const Rotation3& a, const Rotation3& b) {
  const Mat3 rel = a.matrix().transpose() * b.matrix();
  // atan2 of the skew-part magnitude (|rel - rel^T|_F = 2 sqrt(2) |sin t|)
  // against the trace cosine; acos of the trace alone cannot resolve angles
  // below ~1e-8 rad.
  const double s = (rel - rel.transpose()).norm() / (2.0 * std::sqrt(2.0));
  const double c = std::min(1.0, std::max(-1.0, (rel.trace() - 1.0) / 2.0));
  return std::atan2(s, c) * 180.0 / M_PI;
}

}  // namespace posegeom
