#pragma once

#include <Eigen/Core>

#include "posegeom/errors.hpp"

namespace posegeom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
// Point sets are row-per-point.
using PointsX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Proper rotation matrix. Construction validates orthonormality
// (|m^T m - I|_F <= 1e-9) and det(m) = +1 within 1e-9.
class Rotation3 {
 public:
  Rotation3() : m_(Mat3::Identity()) {}
  explicit Rotation3(const Mat3& m);

  static Rotation3 identity() { return Rotation3(); }

  const Mat3& matrix() const { return m_; }
  Rotation3 transposed() const;

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation3 operator*(const Rotation3& o) const { return Rotation3(Mat3(m_ * o.m_)); }

 private:
  Mat3 m_;
};

// Unit quaternion, canonical sign: w >= 0, and if w == 0 the first nonzero
// of (x, y, z) is >= 0. Construction validates |q| = 1 within 1e-9.
struct UnitQuaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  UnitQuaternion() = default;
  UnitQuaternion(double w_, double x_, double y_, double z_);

  // Scales an arbitrary nonzero quadruple onto the unit sphere.
  static UnitQuaternion normalized(double w, double x, double y, double z);

  double dot(const UnitQuaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
};

// Two raw column seeds of the 6D rotation representation; unconstrained.
struct SixDRotation {
  Vec3 a = Vec3::UnitX();
  Vec3 b = Vec3::UnitY();
};

// SE(3)
struct RigidTransform {
  Rotation3 r;
  Vec3 t = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return r * p + t; }
  PointsX3 apply(const PointsX3& pts) const;
};

// Sim(3): isotropic scale, s > 0.
struct Similarity {
  double s = 1.0;
  Rotation3 r;
  Vec3 t = Vec3::Zero();

  Similarity() = default;
  Similarity(double s_, const Rotation3& r_, const Vec3& t_);

  Vec3 apply(const Vec3& p) const { return s * (r * p) + t; }
  PointsX3 apply(const PointsX3& pts) const;
};

// SA(3): per-axis positive scale. Treated as a set of maps, not a group:
// only apply / inverse-apply are provided.
struct AnisoSimilarity {
  Rotation3 r;
  Vec3 scale = Vec3::Ones();
  Vec3 t = Vec3::Zero();

  AnisoSimilarity() = default;
  AnisoSimilarity(const Rotation3& r_, const Vec3& scale_, const Vec3& t_);

  Vec3 apply(const Vec3& p) const { return r * Vec3(scale.cwiseProduct(p)) + t; }
  Vec3 inverse_apply(const Vec3& p) const {
    return Vec3(r.matrix().transpose() * (p - t)).cwiseQuotient(scale);
  }
};

// 6D -> SO(3) by Gram-Schmidt: c1 = a/|a|, c2 = normalize(b - (c1.b) c1),
// c3 = c1 x c2. Throws DegenerateInput when |a| <= 1e-12 or the seeds are
// parallel within 1e-6 rad (either end of the axis).
Rotation3 rot_from_6d(const SixDRotation& v);

// First two columns of the rotation; exact inverse of rot_from_6d.
SixDRotation rot_to_6d(const Rotation3& r);

Rotation3 rotation_from_quaternion(const UnitQuaternion& q);
UnitQuaternion quaternion_from_rotation(const Rotation3& r);

PointsX3 sa3_apply(const AnisoSimilarity& p, const PointsX3& pts);
PointsX3 sa3_inverse_apply(const AnisoSimilarity& p, const PointsX3& pts);

// compose(a, b) maps x to a(b(x)).
RigidTransform se3_compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform se3_inverse(const RigidTransform& a);

// Rotation distance arccos((tr(a^T b) - 1)/2) in degrees, trace argument
// clamped to [-1, 1].
double geodesic_angle_deg(const Rotation3& a, const Rotation3& b);

}  // namespace posegeom
