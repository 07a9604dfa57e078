#include "posegeom/synth.hpp"

#include <cmath>

namespace posegeom {

namespace {

Vec3 sample_box_surface(Rng& rng, const Vec3& half, const Vec3& center) {
  const double area[3] = {half.y() * half.z(), half.x() * half.z(), half.x() * half.y()};
  const double total = 2.0 * (area[0] + area[1] + area[2]);
  double pick = rng.uniform() * total;
  int face = 5;
  for (int f = 0; f < 5; ++f) {
    if (pick < area[f / 2]) {
      face = f;
      break;
    }
    pick -= area[f / 2];
  }
  const int axis = face / 2;
  Vec3 p;
  p(axis) = (face % 2 == 0) ? half(axis) : -half(axis);
  const int ua = (axis + 1) % 3, va = (axis + 2) % 3;
  p(ua) = rng.uniform(-half(ua), half(ua));
  p(va) = rng.uniform(-half(va), half(va));
  return p + center;
}

Vec3 sample_cylinder_surface(Rng& rng, double radius, double half_h, const Vec3& center) {
  const double lateral = 2.0 * M_PI * radius * (2.0 * half_h);
  const double caps = 2.0 * M_PI * radius * radius;
  Vec3 p;
  if (rng.uniform() * (lateral + caps) < lateral) {
    const double th = rng.uniform(0.0, 2.0 * M_PI);
    p << radius * std::cos(th), radius * std::sin(th), rng.uniform(-half_h, half_h);
  } else {
    const double z = rng.uniform() < 0.5 ? half_h : -half_h;
    const double r = radius * std::sqrt(rng.uniform());
    const double th = rng.uniform(0.0, 2.0 * M_PI);
    p << r * std::cos(th), r * std::sin(th), z;
  }
  return p + center;
}

Vec3 sample_sphere_surface(Rng& rng, double radius, const Vec3& center) {
  Vec3 dir;
  do {
    dir = rng.normal3();
  } while (dir.norm() < 1e-12);
  return center + radius * dir.normalized();
}

Rotation3 axis_angle(const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized();
  const double h = angle / 2.0;
  return rotation_from_quaternion(UnitQuaternion::normalized(
      std::cos(h), std::sin(h) * a.x(), std::sin(h) * a.y(), std::sin(h) * a.z()));
}

}  // namespace

PointsX3 gen_canonical_object(const std::string& kind, int n, std::uint64_t seed) {
  if (n < 8) {
    throw DegenerateInput("an object needs at least 8 points");
  }
  Rng rng(seed, rng_stream::kObject);
  PointsX3 pts(n, 3);
  if (kind == "box") {
    for (int i = 0; i < 8; ++i) {
      pts.row(i) = Vec3((i & 1) ? 0.5 : -0.5, (i & 2) ? 0.5 : -0.5, (i & 4) ? 0.5 : -0.5);
    }
    for (int i = 8; i < n; ++i) {
      pts.row(i) = sample_box_surface(rng, Vec3(0.5, 0.5, 0.5), Vec3::Zero());
    }
  } else if (kind == "cylinder") {
    for (int i = 0; i < n; ++i) {
      pts.row(i) = sample_cylinder_surface(rng, 0.5, 0.5, Vec3::Zero());
    }
  } else if (kind == "sphere") {
    for (int i = 0; i < n; ++i) {
      pts.row(i) = sample_sphere_surface(rng, 0.5, Vec3::Zero());
    }
  } else if (kind == "composite") {
    // Slab in the lower half of the cube with a thinner cylinder on top.
    const int half_n = n / 2;
    for (int i = 0; i < half_n; ++i) {
      pts.row(i) = sample_box_surface(rng, Vec3(0.5, 0.5, 0.25), Vec3(0.0, 0.0, -0.25));
    }
    for (int i = half_n; i < n; ++i) {
      pts.row(i) = sample_cylinder_surface(rng, 0.3, 0.25, Vec3(0.0, 0.0, 0.25));
    }
  } else {
    throw InvalidConfig("unknown object kind: " + kind);
  }
  return pts;
}

AnisoSimilarity sample_pose(std::uint64_t seed, double trans_range, double scale_lo,
                            double scale_hi) {
  if (!(scale_lo > 0.0) || scale_hi < scale_lo || trans_range < 0.0) {
    throw DegenerateInput("invalid pose sampling ranges");
  }
  Rng rng(seed, rng_stream::kPose);
  const Eigen::Vector4d q = rng.unit_quaternion_wxyz();
  const Rotation3 r =
      rotation_from_quaternion(UnitQuaternion::normalized(q(0), q(1), q(2), q(3)));
  Vec3 s;
  for (int j = 0; j < 3; ++j) s(j) = rng.uniform(scale_lo, scale_hi);
  const double z = 1.1 + rng.uniform() * trans_range;
  const double x = rng.uniform(-0.25, 0.25) * z;
  const double y = rng.uniform(-0.25, 0.25) * z;
  return AnisoSimilarity(r, s, Vec3(x, y, z));
}

RenderResult render_depth(const PointsX3& pts_cam, const Intrinsics& k) {
  RenderResult rr;
  rr.depth.values = MatX::Zero(k.height, k.width);
  rr.point_index.assign(static_cast<size_t>(k.height) * k.width, -1);
  bool any = false;
  for (Eigen::Index i = 0; i < pts_cam.rows(); ++i) {
    const double z = pts_cam(i, 2);
    if (z <= 1e-9) continue;
    const long u = std::lround(k.fx * pts_cam(i, 0) / z + k.cx);
    const long v = std::lround(k.fy * pts_cam(i, 1) / z + k.cy);
    if (u < 0 || u >= k.width || v < 0 || v >= k.height) continue;
    double& cell = rr.depth.values(v, u);
    if (cell <= 0.0 || z < cell) {
      cell = z;
      rr.point_index[static_cast<size_t>(v) * k.width + u] = i;
      any = true;
    }
  }
  if (!any) {
    throw NothingVisible("no point lands on any pixel");
  }
  return rr;
}

namespace {

void self_check(const SyntheticScene& scene) {
  for (size_t f = 0; f < scene.frames.size(); ++f) {
    const SceneFrame& fr = scene.frames[f];
    const PointMap lifted = backproject(fr.depth, fr.intrinsics);
    const RigidTransform to_frame =
        f == 0 ? RigidTransform{} : scene.gt_relative[f - 1];
    for (Eigen::Index i = 0; i < lifted.points.rows(); ++i) {
      if (lifted.confidence(i) <= 0.0) continue;
      const Vec3 x_cam = lifted.points.row(i).transpose();
      const Vec3 from_nocs = fr.gt_pose.apply(Vec3(fr.nocs.points.row(i).transpose()));
      if ((x_cam - from_nocs).norm() > 1e-6) {
        throw Error("scene self-check failed: depth and nocs disagree at a pixel");
      }
      const Vec3 from_pm = to_frame.apply(Vec3(fr.point_map.points.row(i).transpose()));
      if ((x_cam - from_pm).norm() > 1e-6) {
        throw Error("scene self-check failed: point map and depth disagree at a pixel");
      }
    }
  }
}

}  // namespace

SyntheticScene make_scene(const SceneSpec& spec) {
  if (spec.frames < 1) {
    throw DegenerateInput("a scene needs at least one frame");
  }
  SyntheticScene scene;
  scene.object = spec.object;
  scene.seed = spec.seed;
  scene.canonical_pts = gen_canonical_object(spec.object, spec.n_points, spec.seed);
  const AnisoSimilarity anchor =
      sample_pose(spec.seed, spec.trans_range, spec.scale_lo, spec.scale_hi);

  const double fov = spec.fov_deg * M_PI / 180.0;
  const Intrinsics k =
      fov_to_intrinsics(CameraPoseEncoding(UnitQuaternion(), Vec3::Zero(), fov, fov),
                        spec.width, spec.height);

  Rng cam_rng(spec.seed, rng_stream::kCamera);
  std::vector<RigidTransform> motions{RigidTransform{}};
  for (int f = 1; f < spec.frames; ++f) {
    // Orbit about the object center plus a small shift, so the object stays
    // in front of every camera.
    Vec3 axis;
    do {
      axis = cam_rng.normal3();
    } while (axis.norm() < 1e-12);
    const double angle = cam_rng.uniform(0.05, 0.45);
    const Rotation3 rot = axis_angle(axis, angle);
    Vec3 shift;
    for (int j = 0; j < 3; ++j) shift(j) = cam_rng.uniform(-0.1, 0.1);
    RigidTransform dt;
    dt.r = rot;
    dt.t = anchor.t - rot * anchor.t + shift;
    motions.push_back(dt);
    scene.gt_relative.push_back(dt);
  }

  for (int f = 0; f < spec.frames; ++f) {
    SceneFrame frame;
    frame.intrinsics = k;
    const RigidTransform& dt = motions[f];
    frame.gt_pose = AnisoSimilarity(dt.r * anchor.r, anchor.scale, dt.apply(anchor.t));

    RenderResult rr = render_depth(sa3_apply(frame.gt_pose, scene.canonical_pts), k);
    frame.depth = std::move(rr.depth);
    frame.pixel_point_index = std::move(rr.point_index);

    // Snap each pixel's canonical label onto the pixel ray: with
    // nocs = pose^-1(backprojected depth), the identity
    // backproject(depth) = pose(nocs) holds to machine precision.
    const PointMap lifted = backproject(frame.depth, k);
    frame.nocs = PointMap::zeros(spec.height, spec.width);
    frame.point_map = PointMap::zeros(spec.height, spec.width);
    const RigidTransform to_anchor = se3_inverse(dt);
    for (Eigen::Index i = 0; i < lifted.points.rows(); ++i) {
      if (lifted.confidence(i) <= 0.0) continue;
      const Vec3 x_cam = lifted.points.row(i).transpose();
      frame.nocs.points.row(i) = frame.gt_pose.inverse_apply(x_cam).transpose();
      frame.nocs.confidence(i) = 1.0;
      frame.point_map.points.row(i) = to_anchor.apply(x_cam).transpose();
      frame.point_map.confidence(i) = 1.0;
    }
    scene.frames.push_back(std::move(frame));
  }

  self_check(scene);
  return scene;
}

SyntheticScene corrupt(const SyntheticScene& scene, const CorruptionSpec& spec) {
  if (spec.noise_sigma < 0.0 || spec.outlier_frac < 0.0 || spec.outlier_frac >= 1.0 ||
      spec.outlier_scale < 0.0) {
    throw DegenerateInput("corruption parameters out of range");
  }
  SyntheticScene out = scene;
  Rng noise(spec.seed, rng_stream::kNoise);
  Rng outlier_rng(spec.seed, rng_stream::kOutlier);

  for (size_t f = 0; f < out.frames.size(); ++f) {
    SceneFrame& frame = out.frames[f];
    const SceneFrame& clean = scene.frames[f];
    const Eigen::Index pixels = frame.point_map.points.rows();

    if (spec.noise_sigma > 0.0) {
      for (int v = 0; v < frame.depth.height(); ++v) {
        for (int u = 0; u < frame.depth.width(); ++u) {
          if (frame.depth.values(v, u) > 0.0) {
            frame.depth.values(v, u) += spec.noise_sigma * noise.normal();
          }
        }
      }
      for (Eigen::Index i = 0; i < pixels; ++i) {
        if (frame.point_map.confidence(i) > 0.0) {
          frame.point_map.points.row(i) += (spec.noise_sigma * noise.normal3()).transpose();
        }
      }
    }

    std::vector<char> is_outlier(pixels, 0);
    if (spec.outlier_frac > 0.0) {
      Vec3 centroid = Vec3::Zero();
      double wsum = 0.0;
      for (Eigen::Index i = 0; i < pixels; ++i) {
        const double w = clean.point_map.confidence(i);
        if (w > 0.0) {
          centroid += w * clean.point_map.points.row(i).transpose();
          wsum += w;
        }
      }
      centroid /= wsum;
      for (Eigen::Index i = 0; i < pixels; ++i) {
        if (clean.point_map.confidence(i) <= 0.0) continue;
        if (outlier_rng.uniform() < spec.outlier_frac) {
          is_outlier[i] = 1;
          frame.point_map.points.row(i) =
              (centroid + outlier_rng.uniform_in_ball(spec.outlier_scale)).transpose();
        }
      }
    }

    for (Eigen::Index i = 0; i < pixels; ++i) {
      if (clean.point_map.confidence(i) <= 0.0) continue;
      if (spec.confidence_model == ConfidenceModel::kOracle) {
        frame.point_map.confidence(i) = is_outlier[i] ? 0.0 : 1.0 / (1.0 + spec.noise_sigma);
      } else {
        frame.point_map.confidence(i) = 1.0;
      }
    }
  }
  return out;
}

}  // namespace posegeom
