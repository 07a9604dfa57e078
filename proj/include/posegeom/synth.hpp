#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posegeom/camera.hpp"
#include "posegeom/rng.hpp"
#include "posegeom/transforms.hpp"

namespace posegeom {

struct SceneFrame {
  AnisoSimilarity gt_pose;  // canonical -> this frame's camera coordinates
  Intrinsics intrinsics;
  DepthMap depth;
  PointMap nocs;       // canonical coordinates at valid pixels
  PointMap point_map;  // anchor-frame coordinates plus confidence
  std::vector<std::int64_t> pixel_point_index;  // winning canonical point, -1 if none
};

struct SyntheticScene {
  std::string object = "box";
  PointsX3 canonical_pts;  // inside [-0.5, 0.5]^3
  std::vector<SceneFrame> frames;
  // Entry i maps anchor-camera coordinates to frame (i+1) camera coordinates.
  std::vector<RigidTransform> gt_relative;
  std::uint64_t seed = 0;
};

enum class ConfidenceModel { kOracle, kUniform };

struct CorruptionSpec {
  double noise_sigma = 0.0;    // meters, Gaussian on depth and point maps
  double outlier_frac = 0.0;   // [0, 1)
  double outlier_scale = 0.0;  // meters, radius of the replacement ball
  ConfidenceModel confidence_model = ConfidenceModel::kOracle;
  std::uint64_t seed = 0;
};

struct SceneSpec {
  std::string object = "box";  // box | cylinder | sphere | composite
  int n_points = 4096;
  int frames = 1;
  int width = 96, height = 96;
  double fov_deg = 60.0;
  double trans_range = 0.6;  // object center depth spread above 1.1 m
  double scale_lo = 0.12, scale_hi = 0.45;
  std::uint64_t seed = 0;
};

// Deterministic surface-sampled point cloud inside the canonical cube.
// A box with n = 8 returns exactly the cube corners.
PointsX3 gen_canonical_object(const std::string& kind, int n, std::uint64_t seed);

// Uniform rotation (quaternion method), per-axis scale uniform in
// [scale_lo, scale_hi], center at z = 1.1 + U(0,1) * trans_range with
// x, y = U(-0.25, 0.25) * z so the object stays in a 60-degree frustum.
AnisoSimilarity sample_pose(std::uint64_t seed, double trans_range, double scale_lo,
                            double scale_hi);

struct RenderResult {
  DepthMap depth;
  std::vector<std::int64_t> point_index;  // per pixel, -1 where nothing lands
};

// Z-buffer point splatting at the resolution carried by the intrinsics.
RenderResult render_depth(const PointsX3& pts_cam, const Intrinsics& k);

// Builds a fully self-consistent scene: at every valid pixel,
// backproject(depth) equals gt_pose(nocs) to machine precision, and each
// frame's point map holds the same points in anchor-camera coordinates.
SyntheticScene make_scene(const SceneSpec& spec);

// Adds Gaussian noise to depth and point maps, replaces a fraction of point
// map pixels with uniform-in-ball outliers around the frame centroid, and
// rewrites point map confidences per the confidence model. NOCS maps and
// ground truth are untouched. Deterministic per spec seed.
SyntheticScene corrupt(const SyntheticScene& scene, const CorruptionSpec& spec);

}  // namespace posegeom
