#pragma once

#include <vector>

#include "posegeom/camera.hpp"
#include "posegeom/transforms.hpp"

namespace posegeom {

struct WeightedCorrespondences {
  PointsX3 src;
  PointsX3 dst;
  VecX w;
};

template <typename TransformT>
struct AlignmentResult {
  TransformT transform;
  double rmse = 0.0;
  bool rank_ok = true;
};

struct Sa3FitResult : AlignmentResult<AnisoSimilarity> {
  // Objective value before the first iteration and after each one.
  std::vector<double> objective_history;
  int iterations = 0;
};

struct TwoStepResult {
  RigidTransform relative;
  Similarity anchor_calibration;
  double anchor_rmse = 0.0;
  double query_rmse = 0.0;
};

// Weighted Umeyama: global minimizer of sum w_n |S src_n - dst_n|^2 over
// Sim(3). Reflections handled by flipping the last singular direction when
// det(U) det(V) < 0. rank_ok is false when the weighted cross-covariance is
// rank 2 (planar); rank <= 1 throws DegenerateGeometry. Weights must be
// non-negative with at least 3 strictly positive entries.
AlignmentResult<Similarity> umeyama_sim3(const WeightedCorrespondences& c);

// Same solver with the scale pinned to 1.
AlignmentResult<RigidTransform> umeyama_se3(const WeightedCorrespondences& c);

// Alternating minimization for the anisotropic model R diag(s) src + t:
// rotation/translation by fixed-scale Umeyama at the current scale, then the
// closed-form per-axis scale at the new rotation. Initialized from the
// isotropic solution with per-axis standard-deviation scale ratios. Stops
// when the relative objective decrease falls below 1e-12 (or the objective
// below 1e-24); throws NoConvergence if 100 iterations pass while the
// objective is still improving by more than 1e-6 relative.
Sa3FitResult fit_sa3_nocs(const WeightedCorrespondences& c);

// Two-step relative pose between an anchor and a query frame. Step 1 fits a
// similarity from the anchor's predicted points to its metric camera points,
// removing the prediction's global scale; step 2 fits a rigid transform from
// the calibrated query points to the query camera points. Per-pixel weights
// are the products of the two confidences; each step needs at least 16
// positive-weight pixels.
TwoStepResult relative_pose_two_step(const PointMap& anchor_pm, const PointMap& anchor_cam,
                                     const PointMap& query_pm, const PointMap& query_cam);

// Arithmetic mean of the per-axis size magnitudes.
double isotropic_scale_from_size(const Vec3& size);

}  // namespace posegeom
