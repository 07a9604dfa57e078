#pragma once

#include <functional>
#include <vector>

#include "posegeom/transforms.hpp"

namespace posegeom {

struct LossConfig {
  double tau_infonce = 1.0;
  double tau2 = 0.02;
  double alpha = 1.0;
  double sl1_beta = 0.1;
  double eps = 1e-8;
  double huber_delta = 0.1;
};

// Scalar loss plus, where provided, the analytic gradient w.r.t. one declared
// argument, flattened as documented per operation.
struct LossValue {
  double value = 0.0;
  VecX grad;
};

struct PoseTriple {
  Rotation3 r;
  Vec3 t = Vec3::Zero();
  Vec3 size = Vec3::Ones();
};

// Mean over rows of a of the (squared or plain) distance to the nearest row
// of b; nearest-neighbor ties broken by lowest index. Gradient w.r.t. a,
// flattened row-major (point i occupies entries 3i..3i+2).
LossValue chamfer_one_sided(const PointsX3& a, const PointsX3& b, bool squared);

// Keypoint repulsion: mean over ordered pairs i != j of
// max(0, tau2 - |x_i - x_j|)^2, normalized by M(M-1). Gradient w.r.t. kpts,
// row-major.
LossValue diversity_loss(const PointsX3& kpts, double tau2);

// |R_gt - R|_F + |t_gt - t|_2 + |s_gt - s|_2.
LossValue pose_loss(const PoseTriple& pred, const PoseTriple& gt);

// pose_loss over raw 15-vectors [row-major 3x3 block, t, s] with gradient
// w.r.t. pred; the rotation block is treated as 9 free coordinates so the
// function is finite-difference friendly.
LossValue pose_loss_raw(const Eigen::Matrix<double, 15, 1>& pred,
                        const Eigen::Matrix<double, 15, 1>& gt);

// Elementwise smooth-L1 (x^2/(2 beta) inside |x| < beta, |x| - beta/2
// outside), averaged over all 3M elements. Gradient w.r.t. pred, row-major.
LossValue nocs_smooth_l1(const PointsX3& pred, const PointsX3& gt, double beta);

// Supervised InfoNCE over unit-norm latents. s_ij = z_i . z_j / tau;
// d_i = log sum_{j != i} exp(s_ij);
// n_i = log sum_{j: positive} exp(s_ij + log(w_ij + eps));
// loss = -(1/|V|) sum_{i in V} (n_i - d_i) over anchors V with >= 1 positive.
// Gradient w.r.t. latents, row-major (z_i occupies i*D..i*D+D-1).
// norm_tolerance loosens the unit-norm check; the value and gradient are
// computed from the raw rows either way, so finite-difference probes that
// step off the sphere remain consistent.
LossValue info_nce(const MatX& latents, const Eigen::MatrixXi& positive_mask, const MatX& weights,
                   double tau, double eps, double norm_tolerance = 1e-6);

// Aleatoric-uncertainty map loss over C channels:
//   sum_p sigma_p * |r_p|_1                      (data term)
// + sum_p sigma_p * |forward-diff residual|_1    (u and v differences)
// - alpha * sum_p log sigma_p
// restricted to masked pixels; a difference term requires both endpoints
// masked and sigma is taken at the base pixel. Gradient w.r.t. pred,
// flattened channel-major then row-major (index c*H*W + v*W + u).
LossValue aleatoric_map_loss(const std::vector<MatX>& pred, const std::vector<MatX>& gt,
                             const MatX& sigma, double alpha, const MatX& mask);

// |t - t*|_1 + |s - s*|_1 + |log_scale - log(scale*)|. Gradient w.r.t. the
// 7-vector [pred_t, pred_s, pred_log_scale].
LossValue scale_loss(const Vec3& pred_t, const Vec3& gt_t, const Vec3& pred_s, const Vec3& gt_s,
                     double pred_log_scale, double gt_scale);

// Weighted sum of already-computed loss terms.
double weighted_total(const VecX& weights, const VecX& values);

struct GradCheckReport {
  VecX analytic;
  VecX numeric;
  VecX rel_err;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool passed = false;
};

// loss_fn(x, grad) returns the value and, when grad is non-null, fills the
// analytic gradient. Compares against central differences with step eps;
// per-coordinate relative error |g - fd| / max(1, |g|, |fd|).
GradCheckReport finite_diff_check(const std::function<double(const VecX&, VecX*)>& loss_fn,
                                  const VecX& point, double eps, double tol);

}  // namespace posegeom
