#include "posegeom/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace posegeom {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Stable log sum exp over the active entries of `terms`.
double logsumexp(const std::vector<double>& terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double t : terms) peak = std::max(peak, t);
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

}  // namespace

LossValue chamfer_one_sided(const PointsX3& a, const PointsX3& b, bool squared) {
  if (a.rows() < 1 || b.rows() < 1) {
    throw EmptySet("chamfer distance needs non-empty point sets");
  }
  const Eigen::Index n = a.rows();
  LossValue out;
  out.grad = VecX::Zero(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    double best_d2 = (a.row(i) - b.row(0)).squaredNorm();
    for (Eigen::Index j = 1; j < b.rows(); ++j) {
      const double d2 = (a.row(i) - b.row(j)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    const Vec3 diff = (a.row(i) - b.row(best)).transpose();
    if (squared) {
      out.value += best_d2;
      out.grad.segment<3>(3 * i) = 2.0 * diff / static_cast<double>(n);
    } else {
      const double d = std::sqrt(best_d2);
      out.value += d;
      if (d > 0.0) {
        out.grad.segment<3>(3 * i) = diff / (d * static_cast<double>(n));
      }
    }
  }
  out.value /= static_cast<double>(n);
  return out;
}

LossValue diversity_loss(const PointsX3& kpts, double tau2) {
  const Eigen::Index m = kpts.rows();
  if (m < 2) {
    throw TooFewKeypoints("diversity loss needs at least two keypoints");
  }
  if (!(tau2 > 0.0)) {
    throw DegenerateInput("repulsion threshold must be positive");
  }
  const double norm = static_cast<double>(m) * static_cast<double>(m - 1);
  LossValue out;
  out.grad = VecX::Zero(3 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      const Vec3 diff = (kpts.row(i) - kpts.row(j)).transpose();
      const double d = diff.norm();
      if (d >= tau2) continue;
      const double hinge = tau2 - d;
      out.value += hinge * hinge / norm;
      if (d > 0.0) {
        const Vec3 g = 2.0 * hinge / (d * norm) * diff;
        out.grad.segment<3>(3 * i) -= g;
        out.grad.segment<3>(3 * j) += g;
      }
    }
  }
  return out;
}

LossValue pose_loss(const PoseTriple& pred, const PoseTriple& gt) {
  LossValue out;
  out.value = (gt.r.matrix() - pred.r.matrix()).norm() + (gt.t - pred.t).norm() +
              (gt.size - pred.size).norm();
  return out;
}

LossValue pose_loss_raw(const Eigen::Matrix<double, 15, 1>& pred,
                        const Eigen::Matrix<double, 15, 1>& gt) {
  LossValue out;
  out.grad = VecX::Zero(15);
  const int blocks[3][2] = {{0, 9}, {9, 3}, {12, 3}};
  for (const auto& blk : blocks) {
    const VecX diff = pred.segment(blk[0], blk[1]) - gt.segment(blk[0], blk[1]);
    const double d = diff.norm();
    out.value += d;
    if (d > 0.0) out.grad.segment(blk[0], blk[1]) = diff / d;
  }
  return out;
}

LossValue nocs_smooth_l1(const PointsX3& pred, const PointsX3& gt, double beta) {
  if (pred.rows() != gt.rows()) {
    throw DimensionMismatch("prediction and target point counts differ");
  }
  if (!(beta > 0.0)) {
    throw DegenerateInput("smooth-l1 threshold must be positive");
  }
  const double count = static_cast<double>(pred.size());
  LossValue out;
  out.grad = VecX::Zero(pred.size());
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double x = pred(i, c) - gt(i, c);
      const Eigen::Index k = 3 * i + c;
      if (std::abs(x) < beta) {
        out.value += x * x / (2.0 * beta) / count;
        out.grad(k) = x / beta / count;
      } else {
        out.value += (std::abs(x) - 0.5 * beta) / count;
        out.grad(k) = sign(x) / count;
      }
    }
  }
  return out;
}

LossValue info_nce(const MatX& latents, const Eigen::MatrixXi& positive_mask, const MatX& weights,
                   double tau, double eps, double norm_tolerance) {
  const Eigen::Index n = latents.rows();
  if (n < 2) {
    throw DegenerateInput("contrastive loss needs at least two latents");
  }
  if (positive_mask.rows() != n || positive_mask.cols() != n || weights.rows() != n ||
      weights.cols() != n) {
    throw DimensionMismatch("mask and weight matrices must be NxN");
  }
  if (!(tau > 0.0) || !(eps > 0.0)) {
    throw DegenerateInput("temperature and stabilizer must be positive");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (positive_mask(i, i) != 0) {
      throw DegenerateInput("positive mask must have a zero diagonal");
    }
    if (std::abs(latents.row(i).norm() - 1.0) > norm_tolerance) {
      throw NotNormalized("latent rows must be unit norm");
    }
  }

  const MatX s = latents * latents.transpose() / tau;
  std::vector<Eigen::Index> anchors;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (positive_mask.row(i).sum() > 0) anchors.push_back(i);
  }
  if (anchors.empty()) {
    throw NoValidAnchors("no anchor has a positive pair");
  }
  const double inv_v = 1.0 / static_cast<double>(anchors.size());

  LossValue out;
  MatX g = MatX::Zero(n, n);
  std::vector<double> num_terms, den_terms;
  for (Eigen::Index i : anchors) {
    num_terms.clear();
    den_terms.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      den_terms.push_back(s(i, j));
      if (positive_mask(i, j) != 0) {
        num_terms.push_back(s(i, j) + std::log(weights(i, j) + eps));
      }
    }
    const double d_i = logsumexp(den_terms);
    const double n_i = logsumexp(num_terms);
    out.value -= inv_v * (n_i - d_i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double p_den = std::exp(s(i, j) - d_i);
      const double p_num = positive_mask(i, j) != 0
                               ? std::exp(s(i, j) + std::log(weights(i, j) + eps) - n_i)
                               : 0.0;
      g(i, j) = -inv_v * (p_num - p_den);
    }
  }
  const MatX grad_z = (g + g.transpose()) * latents / tau;
  out.grad = VecX::Zero(latents.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.grad.segment(i * latents.cols(), latents.cols()) = grad_z.row(i).transpose();
  }
  return out;
}

LossValue aleatoric_map_loss(const std::vector<MatX>& pred, const std::vector<MatX>& gt,
                             const MatX& sigma, double alpha, const MatX& mask) {
  if (pred.empty() || pred.size() != gt.size()) {
    throw DimensionMismatch("prediction and target channel counts differ");
  }
  const Eigen::Index h = sigma.rows(), w = sigma.cols();
  if (mask.rows() != h || mask.cols() != w) {
    throw DimensionMismatch("mask size does not match sigma");
  }
  for (size_t c = 0; c < pred.size(); ++c) {
    if (pred[c].rows() != h || pred[c].cols() != w || gt[c].rows() != h || gt[c].cols() != w) {
      throw DimensionMismatch("channel size does not match sigma");
    }
  }
  const auto on = [&](Eigen::Index v, Eigen::Index u) { return mask(v, u) != 0.0; };
  for (Eigen::Index v = 0; v < h; ++v) {
    for (Eigen::Index u = 0; u < w; ++u) {
      if (on(v, u) && !(sigma(v, u) > 0.0)) {
        throw NonPositiveSigma("sigma must be positive on masked pixels");
      }
    }
  }

  const size_t ch = pred.size();
  LossValue out;
  out.grad = VecX::Zero(static_cast<Eigen::Index>(ch) * h * w);
  const auto gidx = [&](size_t c, Eigen::Index v, Eigen::Index u) {
    return static_cast<Eigen::Index>(c) * h * w + v * w + u;
  };

  for (Eigen::Index v = 0; v < h; ++v) {
    for (Eigen::Index u = 0; u < w; ++u) {
      if (!on(v, u)) continue;
      const double sg = sigma(v, u);
      for (size_t c = 0; c < ch; ++c) {
        const double r = pred[c](v, u) - gt[c](v, u);
        out.value += sg * std::abs(r);
        out.grad(gidx(c, v, u)) += sg * sign(r);
      }
      // Forward differences toward +u and +v; the last column/row has no
      // neighbor and drops out of the gradient term.
      for (int axis = 0; axis < 2; ++axis) {
        const Eigen::Index v2 = axis == 0 ? v : v + 1;
        const Eigen::Index u2 = axis == 0 ? u + 1 : u;
        if (v2 >= h || u2 >= w || !on(v2, u2)) continue;
        for (size_t c = 0; c < ch; ++c) {
          const double e =
              (pred[c](v2, u2) - pred[c](v, u)) - (gt[c](v2, u2) - gt[c](v, u));
          out.value += sg * std::abs(e);
          out.grad(gidx(c, v2, u2)) += sg * sign(e);
          out.grad(gidx(c, v, u)) -= sg * sign(e);
        }
      }
      out.value -= alpha * std::log(sg);
    }
  }
  return out;
}

LossValue scale_loss(const Vec3& pred_t, const Vec3& gt_t, const Vec3& pred_s, const Vec3& gt_s,
                     double pred_log_scale, double gt_scale) {
  if (!(gt_scale > 0.0)) {
    throw NonPositiveScale("ground-truth scale must be positive");
  }
  LossValue out;
  out.grad = VecX::Zero(7);
  for (int i = 0; i < 3; ++i) {
    out.value += std::abs(pred_t(i) - gt_t(i)) + std::abs(pred_s(i) - gt_s(i));
    out.grad(i) = sign(pred_t(i) - gt_t(i));
    out.grad(3 + i) = sign(pred_s(i) - gt_s(i));
  }
  const double dl = pred_log_scale - std::log(gt_scale);
  out.value += std::abs(dl);
  out.grad(6) = sign(dl);
  return out;
}

double weighted_total(const VecX& weights, const VecX& values) {
  if (weights.size() != values.size()) {
    throw LengthMismatch("weights and values differ in length");
  }
  return weights.dot(values);
}

GradCheckReport finite_diff_check(const std::function<double(const VecX&, VecX*)>& loss_fn,
                                  const VecX& point, double eps, double tol) {
  GradCheckReport rep;
  rep.tol = tol;
  VecX analytic;
  loss_fn(point, &analytic);
  rep.analytic = analytic;
  rep.numeric = VecX::Zero(point.size());
  rep.rel_err = VecX::Zero(point.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    VecX xp = point, xm = point;
    xp(i) += eps;
    xm(i) -= eps;
    rep.numeric(i) = (loss_fn(xp, nullptr) - loss_fn(xm, nullptr)) / (2.0 * eps);
    const double denom = std::max({1.0, std::abs(rep.analytic(i)), std::abs(rep.numeric(i))});
    rep.rel_err(i) = std::abs(rep.analytic(i) - rep.numeric(i)) / denom;
    rep.max_rel_err = std::max(rep.max_rel_err, rep.rel_err(i));
  }
  rep.passed = rep.max_rel_err < tol;
  return rep;
}

}  // namespace posegeom
