#include "posegeom/alignment.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace posegeom {

namespace {

constexpr double kRankTol = 1e-12;

void validate(const WeightedCorrespondences& c, Eigen::Index min_active) {
  if (c.src.rows() != c.dst.rows() || c.src.rows() != c.w.size()) {
    throw DimensionMismatch("correspondence arrays differ in length");
  }
  if (!c.src.allFinite() || !c.dst.allFinite() || !c.w.allFinite()) {
    throw DegenerateInput("correspondences must be finite");
  }
  if ((c.w.array() < 0.0).any()) {
    throw DegenerateInput("weights must be non-negative");
  }
  if ((c.w.array() > 0.0).count() < min_active) {
    throw InsufficientPoints("too few positive-weight correspondences");
  }
}

struct CoreResult {
  double s = 1.0;
  Mat3 r = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  double rmse = 0.0;
  bool rank_ok = true;
};

CoreResult umeyama_core(const WeightedCorrespondences& c, bool fix_scale) {
  const VecX wn = c.w / c.w.sum();
  const Eigen::RowVector3d mu_src = wn.transpose() * c.src;
  const Eigen::RowVector3d mu_dst = wn.transpose() * c.dst;
  const PointsX3 xs = c.src.rowwise() - mu_src;
  const PointsX3 ys = c.dst.rowwise() - mu_dst;
  const double var_src = (xs.array().square().rowwise().sum() * wn.array()).sum();
  const Mat3 cov = ys.transpose() * (wn.asDiagonal() * xs);

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 d = svd.singularValues();
  if (d(1) <= kRankTol * d(0)) {
    throw DegenerateGeometry("correspondences are collinear or coincident under the weights");
  }
  Mat3 flip = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    flip(2, 2) = -1.0;
  }

  CoreResult res;
  res.rank_ok = d(2) > kRankTol * d(0);
  res.r = svd.matrixU() * flip * svd.matrixV().transpose();
  if (!fix_scale) {
    if (var_src <= 0.0) {
      throw DegenerateGeometry("source points are coincident, scale is undefined");
    }
    res.s = (d(0) + d(1) + flip(2, 2) * d(2)) / var_src;
    if (!(res.s > 0.0)) {
      throw DegenerateGeometry("optimal scale is not positive");
    }
  }
  res.t = mu_dst.transpose() - res.s * (res.r * mu_src.transpose());

  PointsX3 resid = (res.s * (c.src * res.r.transpose())).rowwise() + res.t.transpose();
  resid -= c.dst;
  res.rmse = std::sqrt(
      std::max(0.0, (resid.array().square().rowwise().sum() * wn.array()).sum()));
  return res;
}

}  // namespace

AlignmentResult<Similarity> umeyama_sim3(const WeightedCorrespondences& c) {
  validate(c, 3);
  const CoreResult core = umeyama_core(c, false);
  AlignmentResult<Similarity> out;
  out.transform = Similarity(core.s, Rotation3(core.r), core.t);
  out.rmse = core.rmse;
  out.rank_ok = core.rank_ok;
  return out;
}

AlignmentResult<RigidTransform> umeyama_se3(const WeightedCorrespondences& c) {
  validate(c, 3);
  const CoreResult core = umeyama_core(c, true);
  AlignmentResult<RigidTransform> out;
  out.transform = RigidTransform{Rotation3(core.r), core.t};
  out.rmse = core.rmse;
  out.rank_ok = core.rank_ok;
  return out;
}

Sa3FitResult fit_sa3_nocs(const WeightedCorrespondences& c) {
  validate(c, 4);
  const VecX wn = c.w / c.w.sum();
  const Eigen::RowVector3d mu_src = wn.transpose() * c.src;
  const Eigen::RowVector3d mu_dst = wn.transpose() * c.dst;
  const PointsX3 xs = c.src.rowwise() - mu_src;
  const PointsX3 ys = c.dst.rowwise() - mu_dst;

  const Mat3 src_cov = xs.transpose() * (wn.asDiagonal() * xs);
  Eigen::SelfAdjointEigenSolver<Mat3> es(src_cov);
  if (es.eigenvalues()(0) <= kRankTol * es.eigenvalues()(2)) {
    throw DegenerateGeometry("source points do not span three dimensions");
  }

  const auto objective = [&](const Mat3& rr, const Vec3& ss, const Vec3& tt) {
    PointsX3 resid = ((c.src * ss.asDiagonal()) * rr.transpose()).rowwise() + tt.transpose();
    resid -= c.dst;
    return (resid.array().square().rowwise().sum() * wn.array()).sum();
  };

  Mat3 r = umeyama_core(c, false).r;
  Vec3 s;
  for (int j = 0; j < 3; ++j) {
    const double num = ((ys * r.col(j)).array().square() * wn.array()).sum();
    const double den = (xs.col(j).array().square() * wn.array()).sum();
    s(j) = std::sqrt(num / den);
    if (!(s(j) > 0.0)) {
      throw DegenerateGeometry("target points are flat along a source axis");
    }
  }
  Vec3 t = mu_dst.transpose() - r * Vec3(s.cwiseProduct(mu_src.transpose()));

  // The weighted affine solve is exact on consistent data, so factoring it
  // into column scales and a projected rotation usually starts the
  // alternation at (or next to) the optimum. Keep whichever seed scores
  // better; the alternation alone crawls through flat rotation-scale valleys
  // on near-symmetric objects.
  {
    const Mat3 sxx_inv = es.eigenvectors() *
                         es.eigenvalues().cwiseInverse().asDiagonal() *
                         es.eigenvectors().transpose();
    const Mat3 affine = (ys.transpose() * (wn.asDiagonal() * xs)) * sxx_inv;
    Vec3 s0;
    for (int j = 0; j < 3; ++j) s0(j) = affine.col(j).norm();
    if (affine.allFinite() && (s0.array() > 0.0).all()) {
      Eigen::JacobiSVD<Mat3> proj(affine * s0.cwiseInverse().asDiagonal(),
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
      Mat3 flip = Mat3::Identity();
      if (proj.matrixU().determinant() * proj.matrixV().determinant() < 0.0) {
        flip(2, 2) = -1.0;
      }
      const Mat3 r0 = proj.matrixU() * flip * proj.matrixV().transpose();
      const Vec3 t0 = mu_dst.transpose() - r0 * Vec3(s0.cwiseProduct(mu_src.transpose()));
      if (objective(r0, s0, t0) < objective(r, s, t)) {
        r = r0;
        s = s0;
        t = t0;
      }
    }
  }

  Sa3FitResult out;
  out.objective_history.push_back(objective(r, s, t));
  bool converged = out.objective_history.back() < 1e-24;
  double last_rel = std::numeric_limits<double>::infinity();
  bool last_rank_ok = true;
  for (int iter = 0; iter < 300 && !converged; ++iter) {
    WeightedCorrespondences scaled{c.src * s.asDiagonal(), c.dst, c.w};
    const CoreResult rigid = umeyama_core(scaled, true);
    r = rigid.r;
    t = rigid.t;
    last_rank_ok = rigid.rank_ok;

    const PointsX3 z = (c.dst.rowwise() - t.transpose()) * r;
    for (int j = 0; j < 3; ++j) {
      const double den = (c.src.col(j).array().square() * wn.array()).sum();
      if (den <= 0.0) {
        throw DegenerateGeometry("source points are flat along an axis");
      }
      s(j) = (c.src.col(j).array() * z.col(j).array() * wn.array()).sum() / den;
      if (!(s(j) > 0.0)) {
        throw DegenerateGeometry("scale solve produced a non-positive axis");
      }
    }

    const double prev = out.objective_history.back();
    const double cur = objective(r, s, t);
    out.objective_history.push_back(cur);
    last_rel = (prev - cur) / std::max(prev, 1e-300);
    converged = last_rel < 1e-12 || cur < 1e-24;
  }
  if (!converged && last_rel > 1e-6) {
    throw NoConvergence("anisotropic fit still improving at the iteration cap");
  }

  out.iterations = static_cast<int>(out.objective_history.size()) - 1;
  out.transform = AnisoSimilarity(Rotation3(r), s, t);
  out.rank_ok = last_rank_ok;
  out.rmse = std::sqrt(std::max(0.0, out.objective_history.back()));
  return out;
}

namespace {

WeightedCorrespondences masked_pixels(const PointMap& src, const PointMap& dst) {
  if (src.points.rows() != dst.points.rows()) {
    throw DimensionMismatch("point maps differ in pixel count");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < src.points.rows(); ++i) {
    if (src.confidence(i) * dst.confidence(i) > 0.0) keep.push_back(i);
  }
  if (keep.size() < 16) {
    throw InsufficientPoints("fewer than 16 confident pixels in a frame");
  }
  WeightedCorrespondences c;
  c.src.resize(keep.size(), 3);
  c.dst.resize(keep.size(), 3);
  c.w.resize(keep.size());
  for (size_t k = 0; k < keep.size(); ++k) {
    c.src.row(k) = src.points.row(keep[k]);
    c.dst.row(k) = dst.points.row(keep[k]);
    c.w(k) = src.confidence(keep[k]) * dst.confidence(keep[k]);
  }
  return c;
}

}  // namespace

TwoStepResult relative_pose_two_step(const PointMap& anchor_pm, const PointMap& anchor_cam,
                                     const PointMap& query_pm, const PointMap& query_cam) {
  const WeightedCorrespondences anchor = masked_pixels(anchor_pm, anchor_cam);
  const auto sim = umeyama_sim3(anchor);

  WeightedCorrespondences query = masked_pixels(query_pm, query_cam);
  query.src = sim.transform.apply(query.src);
  const auto rigid = umeyama_se3(query);

  TwoStepResult out;
  out.relative = rigid.transform;
  out.anchor_calibration = sim.transform;
  out.anchor_rmse = sim.rmse;
  out.query_rmse = rigid.rmse;
  return out;
}

double isotropic_scale_from_size(const Vec3& size) {
  if (!(size.minCoeff() > 0.0)) {
    throw NonPositiveSize("size components must be positive");
  }
  return size.cwiseAbs().mean();
}

}  // namespace posegeom
