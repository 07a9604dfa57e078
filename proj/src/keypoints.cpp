#include "posegeom/keypoints.hpp"

#include <cmath>

namespace posegeom {

Heatmap::Heatmap(const MatX& h_) : h(h_) {
  if ((h.array() < 0.0).any()) {
    throw NotNormalized("heatmap entries must be non-negative");
  }
  if (h.cols() > 0 && ((h.rowwise().sum().array() - 1.0).abs() > 1e-9).any()) {
    throw NotNormalized("heatmap rows must sum to 1");
  }
}

ObjectLatent::ObjectLatent(const VecX& z_) : z(z_) {
  if (std::abs(z.norm() - 1.0) > 1e-9) {
    throw NotNormalized("object latent must be unit norm");
  }
}

Heatmap cosine_attention(const MatX& queries, const MatX& keys, double temperature) {
  if (!(temperature > 0.0)) {
    throw DegenerateInput("attention temperature must be positive");
  }
  if (queries.cols() != keys.cols()) {
    throw DimensionMismatch("query and key dimensions differ");
  }
  const VecX qn = queries.rowwise().norm();
  const VecX kn = keys.rowwise().norm();
  if ((qn.array() <= 1e-12).any() || (kn.array() <= 1e-12).any()) {
    throw ZeroNormRow("cosine attention requires nonzero rows");
  }
  MatX logits = (qn.cwiseInverse().asDiagonal() * queries) *
                (kn.cwiseInverse().asDiagonal() * keys).transpose() / temperature;
  MatX h(logits.rows(), logits.cols());
  for (Eigen::Index m = 0; m < logits.rows(); ++m) {
    const double peak = logits.row(m).maxCoeff();
    h.row(m) = (logits.row(m).array() - peak).exp();
    h.row(m) /= h.row(m).sum();
  }
  return Heatmap(h);
}

KeypointSet aggregate(const Heatmap& h, const FeatureSet& fs) {
  if (h.h.cols() != fs.pts.rows() || fs.pts.rows() != fs.f.rows()) {
    throw DimensionMismatch("heatmap columns must match feature set size");
  }
  KeypointSet out;
  out.x = h.h * fs.pts;
  out.feat = h.h * fs.f;
  return out;
}

MatX film(const MatX& features, const VecX& gamma, const VecX& beta) {
  if (gamma.size() != features.cols() || beta.size() != features.cols()) {
    throw DimensionMismatch("film parameters must match feature dimension");
  }
  MatX out = features.array().rowwise() * gamma.transpose().array();
  out.array().rowwise() += beta.transpose().array();
  return out;
}

ObjectLatent pool_latent(const MatX& per_frame_latents) {
  if (per_frame_latents.rows() < 1) {
    throw EmptyInput("latent pooling needs at least one frame");
  }
  VecX mean = per_frame_latents.colwise().mean();
  const double n = mean.norm();
  if (n < 1e-12) {
    throw ZeroNormRow("pooled latent has near-zero norm");
  }
  return ObjectLatent(VecX(mean / n));
}

}  // namespace posegeom
