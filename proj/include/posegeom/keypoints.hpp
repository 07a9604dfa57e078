#pragma once

#include "posegeom/transforms.hpp"

namespace posegeom {

// Per-pixel (or per-token) descriptors paired with their 3D locations.
struct FeatureSet {
  MatX f;        // K x D
  PointsX3 pts;  // K x 3
};

// Row-stochastic attention map: M keypoints over K source entries.
struct Heatmap {
  MatX h;

  Heatmap() = default;
  explicit Heatmap(const MatX& h_);
};

struct KeypointSet {
  PointsX3 x;  // M x 3
  MatX feat;   // M x D
};

// Unit-norm pooled object embedding.
struct ObjectLatent {
  VecX z;

  ObjectLatent() = default;
  explicit ObjectLatent(const VecX& z_);
};

// Softmax over keys of cosine similarity divided by temperature. Rows of the
// result sum to 1. Throws ZeroNormRow if any query or key row has norm
// <= 1e-12.
Heatmap cosine_attention(const MatX& queries, const MatX& keys, double temperature);

// Convex combination of source points and features: x = h * pts,
// feat = h * f.
KeypointSet aggregate(const Heatmap& h, const FeatureSet& fs);

// Feature-wise affine modulation gamma (.) features + beta, broadcast across
// rows.
MatX film(const MatX& features, const VecX& gamma, const VecX& beta);

// Mean of per-frame latents renormalized to unit length.
ObjectLatent pool_latent(const MatX& per_frame_latents);

}  // namespace posegeom
