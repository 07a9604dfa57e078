#pragma once

#include <map>
#include <string>
#include <vector>

#include "posegeom/camera.hpp"
#include "posegeom/transforms.hpp"

namespace posegeom {

struct OrientedBox3 {
  RigidTransform pose;
  Vec3 extents = Vec3::Ones();  // full side lengths

  OrientedBox3() = default;
  OrientedBox3(const RigidTransform& pose_, const Vec3& extents_);
};

struct ModelPoints {
  PointsX3 pts;
  double diameter = 0.0;  // max pairwise distance, recomputed on construction

  ModelPoints() = default;
  explicit ModelPoints(const PointsX3& pts_);
};

// Canonical-frame symmetry transforms; always contains the identity.
struct SymmetrySet {
  std::vector<RigidTransform> transforms{RigidTransform{}};

  SymmetrySet() = default;
  explicit SymmetrySet(std::vector<RigidTransform> ts);
};

struct InstanceMetrics {
  std::string id;
  double rot_err_deg = 0.0;
  double trans_err_m = 0.0;
  double iou = 0.0;
  double add = 0.0;
  double adds = 0.0;
  double mssd = 0.0;
  double mspd = 0.0;
};

struct MetricReport {
  std::vector<InstanceMetrics> instances;
  std::map<std::string, double> aggregates;
};

// Uniform inclusive grid of `count` thresholds from lo to hi.
struct ThresholdGrid {
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;

  std::vector<double> values() const;
};

// Fraction of pose pairs with geodesic rotation error <= deg AND translation
// error <= cm/100 meters. Boundaries count as success.
double threshold_accuracy(const std::vector<RigidTransform>& preds,
                          const std::vector<RigidTransform>& gts, double deg, double cm);

// Exact IoU of two oriented boxes: box a's polytope is clipped by b's six
// face half-spaces and the intersection volume integrated from the clipped
// facets.
double box_iou3d(const OrientedBox3& a, const OrientedBox3& b);

// Scale-normalized variant: pred's extents are rescaled so their mean
// matches gt's mean extent before the overlap is computed.
double box_iou3d_scale_normalized(const OrientedBox3& pred, const OrientedBox3& gt);

// Mean per-point distance between the two posed models.
double add_metric(const AnisoSimilarity& pred, const AnisoSimilarity& gt,
                  const ModelPoints& model);

// Mean nearest-neighbor distance from pred-posed points to gt-posed points.
double adds_metric(const AnisoSimilarity& pred, const AnisoSimilarity& gt,
                   const ModelPoints& model);

// Min over symmetries of the max per-point 3D distance between pred(x) and
// gt(s(x)).
double mssd(const AnisoSimilarity& pred, const AnisoSimilarity& gt, const ModelPoints& model,
            const SymmetrySet& sym);

// Projected-distance counterpart, in pixels.
double mspd(const AnisoSimilarity& pred, const AnisoSimilarity& gt, const ModelPoints& model,
            const SymmetrySet& sym, const Intrinsics& k);

// Mean over the threshold grid of the fraction of values >= threshold.
double auc(const std::vector<double>& values, const ThresholdGrid& grid = {0.25, 0.95, 15});

// Mean over the 2D grid of the joint accuracy (rot <= deg AND trans <= cm).
double vus(const std::vector<double>& rot_errs_deg, const std::vector<double>& trans_errs_m,
           const ThresholdGrid& rot_deg = {1.0, 15.0, 15},
           const ThresholdGrid& trans_cm = {1.0, 5.0, 5});

// Fills the aggregate map: the four named threshold accuracies, auc of iou,
// and vus over the error columns. Asserts adds <= add per instance.
MetricReport aggregate_report(std::vector<InstanceMetrics> instances);

}  // namespace posegeom
