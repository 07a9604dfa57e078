#include "posegeom/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

namespace posegeom {

namespace {

using Polygon = std::vector<Vec3>;
using Polyhedron = std::vector<Polygon>;

// Outward-CCW quad faces of the box; corner index bit j set means +extent/2
// along axis j.
Polyhedron box_polyhedron(const OrientedBox3& b) {
  std::array<Vec3, 8> corner;
  for (int i = 0; i < 8; ++i) {
    const Vec3 c((i & 1) ? 0.5 : -0.5, (i & 2) ? 0.5 : -0.5, (i & 4) ? 0.5 : -0.5);
    corner[i] = b.pose.apply(Vec3(c.cwiseProduct(b.extents)));
  }
  static const int faces[6][4] = {{1, 3, 7, 5}, {0, 4, 6, 2}, {2, 6, 7, 3},
                                  {0, 1, 5, 4}, {4, 5, 7, 6}, {0, 2, 3, 1}};
  Polyhedron ph;
  for (const auto& f : faces) {
    ph.push_back({corner[f[0]], corner[f[1]], corner[f[2]], corner[f[3]]});
  }
  return ph;
}

struct HalfSpace {
  Vec3 n;    // unit outward normal; the kept region is n.x <= d
  double d;
};

std::array<HalfSpace, 6> box_halfspaces(const OrientedBox3& b) {
  std::array<HalfSpace, 6> hs;
  int k = 0;
  for (int j = 0; j < 3; ++j) {
    for (const double sgn : {1.0, -1.0}) {
      const Vec3 n = sgn * b.pose.r.matrix().col(j);
      hs[k++] = {n, n.dot(b.pose.t) + b.extents(j) / 2.0};
    }
  }
  return hs;
}

// Clips every face against the half-space and closes the cut with a new cap
// face lying on the plane, wound CCW about +n so it stays outward. Vertices
// within the tolerance band count as on-plane and are kept without spawning
// crossings, so coincident faces (identical or touching boxes) survive intact
// instead of being shredded by sign noise.
Polyhedron clip(const Polyhedron& ph, const HalfSpace& h) {
  const double eps = 1e-9 * std::max(1.0, std::abs(h.d));
  Polyhedron out;
  std::vector<Vec3> cap;
  for (const Polygon& face : ph) {
    Polygon kept;
    const size_t n = face.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec3& cur = face[i];
      const Vec3& nxt = face[(i + 1) % n];
      const double dc = h.n.dot(cur) - h.d;
      const double dn = h.n.dot(nxt) - h.d;
      if (dc <= eps) kept.push_back(cur);
      if ((dc < -eps && dn > eps) || (dc > eps && dn < -eps)) {
        const Vec3 hit = cur + (nxt - cur) * (dc / (dc - dn));
        kept.push_back(hit);
        cap.push_back(hit);
      }
    }
    if (kept.size() >= 3) out.push_back(std::move(kept));
  }

  std::vector<Vec3> uniq;
  for (const Vec3& p : cap) {
    bool dup = false;
    for (const Vec3& q : uniq) {
      if ((p - q).norm() < 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) uniq.push_back(p);
  }
  if (uniq.size() >= 3) {
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : uniq) centroid += p;
    centroid /= static_cast<double>(uniq.size());
    const Vec3 seed = std::abs(h.n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = (seed - seed.dot(h.n) * h.n).normalized();
    const Vec3 e2 = h.n.cross(e1);
    std::sort(uniq.begin(), uniq.end(), [&](const Vec3& p, const Vec3& q) {
      const Vec3 dp = p - centroid, dq = q - centroid;
      return std::atan2(e2.dot(dp), e1.dot(dp)) < std::atan2(e2.dot(dq), e1.dot(dq));
    });
    out.push_back(std::move(uniq));
  }
  return out;
}

double volume(const Polyhedron& ph) {
  double six_v = 0.0;
  for (const Polygon& face : ph) {
    for (size_t i = 1; i + 1 < face.size(); ++i) {
      six_v += face[0].dot(face[i].cross(face[i + 1]));
    }
  }
  return six_v / 6.0;
}

}  // namespace

OrientedBox3::OrientedBox3(const RigidTransform& pose_, const Vec3& extents_)
    : pose(pose_), extents(extents_) {
  if (!(extents.minCoeff() > 0.0)) {
    throw NonPositiveSize("box extents must be positive");
  }
}

ModelPoints::ModelPoints(const PointsX3& pts_) : pts(pts_) {
  if (pts.rows() < 4) {
    throw InsufficientPoints("a model needs at least 4 points");
  }
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pts.rows(); ++j) {
      diameter = std::max(diameter, (pts.row(i) - pts.row(j)).norm());
    }
  }
}

SymmetrySet::SymmetrySet(std::vector<RigidTransform> ts) : transforms(std::move(ts)) {
  for (const RigidTransform& t : transforms) {
    if ((t.r.matrix() - Mat3::Identity()).norm() < 1e-9 && t.t.norm() < 1e-9) return;
  }
  throw DegenerateInput("symmetry set must contain the identity");
}

std::vector<double> ThresholdGrid::values() const {
  if (count < 1) throw DegenerateInput("threshold grid needs at least one point");
  std::vector<double> v;
  if (count == 1) {
    v.push_back(lo);
    return v;
  }
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) v.push_back(lo + i * step);
  return v;
}

double threshold_accuracy(const std::vector<RigidTransform>& preds,
                          const std::vector<RigidTransform>& gts, double deg, double cm) {
  if (preds.size() != gts.size()) {
    throw LengthMismatch("prediction and ground-truth counts differ");
  }
  if (preds.empty()) {
    throw EmptyInput("no pose pairs to score");
  }
  size_t hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const bool ok = geodesic_angle_deg(preds[i].r, gts[i].r) <= deg &&
                    (preds[i].t - gts[i].t).norm() <= cm / 100.0;
    hits += ok ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double box_iou3d(const OrientedBox3& a, const OrientedBox3& b) {
  Polyhedron ph = box_polyhedron(a);
  for (const HalfSpace& h : box_halfspaces(b)) {
    ph = clip(ph, h);
    if (ph.empty()) break;
  }
  const double inter = std::max(0.0, volume(ph));
  const double uni = a.extents.prod() + b.extents.prod() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double box_iou3d_scale_normalized(const OrientedBox3& pred, const OrientedBox3& gt) {
  const double factor = gt.extents.mean() / pred.extents.mean();
  return box_iou3d(OrientedBox3(pred.pose, pred.extents * factor), gt);
}

double add_metric(const AnisoSimilarity& pred, const AnisoSimilarity& gt,
                  const ModelPoints& model) {
  const PointsX3 p = sa3_apply(pred, model.pts);
  const PointsX3 g = sa3_apply(gt, model.pts);
  return (p - g).rowwise().norm().mean();
}

double adds_metric(const AnisoSimilarity& pred, const AnisoSimilarity& gt,
                   const ModelPoints& model) {
  const PointsX3 p = sa3_apply(pred, model.pts);
  const PointsX3 g = sa3_apply(gt, model.pts);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double best = (p.row(i) - g.row(0)).norm();
    for (Eigen::Index j = 1; j < g.rows(); ++j) {
      best = std::min(best, (p.row(i) - g.row(j)).norm());
    }
    total += best;
  }
  return total / static_cast<double>(p.rows());
}

double mssd(const AnisoSimilarity& pred, const AnisoSimilarity& gt, const ModelPoints& model,
            const SymmetrySet& sym) {
  const PointsX3 p = sa3_apply(pred, model.pts);
  double best = std::numeric_limits<double>::infinity();
  for (const RigidTransform& s : sym.transforms) {
    const PointsX3 g = sa3_apply(gt, s.apply(model.pts));
    best = std::min(best, (p - g).rowwise().norm().maxCoeff());
  }
  return best;
}

double mspd(const AnisoSimilarity& pred, const AnisoSimilarity& gt, const ModelPoints& model,
            const SymmetrySet& sym, const Intrinsics& k) {
  const PixelsX2 p = project(sa3_apply(pred, model.pts), k);
  double best = std::numeric_limits<double>::infinity();
  for (const RigidTransform& s : sym.transforms) {
    const PixelsX2 g = project(sa3_apply(gt, s.apply(model.pts)), k);
    best = std::min(best, (p - g).rowwise().norm().maxCoeff());
  }
  return best;
}

double auc(const std::vector<double>& values, const ThresholdGrid& grid) {
  if (values.empty()) {
    throw EmptyInput("auc needs at least one value");
  }
  double acc = 0.0;
  const std::vector<double> ts = grid.values();
  for (const double t : ts) {
    size_t hits = 0;
    for (const double v : values) hits += v >= t ? 1 : 0;
    acc += static_cast<double>(hits) / static_cast<double>(values.size());
  }
  return acc / static_cast<double>(ts.size());
}

double vus(const std::vector<double>& rot_errs_deg, const std::vector<double>& trans_errs_m,
           const ThresholdGrid& rot_deg, const ThresholdGrid& trans_cm) {
  if (rot_errs_deg.size() != trans_errs_m.size()) {
    throw LengthMismatch("rotation and translation error counts differ");
  }
  if (rot_errs_deg.empty()) {
    throw EmptyInput("vus needs at least one error pair");
  }
  const std::vector<double> rts = rot_deg.values();
  const std::vector<double> tts = trans_cm.values();
  double acc = 0.0;
  for (const double rt : rts) {
    for (const double tc : tts) {
      size_t hits = 0;
      for (size_t i = 0; i < rot_errs_deg.size(); ++i) {
        hits += (rot_errs_deg[i] <= rt && trans_errs_m[i] <= tc / 100.0) ? 1 : 0;
      }
      acc += static_cast<double>(hits) / static_cast<double>(rot_errs_deg.size());
    }
  }
  return acc / static_cast<double>(rts.size() * tts.size());
}

MetricReport aggregate_report(std::vector<InstanceMetrics> instances) {
  if (instances.empty()) {
    throw EmptyInput("cannot aggregate an empty instance list");
  }
  std::vector<double> ious, rots, trans;
  for (const InstanceMetrics& m : instances) {
    if (m.adds > m.add) {
      throw DegenerateInput("adds exceeds add; inconsistent metric inputs");
    }
    ious.push_back(m.iou);
    rots.push_back(m.rot_err_deg);
    trans.push_back(m.trans_err_m);
  }
  const auto acc = [&](double deg, double cm) {
    size_t hits = 0;
    for (const InstanceMetrics& m : instances) {
      hits += (m.rot_err_deg <= deg && m.trans_err_m <= cm / 100.0) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(instances.size());
  };
  MetricReport rep;
  rep.aggregates["acc_5deg_2cm"] = acc(5.0, 2.0);
  rep.aggregates["acc_5deg_5cm"] = acc(5.0, 5.0);
  rep.aggregates["acc_10deg_2cm"] = acc(10.0, 2.0);
  rep.aggregates["acc_10deg_5cm"] = acc(10.0, 5.0);
  rep.aggregates["auc_iou"] = auc(ious);
  rep.aggregates["vus"] = vus(rots, trans);
  rep.instances = std::move(instances);
  return rep;
}

}  // namespace posegeom
