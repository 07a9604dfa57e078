#include "posegeom/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>
#include <vector>

#include "posegeom/alignment.hpp"
#include "posegeom/log.hpp"
#include "posegeom/losses.hpp"
#include "posegeom/metrics.hpp"
#include "posegeom/scene_io.hpp"
#include "posegeom/tensor_io.hpp"
#include "posegeom/version.hpp"

namespace posegeom {

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void emit_report(const Json& report, const std::filesystem::path& out) {
  if (out.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory: " + out.string());
  std::ofstream f(out / "report.json", std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write report.json in " + out.string());
  f << report.dump(2) << "\n";
  if (!f) throw IoError("write failed for report.json in " + out.string());
}

Json report_skeleton(const char* command, const ExperimentConfig& cfg) {
  Json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["config"] = config_to_json(cfg);
  return j;
}

std::string scene_subdir(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d", i);
  return buf;
}

SyntheticScene scene_for_index(const ExperimentConfig& cfg, int i) {
  if (!cfg.scene_dir.empty()) return load_scene(cfg.scene_dir);
  SceneSpec spec = cfg.scene;
  spec.seed = cfg.seed + static_cast<std::uint64_t>(i);
  return make_scene(spec);
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const ExperimentConfig& cfg, int workers) {
  if (cfg.out.empty()) throw InvalidConfig("synth needs an output directory (--out or \"out\")");
  const std::filesystem::path out(cfg.out);
  if (cfg.scenes == 1) {
    SceneSpec spec = cfg.scene;
    spec.seed = cfg.seed;
    save_scene(out, make_scene(spec));
  } else {
    parallel_for(cfg.scenes, workers, [&](int i) {
      SceneSpec spec = cfg.scene;
      spec.seed = cfg.seed + static_cast<std::uint64_t>(i);
      save_scene(out / scene_subdir(i), make_scene(spec));
    });
  }
  log_info("synth: wrote " + std::to_string(cfg.scenes) + " scene(s) to " + cfg.out);
  return 0;
}

// ---------------------------------------------------------------------------
// solve-rel

Json rel_frame_json(const RelFrameResult& r) {
  Json j;
  j["frame"] = r.frame;
  j["ok"] = r.ok;
  if (r.ok) {
    j["rot_err_deg"] = r.rot_err_deg;
    j["trans_err_m"] = r.trans_err_m;
    j["anchor_rmse"] = r.anchor_rmse;
    j["query_rmse"] = r.query_rmse;
  } else {
    j["error"] = r.error;
  }
  return j;
}

int cmd_solve_rel(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = cfg.scene_dir.empty() ? cfg.scenes : 1;
  std::vector<std::vector<RelFrameResult>> per_scene(n);
  std::vector<std::string> scene_error(n);

  parallel_for(n, opts.workers, [&](int i) {
    try {
      const SyntheticScene clean = scene_for_index(cfg, i);
      CorruptionSpec cor = cfg.corruption;
      cor.seed = cfg.corruption.seed + static_cast<std::uint64_t>(i);
      per_scene[i] = solve_rel_scene(clean, cor, cfg.pm_scale);
    } catch (const Error& e) {
      scene_error[i] = e.what();
    }
  });

  Json report = report_skeleton("solve-rel", cfg);
  Json scenes = Json::array();
  std::vector<double> rot, trans;
  int solved = 0, failed = 0;
  for (int i = 0; i < n; ++i) {
    Json js;
    js["scene"] = i;
    if (!scene_error[i].empty()) {
      js["error"] = scene_error[i];
      ++failed;
    } else {
      Json frames = Json::array();
      for (const RelFrameResult& r : per_scene[i]) {
        frames.push_back(rel_frame_json(r));
        if (r.ok) {
          rot.push_back(r.rot_err_deg);
          trans.push_back(r.trans_err_m);
          ++solved;
        } else {
          ++failed;
        }
      }
      js["frames"] = std::move(frames);
    }
    scenes.push_back(std::move(js));
  }
  report["scenes"] = std::move(scenes);
  report["aggregates"] = Json{{"solved", solved},
                              {"failed", failed},
                              {"mean_rot_err_deg", mean_of(rot)},
                              {"median_rot_err_deg", median_of(rot)},
                              {"mean_trans_err_m", mean_of(trans)},
                              {"median_trans_err_m", median_of(trans)}};
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_report(report, opts.out);
  return 0;
}

// ---------------------------------------------------------------------------
// solve-abs

Json abs_scene_json(int i, const AbsSceneResult& r) {
  Json j;
  j["scene"] = i;
  j["ok"] = r.ok;
  if (r.ok) {
    j["rot_err_deg"] = r.rot_err_deg;
    j["trans_err_m"] = r.trans_err_m;
    j["scale_rel_err"] = r.scale_rel_err;
    j["rmse"] = r.rmse;
    j["iterations"] = r.iterations;
    j["monotone"] = r.monotone;
  } else {
    j["error"] = r.error;
  }
  return j;
}

int cmd_solve_abs(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = cfg.scene_dir.empty() ? cfg.scenes : 1;
  std::vector<AbsSceneResult> results(n);

  parallel_for(n, opts.workers, [&](int i) {
    try {
      const SyntheticScene clean = scene_for_index(cfg, i);
      CorruptionSpec cor = cfg.corruption;
      cor.seed = cfg.corruption.seed + static_cast<std::uint64_t>(i);
      results[i] = solve_abs_scene(clean, cor, cfg.sample_pixels,
                                   cfg.seed + static_cast<std::uint64_t>(i));
    } catch (const Error& e) {
      results[i].ok = false;
      results[i].error = e.what();
    }
  });

  Json report = report_skeleton("solve-abs", cfg);
  Json scenes = Json::array();
  std::vector<double> rot, trans, scale;
  int solved = 0, failed = 0;
  for (int i = 0; i < n; ++i) {
    scenes.push_back(abs_scene_json(i, results[i]));
    if (results[i].ok) {
      rot.push_back(results[i].rot_err_deg);
      trans.push_back(results[i].trans_err_m);
      scale.push_back(results[i].scale_rel_err);
      ++solved;
    } else {
      ++failed;
    }
  }
  report["scenes"] = std::move(scenes);
  report["aggregates"] = Json{{"solved", solved},
                              {"failed", failed},
                              {"mean_rot_err_deg", mean_of(rot)},
                              {"median_rot_err_deg", median_of(rot)},
                              {"mean_trans_err_m", mean_of(trans)},
                              {"median_trans_err_m", median_of(trans)},
                              {"mean_scale_rel_err", mean_of(scale)}};
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_report(report, opts.out);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalRecord {
  AnisoSimilarity pose;
  std::string model;
  SymmetrySet sym;
};

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SchemaError(path.string() + ": parse error: " + e.what());
  }
  return j;
}

std::map<std::string, EvalRecord> read_instances(const Json& j, const std::string& label) {
  if (!j.contains("instances") || !j.at("instances").is_array()) {
    throw SchemaError(label + " must hold an \"instances\" array");
  }
  std::map<std::string, EvalRecord> out;
  for (const Json& ji : j.at("instances")) {
    for (const auto& item : ji.items()) {
      if (item.key() != "id" && item.key() != "model" && item.key() != "pose" &&
          item.key() != "symmetries") {
        throw SchemaError("unknown key \"" + item.key() + "\" in " + label + " instance");
      }
    }
    if (!ji.contains("id") || !ji.contains("model") || !ji.contains("pose")) {
      throw SchemaError(label + " instance needs id, model, and pose");
    }
    EvalRecord rec;
    rec.model = ji.at("model").get<std::string>();
    rec.pose = sa3_from_json(ji.at("pose"));
    if (ji.contains("symmetries")) {
      std::vector<RigidTransform> ts{RigidTransform{}};
      for (const Json& js : ji.at("symmetries")) ts.push_back(rigid_from_json(js));
      rec.sym = SymmetrySet(std::move(ts));
    }
    const std::string id = ji.at("id").get<std::string>();
    if (!out.emplace(id, std::move(rec)).second) {
      throw SchemaError("duplicate instance id \"" + id + "\" in " + label);
    }
  }
  return out;
}

int cmd_eval(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.eval.pred_file.empty() || cfg.eval.gt_file.empty() || cfg.eval.models_dir.empty()) {
    throw InvalidConfig("eval needs eval.pred_file, eval.gt_file, and eval.models_dir");
  }
  const Json jpred = load_json_file(cfg.eval.pred_file);
  const Json jgt = load_json_file(cfg.eval.gt_file);
  if (!jgt.contains("intrinsics")) {
    throw SchemaError("ground-truth file must carry \"intrinsics\" for pixel-space metrics");
  }
  const Intrinsics k = intrinsics_from_json(jgt.at("intrinsics"));
  const auto preds = read_instances(jpred, "prediction file");
  const auto gts = read_instances(jgt, "ground-truth file");

  std::vector<std::string> ids;
  for (const auto& [id, rec] : preds) {
    if (gts.count(id)) ids.push_back(id);
  }
  if (ids.empty()) throw SchemaError("prediction and ground-truth files share no instance ids");

  std::map<std::string, ModelPoints> models;
  auto model_for = [&](const std::string& name) -> const ModelPoints& {
    auto it = models.find(name);
    if (it != models.end()) return it->second;
    const std::filesystem::path path = std::filesystem::path(cfg.eval.models_dir) / (name + ".pgtn");
    if (!std::filesystem::exists(path)) throw MissingModel("no model file " + path.string());
    return models.emplace(name, ModelPoints(points_from_tensor(read_tensor(path)))).first->second;
  };

  std::vector<InstanceMetrics> instances;
  for (const std::string& id : ids) {
    const EvalRecord& p = preds.at(id);
    const EvalRecord& g = gts.at(id);
    const ModelPoints& model = model_for(g.model);
    InstanceMetrics m;
    m.id = id;
    m.rot_err_deg = geodesic_angle_deg(p.pose.r, g.pose.r);
    m.trans_err_m = (p.pose.t - g.pose.t).norm();
    const OrientedBox3 pbox(RigidTransform{p.pose.r, p.pose.t}, p.pose.scale);
    const OrientedBox3 gbox(RigidTransform{g.pose.r, g.pose.t}, g.pose.scale);
    m.iou = cfg.eval.iou_mode == "absolute" ? box_iou3d(pbox, gbox)
                                            : box_iou3d_scale_normalized(pbox, gbox);
    m.add = add_metric(p.pose, g.pose, model);
    m.adds = adds_metric(p.pose, g.pose, model);
    m.mssd = mssd(p.pose, g.pose, model, g.sym);
    m.mspd = mspd(p.pose, g.pose, model, g.sym, k);
    instances.push_back(std::move(m));
  }

  const MetricReport mr = aggregate_report(std::move(instances));
  Json report = report_skeleton("eval", cfg);
  Json ji = Json::array();
  for (const InstanceMetrics& m : mr.instances) {
    ji.push_back(Json{{"id", m.id},
                      {"rot_err_deg", m.rot_err_deg},
                      {"trans_err_m", m.trans_err_m},
                      {"iou", m.iou},
                      {"add", m.add},
                      {"adds", m.adds},
                      {"mssd", m.mssd},
                      {"mspd", m.mspd}});
  }
  report["instances"] = std::move(ji);
  Json agg;
  for (const auto& [key, value] : mr.aggregates) agg[key] = value;
  report["aggregates"] = std::move(agg);
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_report(report, opts.out);
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

using LossFn = std::function<double(const VecX&, VecX*)>;

PointsX3 unflatten3(const VecX& x) {
  PointsX3 p(x.size() / 3, 3);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    p.row(i) << x(3 * i), x(3 * i + 1), x(3 * i + 2);
  }
  return p;
}

VecX flatten3(const PointsX3& p) {
  VecX x(p.rows() * 3);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    x.segment<3>(3 * i) = p.row(i).transpose();
  }
  return x;
}

struct CheckInstance {
  LossFn fn;
  VecX point;
};

// Every sampler below re-draws until the instance is safely away from the
// loss's non-smooth set, so central differences see a locally smooth
// function.
CheckInstance sample_chamfer(Rng& rng, bool squared) {
  const int N = 5, M = 7;
  PointsX3 a(N, 3), b(M, 3);
  for (;;) {
    for (int i = 0; i < N; ++i) a.row(i) << rng.normal(), rng.normal(), rng.normal();
    for (int i = 0; i < M; ++i) b.row(i) << rng.normal(), rng.normal(), rng.normal();
    bool ok = true;
    for (int i = 0; i < N && ok; ++i) {
      double d0 = std::numeric_limits<double>::infinity(), d1 = d0;
      for (int j = 0; j < M; ++j) {
        const double d = (a.row(i) - b.row(j)).norm();
        if (d < d0) {
          d1 = d0;
          d0 = d;
        } else if (d < d1) {
          d1 = d;
        }
      }
      ok = d0 > 1e-3 && d1 - d0 > 1e-3;
    }
    if (ok) break;
  }
  CheckInstance inst;
  inst.point = flatten3(a);
  inst.fn = [b, squared](const VecX& x, VecX* g) {
    const LossValue lv = chamfer_one_sided(unflatten3(x), b, squared);
    if (g) *g = lv.grad;
    return lv.value;
  };
  return inst;
}

CheckInstance sample_diversity(Rng& rng, double tau2) {
  const int M = 6;
  PointsX3 p(M, 3);
  for (;;) {
    for (int i = 0; i < M; ++i) {
      p.row(i) << 0.008 * rng.normal(), 0.008 * rng.normal(), 0.008 * rng.normal();
    }
    bool ok = true, active = false;
    for (int i = 0; i < M && ok; ++i) {
      for (int j = i + 1; j < M && ok; ++j) {
        const double d = (p.row(i) - p.row(j)).norm();
        ok = d > 1e-5 && std::abs(d - tau2) > 1e-4;
        if (d < tau2) active = true;
      }
    }
    if (ok && active) break;
  }
  CheckInstance inst;
  inst.point = flatten3(p);
  inst.fn = [tau2](const VecX& x, VecX* g) {
    const LossValue lv = diversity_loss(unflatten3(x), tau2);
    if (g) *g = lv.grad;
    return lv.value;
  };
  return inst;
}

CheckInstance sample_pose(Rng& rng) {
  Eigen::Matrix<double, 15, 1> pred, gt;
  for (;;) {
    for (int i = 0; i < 15; ++i) {
      pred(i) = rng.normal();
      gt(i) = rng.normal();
    }
    const double dr = (pred.head<9>() - gt.head<9>()).norm();
    const double dt = (pred.segment<3>(9) - gt.segment<3>(9)).norm();
    const double ds = (pred.tail<3>() - gt.tail<3>()).norm();
    if (dr > 1e-3 && dt > 1e-3 && ds > 1e-3) break;
  }
  CheckInstance inst;
  inst.point = pred;
  inst.fn = [gt](const VecX& x, VecX* g) {
    const LossValue lv = pose_loss_raw(x, gt);
    if (g) *g = lv.grad;
    return lv.value;
  };
  return inst;
}

CheckInstance sample_smooth_l1(Rng& rng, double beta) {
  const int N = 6;
  PointsX3 pred(N, 3), gt(N, 3);
  for (;;) {
    for (int i = 0; i < N; ++i) {
      pred.row(i) << 0.2 * rng.normal(), 0.2 * rng.normal(), 0.2 * rng.normal();
      gt.row(i) << 0.2 * rng.normal(), 0.2 * rng.normal(), 0.2 * rng.normal();
    }
    bool ok = true;
    for (int i = 0; i < N && ok; ++i) {
      for (int c = 0; c < 3 && ok; ++c) {
        ok = std::abs(std::abs(pred(i, c) - gt(i, c)) - beta) > 1e-4;
      }
    }
    if (ok) break;
  }
  CheckInstance inst;
  inst.point = flatten3(pred);
  inst.fn = [gt, beta](const VecX& x, VecX* g) {
    const LossValue lv = nocs_smooth_l1(unflatten3(x), gt, beta);
    if (g) *g = lv.grad;
    return lv.value;
  };
  return inst;
}

CheckInstance sample_infonce(Rng& rng, const LossConfig& lc) {
  const int N = 6, D = 4;
  MatX z(N, D);
  for (int i = 0; i < N; ++i) {
    Eigen::RowVector4d row;
    do {
      row << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    } while (row.norm() < 1e-6);
    z.row(i) = row / row.norm();
  }
  Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(N, N);
  MatX w(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      w(i, j) = rng.uniform();
      if (i != j && rng.uniform() < 0.3) mask(i, j) = 1;
    }
  }
  mask(0, 1) = mask(1, 0) = 1;  // at least one anchor has a positive
  CheckInstance inst;
  inst.point = VecX(N * D);
  for (int i = 0; i < N; ++i) inst.point.segment<D>(D * i) = z.row(i).transpose();
  const double tau = lc.tau_infonce, eps = lc.eps;
  inst.fn = [mask, w, tau, eps](const VecX& x, VecX* g) {
    MatX z(mask.rows(), x.size() / mask.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      z.row(i) = x.segment(i * z.cols(), z.cols()).transpose();
    }
    // Loose norm tolerance: finite-difference probes step off the unit sphere.
    const LossValue lv = info_nce(z, mask, w, tau, eps, 1e-3);
    if (g) *g = lv.grad;
    return lv.value;
  };
  return inst;
}

CheckInstance sample_aleatoric(Rng& rng, double alpha) {
  const int C = 2, H = 3, W = 4;
  std::vector<MatX> pred(C), gt(C);
  MatX sigma(H, W), mask(H, W);
  for (;;) {
    for (int c = 0; c < C; ++c) {
      pred[c].resize(H, W);
      gt[c].resize(H, W);
      for (int v = 0; v < H; ++v) {
        for (int u = 0; u < W; ++u) {
          pred[c](v, u) = rng.normal();
          gt[c](v, u) = rng.normal();
        }
      }
    }
    int masked = 0;
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) {
        sigma(v, u) = rng.uniform(0.5, 1.5);
        mask(v, u) = rng.uniform() < 0.8 ? 1.0 : 0.0;
        masked += mask(v, u) > 0.0;
      }
    }
    if (masked < 2) continue;
    bool ok = true;
    for (int c = 0; c < C && ok; ++c) {
      for (int v = 0; v < H && ok; ++v) {
        for (int u = 0; u < W && ok; ++u) {
          if (mask(v, u) == 0.0) continue;
          ok = std::abs(pred[c](v, u) - gt[c](v, u)) > 1e-4;
          if (ok && u + 1 < W && mask(v, u + 1) > 0.0) {
            ok = std::abs((pred[c](v, u + 1) - pred[c](v, u)) -
                          (gt[c](v, u + 1) - gt[c](v, u))) > 1e-4;
          }
          if (ok && v + 1 < H && mask(v + 1, u) > 0.0) {
            ok = std::abs((pred[c](v + 1, u) - pred[c](v, u)) -
                          (gt[c](v + 1, u) - gt[c](v, u))) > 1e-4;
          }
        }
      }
    }
    if (ok) break;
  }
  CheckInstance inst;
  inst.point = VecX(C * H * W);
  for (int c = 0; c < C; ++c) {
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) inst.point(c * H * W + v * W + u) = pred[c](v, u);
    }
  }
  inst.fn = [gt, sigma, alpha, mask, C, H, W](const VecX& x, VecX* g) {
    std::vector<MatX> p(C, MatX(H, W));
    for (int c = 0; c < C; ++c) {
      for (int v = 0; v < H; ++v) {
        for (int u = 0; u < W; ++u) p[c](v, u) = x(c * H * W + v * W + u);
      }
    }
    const LossValue lv = aleatoric_map_loss(p, gt, sigma, alpha, mask);
    if (g) *g = lv.grad;
    return lv.value;
  };
  return inst;
}

CheckInstance sample_scale(Rng& rng) {
  Vec3 gt_t, gt_s;
  double gt_scale = 0.0;
  VecX x(7);
  for (;;) {
    gt_t = rng.normal3();
    gt_s = rng.normal3();
    gt_scale = rng.uniform(0.5, 2.0);
    for (int i = 0; i < 6; ++i) x(i) = rng.normal();
    x(6) = rng.normal();
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) {
      ok = std::abs(x(i) - gt_t(i)) > 1e-4 && std::abs(x(3 + i) - gt_s(i)) > 1e-4;
    }
    if (ok && std::abs(x(6) - std::log(gt_scale)) > 1e-4) break;
  }
  CheckInstance inst;
  inst.point = x;
  inst.fn = [gt_t, gt_s, gt_scale](const VecX& v, VecX* g) {
    const LossValue lv =
        scale_loss(v.head<3>(), gt_t, v.segment<3>(3), gt_s, v(6), gt_scale);
    if (g) *g = lv.grad;
    return lv.value;
  };
  return inst;
}

CheckInstance sample_camera(Rng& rng, double delta) {
  Eigen::Matrix<double, 9, 1> pred, gt;
  for (;;) {
    const Eigen::Vector4d qp = rng.unit_quaternion_wxyz();
    const Eigen::Vector4d qg = rng.unit_quaternion_wxyz();
    pred.head<4>() = qp;
    gt.head<4>() = qg;
    for (int i = 4; i < 7; ++i) {
      pred(i) = rng.normal();
      gt(i) = rng.normal();
    }
    pred(7) = rng.uniform(0.5, 2.0);
    pred(8) = rng.uniform(0.5, 2.0);
    gt(7) = rng.uniform(0.5, 2.0);
    gt(8) = rng.uniform(0.5, 2.0);
    const double dot = qp.dot(qg);
    if (std::abs(dot) < 1e-3) continue;
    Eigen::Matrix<double, 9, 1> aligned = gt;
    if (dot < 0.0) aligned.head<4>() = -aligned.head<4>();
    bool ok = true;
    for (int i = 0; i < 9 && ok; ++i) {
      ok = std::abs(std::abs(pred(i) - aligned(i)) - delta) > 1e-4;
    }
    if (ok) break;
  }
  CheckInstance inst;
  inst.point = pred;
  inst.fn = [gt, delta](const VecX& x, VecX* g) {
    Eigen::Matrix<double, 9, 1> p = x;
    Eigen::Matrix<double, 9, 1> grad;
    const double value = camera_loss_raw(p, gt, delta, g ? &grad : nullptr);
    if (g) *g = grad;
    return value;
  };
  return inst;
}

int cmd_gradcheck(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const GradcheckConfig& gc = cfg.gradcheck;
  const LossConfig& lc = cfg.loss;

  using Sampler = std::function<CheckInstance(Rng&)>;
  const std::vector<std::pair<std::string, Sampler>> losses = {
      {"chamfer_squared", [&](Rng& r) { return sample_chamfer(r, true); }},
      {"chamfer_unsquared", [&](Rng& r) { return sample_chamfer(r, false); }},
      {"diversity", [&](Rng& r) { return sample_diversity(r, lc.tau2); }},
      {"pose", [&](Rng& r) { return sample_pose(r); }},
      {"nocs_smooth_l1", [&](Rng& r) { return sample_smooth_l1(r, lc.sl1_beta); }},
      {"infonce", [&](Rng& r) { return sample_infonce(r, lc); }},
      {"aleatoric", [&](Rng& r) { return sample_aleatoric(r, lc.alpha); }},
      {"scale", [&](Rng& r) { return sample_scale(r); }},
      {"camera", [&](Rng& r) { return sample_camera(r, lc.huber_delta); }},
  };

  Rng rng(cfg.seed, rng_stream::kSampler);
  Json rows = Json::array();
  bool all_passed = true;
  for (const auto& [name, sampler] : losses) {
    double worst = 0.0;
    bool passed = true;
    for (int k = 0; k < gc.points_per_loss; ++k) {
      CheckInstance inst = sampler(rng);
      LossFn fn = inst.fn;
      if (gc.break_gradient && name == "scale") {
        // Negative-control fixture: a deliberately wrong analytic gradient.
        fn = [inner = inst.fn](const VecX& x, VecX* g) {
          const double v = inner(x, g);
          if (g) *g *= 1.5;
          return v;
        };
      }
      const GradCheckReport rep = finite_diff_check(fn, inst.point, gc.eps, gc.tol);
      worst = std::max(worst, rep.max_rel_err);
      passed = passed && rep.passed;
    }
    rows.push_back(Json{{"name", name}, {"max_rel_err", worst}, {"passed", passed}});
    all_passed = all_passed && passed;
  }

  Json report = report_skeleton("gradcheck", cfg);
  report["losses"] = std::move(rows);
  report["tolerance"] = gc.tol;
  report["passed"] = all_passed;
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_report(report, opts.out);
  return all_passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepCell {
  std::string mode;
  double param = 0.0;
  int solved = 0, failed = 0;
  double median_rot = 0.0, mean_rot = 0.0;
  double median_trans = 0.0, mean_trans = 0.0;
};

SweepCell summarize_cell(const std::string& mode, double param,
                         const std::vector<double>& rot, const std::vector<double>& trans,
                         int solved, int failed) {
  SweepCell c;
  c.mode = mode;
  c.param = param;
  c.solved = solved;
  c.failed = failed;
  c.median_rot = median_of(rot);
  c.mean_rot = mean_of(rot);
  c.median_trans = median_of(trans);
  c.mean_trans = mean_of(trans);
  return c;
}

int cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const SweepConfig& sw = cfg.sweep;
  std::vector<SweepCell> cells;

  if (sw.mode == "noise") {
    if (cfg.scene.frames < 2) {
      throw InvalidConfig("a noise sweep needs scene.frames >= 2 for the relative solver");
    }
    for (double sigma : sw.noise_sigmas) {
      std::vector<std::vector<RelFrameResult>> per_scene(sw.scenes);
      parallel_for(sw.scenes, opts.workers, [&](int i) {
        SceneSpec spec = cfg.scene;
        spec.seed = cfg.seed + static_cast<std::uint64_t>(i);
        CorruptionSpec cor = cfg.corruption;
        cor.noise_sigma = sigma;
        cor.seed = cfg.corruption.seed + static_cast<std::uint64_t>(i);
        per_scene[i] = solve_rel_scene(make_scene(spec), cor, cfg.pm_scale);
      });
      std::vector<double> rot, trans;
      int solved = 0, failed = 0;
      for (const auto& frames : per_scene) {
        for (const RelFrameResult& r : frames) {
          if (r.ok) {
            rot.push_back(r.rot_err_deg);
            trans.push_back(r.trans_err_m);
            ++solved;
          } else {
            ++failed;
          }
        }
      }
      cells.push_back(summarize_cell("noise", sigma, rot, trans, solved, failed));
    }
  } else {  // views
    for (int frames : sw.frame_counts) {
      std::vector<AbsSceneResult> results(sw.scenes);
      parallel_for(sw.scenes, opts.workers, [&](int i) {
        SceneSpec spec = cfg.scene;
        spec.frames = frames;
        spec.seed = cfg.seed + static_cast<std::uint64_t>(i);
        CorruptionSpec cor = cfg.corruption;
        cor.seed = cfg.corruption.seed + static_cast<std::uint64_t>(i);
        results[i] = solve_abs_scene(make_scene(spec), cor, cfg.sample_pixels,
                                     cfg.seed + static_cast<std::uint64_t>(i));
      });
      std::vector<double> rot, trans;
      int solved = 0, failed = 0;
      for (const AbsSceneResult& r : results) {
        if (r.ok) {
          rot.push_back(r.rot_err_deg);
          trans.push_back(r.trans_err_m);
          ++solved;
        } else {
          ++failed;
        }
      }
      cells.push_back(
          summarize_cell("views", static_cast<double>(frames), rot, trans, solved, failed));
    }
  }

  Json report = report_skeleton("sweep", cfg);
  Json jcells = Json::array();
  for (const SweepCell& c : cells) {
    jcells.push_back(Json{{"mode", c.mode},
                          {"param", c.param},
                          {"solved", c.solved},
                          {"failed", c.failed},
                          {"median_rot_err_deg", c.median_rot},
                          {"mean_rot_err_deg", c.mean_rot},
                          {"median_trans_err_m", c.median_trans},
                          {"mean_trans_err_m", c.mean_trans}});
  }
  report["cells"] = std::move(jcells);
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_report(report, opts.out);

  if (!opts.out.empty()) {
    std::ofstream csv(opts.out / "sweep.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw IoError("cannot write sweep.csv in " + opts.out.string());
    csv << "mode,param,solved,failed,median_rot_err_deg,mean_rot_err_deg,"
           "median_trans_err_m,mean_trans_err_m\n";
    char line[256];
    for (const SweepCell& c : cells) {
      std::snprintf(line, sizeof(line), "%s,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                    c.mode.c_str(), c.param, c.solved, c.failed, c.median_rot, c.mean_rot,
                    c.median_trans, c.mean_trans);
      csv << line;
    }
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// exposed drivers

std::vector<RelFrameResult> solve_rel_scene(const SyntheticScene& clean,
                                            const CorruptionSpec& cor, double pm_scale) {
  if (clean.frames.size() < 2) {
    throw InvalidConfig("the relative solver needs a scene with at least 2 frames");
  }
  const SyntheticScene scene = corrupt(clean, cor);
  const SceneFrame& anchor = scene.frames[0];
  const PointMap anchor_cam = backproject(anchor.depth, anchor.intrinsics);
  PointMap anchor_pm = anchor.point_map;
  anchor_pm.points *= pm_scale;

  std::vector<RelFrameResult> out;
  for (size_t q = 1; q < scene.frames.size(); ++q) {
    RelFrameResult r;
    r.frame = static_cast<int>(q);
    try {
      const SceneFrame& query = scene.frames[q];
      const PointMap query_cam = backproject(query.depth, query.intrinsics);
      PointMap query_pm = query.point_map;
      query_pm.points *= pm_scale;
      const TwoStepResult ts =
          relative_pose_two_step(anchor_pm, anchor_cam, query_pm, query_cam);
      const RigidTransform& gt = clean.gt_relative[q - 1];
      r.rot_err_deg = geodesic_angle_deg(ts.relative.r, gt.r);
      r.trans_err_m = (ts.relative.t - gt.t).norm();
      r.anchor_rmse = ts.anchor_rmse;
      r.query_rmse = ts.query_rmse;
      r.ok = true;
    } catch (const Error& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

AbsSceneResult solve_abs_scene(const SyntheticScene& clean, const CorruptionSpec& cor,
                               int sample_pixels, std::uint64_t sampler_seed) {
  AbsSceneResult res;
  try {
    if (clean.frames.empty()) throw InvalidConfig("scene has no frames");
    const SyntheticScene scene = corrupt(clean, cor);
    const Eigen::Index total = scene.canonical_pts.rows();
    PointsX3 src_sum = PointsX3::Zero(total, 3);
    PointsX3 dst_sum = PointsX3::Zero(total, 3);
    VecX count = VecX::Zero(total);

    Rng rng(sampler_seed, rng_stream::kSampler);
    for (size_t s = 0; s < scene.frames.size(); ++s) {
      const SceneFrame& frame = scene.frames[s];
      const PointMap cam = backproject(frame.depth, frame.intrinsics);
      const RigidTransform to_anchor =
          s == 0 ? RigidTransform{} : se3_inverse(clean.gt_relative[s - 1]);

      std::vector<int> valid;
      for (int v = 0; v < frame.depth.height(); ++v) {
        for (int u = 0; u < frame.depth.width(); ++u) {
          if (frame.depth.values(v, u) > 0.0) valid.push_back(v * frame.depth.width() + u);
        }
      }
      const int take = std::min<int>(sample_pixels, static_cast<int>(valid.size()));
      for (int i = 0; i < take; ++i) {
        const int j = rng.uniform_int(i, static_cast<int>(valid.size()) - 1);
        std::swap(valid[i], valid[j]);
        const int pix = valid[i];
        const std::int64_t id = frame.pixel_point_index[pix];
        if (id < 0) continue;
        const Vec3 cam_pt(cam.points(pix, 0), cam.points(pix, 1), cam.points(pix, 2));
        src_sum.row(id) += frame.nocs.points.row(pix);
        dst_sum.row(id) += to_anchor.apply(cam_pt).transpose();
        count(id) += 1.0;
      }
    }

    Eigen::Index groups = 0;
    for (Eigen::Index i = 0; i < total; ++i) groups += count(i) > 0.0;
    WeightedCorrespondences c;
    c.src.resize(groups, 3);
    c.dst.resize(groups, 3);
    c.w.resize(groups);
    Eigen::Index out = 0;
    for (Eigen::Index i = 0; i < total; ++i) {
      if (count(i) == 0.0) continue;
      c.src.row(out) = src_sum.row(i) / count(i);
      c.dst.row(out) = dst_sum.row(i) / count(i);
      c.w(out) = count(i);
      ++out;
    }

    const Sa3FitResult fit = fit_sa3_nocs(c);
    const AnisoSimilarity& gt = clean.frames[0].gt_pose;
    res.rot_err_deg = geodesic_angle_deg(fit.transform.r, gt.r);
    res.trans_err_m = (fit.transform.t - gt.t).norm();
    res.scale_rel_err =
        ((fit.transform.scale - gt.scale).cwiseQuotient(gt.scale)).cwiseAbs().maxCoeff();
    res.rmse = fit.rmse;
    res.iterations = fit.iterations;
    res.monotone = true;
    for (size_t k = 1; k < fit.objective_history.size(); ++k) {
      if (fit.objective_history[k] > fit.objective_history[k - 1]) res.monotone = false;
    }
    res.ok = true;
  } catch (const Error& e) {
    res.error = e.what();
    res.ok = false;
  }
  return res;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int run_task(const ExperimentConfig& base, const RunOptions& opts) {
  ExperimentConfig cfg = base;
  if (opts.has_seed_override) cfg.seed = opts.seed_override;
  if (!opts.out.empty()) cfg.out = opts.out.string();
  if (cfg.task.empty()) throw InvalidConfig("no task given (set it in the config or the CLI)");

  RunOptions eff = opts;
  eff.out = cfg.out;
  if (cfg.task == "synth") return cmd_synth(cfg, opts.workers);
  if (cfg.task == "solve-rel") return cmd_solve_rel(cfg, eff);
  if (cfg.task == "solve-abs") return cmd_solve_abs(cfg, eff);
  if (cfg.task == "eval") return cmd_eval(cfg, eff);
  if (cfg.task == "gradcheck") return cmd_gradcheck(cfg, eff);
  if (cfg.task == "sweep") return cmd_sweep(cfg, eff);
  throw InvalidConfig("unknown task \"" + cfg.task + "\"");
}

}  // namespace posegeom
