#include "posegeom/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>

namespace posegeom {

namespace {

void check_keys(const Json& j, const char* section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidConfig(std::string(section) + " must be a JSON object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) {
      throw InvalidConfig("unknown key \"" + item.key() + "\" in " + section);
    }
  }
}

template <typename T>
void get_if(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SceneSpec scene_from_json(const Json& j) {
  check_keys(j, "scene", {"object", "n_points", "frames", "width", "height", "fov_deg",
                          "trans_range", "scale_lo", "scale_hi"});
  SceneSpec s;
  get_if(j, "object", s.object);
  get_if(j, "n_points", s.n_points);
  get_if(j, "frames", s.frames);
  get_if(j, "width", s.width);
  get_if(j, "height", s.height);
  get_if(j, "fov_deg", s.fov_deg);
  get_if(j, "trans_range", s.trans_range);
  get_if(j, "scale_lo", s.scale_lo);
  get_if(j, "scale_hi", s.scale_hi);
  if (s.n_points < 8) throw InvalidConfig("scene.n_points must be at least 8");
  if (s.frames < 1) throw InvalidConfig("scene.frames must be at least 1");
  if (s.width < 1 || s.height < 1) throw InvalidConfig("scene resolution must be positive");
  if (!(s.fov_deg > 0.0 && s.fov_deg < 180.0)) {
    throw InvalidConfig("scene.fov_deg must lie in (0, 180)");
  }
  if (!(s.scale_lo > 0.0 && s.scale_hi >= s.scale_lo)) {
    throw InvalidConfig("scene scale range must satisfy 0 < scale_lo <= scale_hi");
  }
  return s;
}

CorruptionSpec corruption_from_json(const Json& j) {
  check_keys(j, "corruption",
             {"noise_sigma", "outlier_frac", "outlier_scale", "confidence_model", "seed"});
  CorruptionSpec c;
  get_if(j, "noise_sigma", c.noise_sigma);
  get_if(j, "outlier_frac", c.outlier_frac);
  get_if(j, "outlier_scale", c.outlier_scale);
  get_if(j, "seed", c.seed);
  if (j.contains("confidence_model")) {
    const std::string m = j.at("confidence_model").get<std::string>();
    if (m == "oracle") {
      c.confidence_model = ConfidenceModel::kOracle;
    } else if (m == "uniform") {
      c.confidence_model = ConfidenceModel::kUniform;
    } else {
      throw InvalidConfig("corruption.confidence_model must be \"oracle\" or \"uniform\"");
    }
  }
  if (c.noise_sigma < 0.0) throw InvalidConfig("corruption.noise_sigma must be non-negative");
  if (c.outlier_frac < 0.0 || c.outlier_frac >= 1.0) {
    throw InvalidConfig("corruption.outlier_frac must lie in [0, 1)");
  }
  if (c.outlier_scale < 0.0) throw InvalidConfig("corruption.outlier_scale must be non-negative");
  return c;
}

LossConfig loss_from_json(const Json& j) {
  check_keys(j, "loss", {"tau_infonce", "tau2", "alpha", "sl1_beta", "eps", "huber_delta"});
  LossConfig l;
  get_if(j, "tau_infonce", l.tau_infonce);
  get_if(j, "tau2", l.tau2);
  get_if(j, "alpha", l.alpha);
  get_if(j, "sl1_beta", l.sl1_beta);
  get_if(j, "eps", l.eps);
  get_if(j, "huber_delta", l.huber_delta);
  if (!(l.tau_infonce > 0.0) || !(l.tau2 > 0.0) || !(l.sl1_beta > 0.0) ||
      !(l.huber_delta > 0.0) || !(l.eps > 0.0)) {
    throw InvalidConfig("loss temperatures, betas, deltas, and eps must be positive");
  }
  return l;
}

EvalConfig eval_from_json(const Json& j) {
  check_keys(j, "eval", {"pred_file", "gt_file", "models_dir", "iou_mode"});
  EvalConfig e;
  get_if(j, "pred_file", e.pred_file);
  get_if(j, "gt_file", e.gt_file);
  get_if(j, "models_dir", e.models_dir);
  get_if(j, "iou_mode", e.iou_mode);
  if (e.iou_mode != "absolute" && e.iou_mode != "scale_normalized") {
    throw InvalidConfig("eval.iou_mode must be \"absolute\" or \"scale_normalized\"");
  }
  return e;
}

GradcheckConfig gradcheck_from_json(const Json& j) {
  check_keys(j, "gradcheck", {"points_per_loss", "eps", "tol", "break_gradient"});
  GradcheckConfig g;
  get_if(j, "points_per_loss", g.points_per_loss);
  get_if(j, "eps", g.eps);
  get_if(j, "tol", g.tol);
  get_if(j, "break_gradient", g.break_gradient);
  if (g.points_per_loss < 1) throw InvalidConfig("gradcheck.points_per_loss must be positive");
  if (!(g.eps > 0.0) || !(g.tol > 0.0)) throw InvalidConfig("gradcheck.eps and tol must be positive");
  return g;
}

SweepConfig sweep_from_json(const Json& j) {
  check_keys(j, "sweep", {"mode", "noise_sigmas", "frame_counts", "scenes"});
  SweepConfig s;
  get_if(j, "mode", s.mode);
  get_if(j, "noise_sigmas", s.noise_sigmas);
  get_if(j, "frame_counts", s.frame_counts);
  get_if(j, "scenes", s.scenes);
  if (s.mode != "noise" && s.mode != "views") {
    throw InvalidConfig("sweep.mode must be \"noise\" or \"views\"");
  }
  if (s.scenes < 1) throw InvalidConfig("sweep.scenes must be positive");
  for (double v : s.noise_sigmas) {
    if (v < 0.0) throw InvalidConfig("sweep.noise_sigmas must be non-negative");
  }
  for (int v : s.frame_counts) {
    if (v < 1) throw InvalidConfig("sweep.frame_counts must be positive");
  }
  return s;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  check_keys(j, "config root",
             {"task", "seed", "out", "scenes", "scene_dir", "sample_pixels", "pm_scale", "scene",
              "corruption", "loss", "eval", "gradcheck", "sweep"});
  ExperimentConfig cfg;
  get_if(j, "task", cfg.task);
  get_if(j, "seed", cfg.seed);
  get_if(j, "out", cfg.out);
  get_if(j, "scenes", cfg.scenes);
  get_if(j, "scene_dir", cfg.scene_dir);
  get_if(j, "sample_pixels", cfg.sample_pixels);
  get_if(j, "pm_scale", cfg.pm_scale);
  if (!cfg.task.empty()) {
    static const char* kTasks[] = {"synth", "solve-abs", "solve-rel", "eval", "gradcheck",
                                   "sweep"};
    if (std::none_of(std::begin(kTasks), std::end(kTasks),
                     [&](const char* t) { return cfg.task == t; })) {
      throw InvalidConfig("unknown task \"" + cfg.task + "\"");
    }
  }
  if (cfg.scenes < 1) throw InvalidConfig("scenes must be positive");
  if (cfg.sample_pixels < 3) throw InvalidConfig("sample_pixels must be at least 3");
  if (!(cfg.pm_scale > 0.0)) throw InvalidConfig("pm_scale must be positive");
  if (j.contains("scene")) cfg.scene = scene_from_json(j.at("scene"));
  if (j.contains("corruption")) cfg.corruption = corruption_from_json(j.at("corruption"));
  if (j.contains("loss")) cfg.loss = loss_from_json(j.at("loss"));
  if (j.contains("eval")) cfg.eval = eval_from_json(j.at("eval"));
  if (j.contains("gradcheck")) cfg.gradcheck = gradcheck_from_json(j.at("gradcheck"));
  if (j.contains("sweep")) cfg.sweep = sweep_from_json(j.at("sweep"));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidConfig(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["task"] = cfg.task;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["scenes"] = cfg.scenes;
  j["scene_dir"] = cfg.scene_dir;
  j["sample_pixels"] = cfg.sample_pixels;
  j["pm_scale"] = cfg.pm_scale;
  j["scene"] = Json{{"object", cfg.scene.object},
                    {"n_points", cfg.scene.n_points},
                    {"frames", cfg.scene.frames},
                    {"width", cfg.scene.width},
                    {"height", cfg.scene.height},
                    {"fov_deg", cfg.scene.fov_deg},
                    {"trans_range", cfg.scene.trans_range},
                    {"scale_lo", cfg.scene.scale_lo},
                    {"scale_hi", cfg.scene.scale_hi}};
  j["corruption"] =
      Json{{"noise_sigma", cfg.corruption.noise_sigma},
           {"outlier_frac", cfg.corruption.outlier_frac},
           {"outlier_scale", cfg.corruption.outlier_scale},
           {"confidence_model",
            cfg.corruption.confidence_model == ConfidenceModel::kOracle ? "oracle" : "uniform"},
           {"seed", cfg.corruption.seed}};
  j["loss"] = Json{{"tau_infonce", cfg.loss.tau_infonce}, {"tau2", cfg.loss.tau2},
                   {"alpha", cfg.loss.alpha},             {"sl1_beta", cfg.loss.sl1_beta},
                   {"eps", cfg.loss.eps},                 {"huber_delta", cfg.loss.huber_delta}};
  j["eval"] = Json{{"pred_file", cfg.eval.pred_file},
                   {"gt_file", cfg.eval.gt_file},
                   {"models_dir", cfg.eval.models_dir},
                   {"iou_mode", cfg.eval.iou_mode}};
  j["gradcheck"] = Json{{"points_per_loss", cfg.gradcheck.points_per_loss},
                        {"eps", cfg.gradcheck.eps},
                        {"tol", cfg.gradcheck.tol},
                        {"break_gradient", cfg.gradcheck.break_gradient}};
  Json sigmas = Json::array();
  for (double v : cfg.sweep.noise_sigmas) sigmas.push_back(v);
  Json counts = Json::array();
  for (int v : cfg.sweep.frame_counts) counts.push_back(v);
  j["sweep"] = Json{{"mode", cfg.sweep.mode},
                    {"noise_sigmas", std::move(sigmas)},
                    {"frame_counts", std::move(counts)},
                    {"scenes", cfg.sweep.scenes}};
  return j;
}

}  // namespace posegeom
