#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "posegeom/json_util.hpp"
#include "posegeom/losses.hpp"
#include "posegeom/synth.hpp"

namespace posegeom {

struct GradcheckConfig {
  int points_per_loss = 20;
  double eps = 1e-6;
  double tol = 1e-4;
  bool break_gradient = false;  // negative-control fixture: corrupt one gradient
};

struct SweepConfig {
  std::string mode = "noise";  // noise | views
  std::vector<double> noise_sigmas = {0.0, 0.001, 0.005, 0.01};
  std::vector<int> frame_counts = {1, 2, 4};
  int scenes = 20;
};

struct EvalConfig {
  std::string pred_file;
  std::string gt_file;
  std::string models_dir;
  std::string iou_mode = "absolute";  // absolute | scale_normalized
};

struct ExperimentConfig {
  std::string task;  // optional in the file; must match the CLI subcommand when set
  std::uint64_t seed = 0;
  std::string out;
  int scenes = 1;
  std::string scene_dir;  // when set, solve commands read it instead of synthesizing
  int sample_pixels = 1024;
  double pm_scale = 1.0;  // multiplies point-map coordinates before solving
  SceneSpec scene;
  CorruptionSpec corruption;
  LossConfig loss;
  EvalConfig eval;
  GradcheckConfig gradcheck;
  SweepConfig sweep;
};

// Strict parse: unknown keys anywhere raise InvalidConfig naming key and section.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Full echo with every default materialized; round-trips through config_from_json.
Json config_to_json(const ExperimentConfig& cfg);

}  // namespace posegeom
