#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "posegeom/config.hpp"
#include "posegeom/synth.hpp"

namespace posegeom {

struct RunOptions {
  std::filesystem::path out;
  int workers = 1;
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
};

// Outcome of the two-step solver for one query frame.
struct RelFrameResult {
  int frame = 0;  // query frame index within the scene
  double rot_err_deg = 0.0;
  double trans_err_m = 0.0;
  double anchor_rmse = 0.0;
  double query_rmse = 0.0;
  std::string error;  // empty on success
  bool ok = false;
};

// Outcome of the anisotropic NOCS fit on one scene.
struct AbsSceneResult {
  double rot_err_deg = 0.0;
  double trans_err_m = 0.0;
  double scale_rel_err = 0.0;
  double rmse = 0.0;
  int iterations = 0;
  bool monotone = true;
  std::string error;
  bool ok = false;
};

// Corrupts the scene, backprojects camera points from the corrupted depth,
// and runs the two-step solver for every query frame. pm_scale multiplies
// point-map coordinates only, exercising the solver's scale invariance.
std::vector<RelFrameResult> solve_rel_scene(const SyntheticScene& clean,
                                            const CorruptionSpec& cor, double pm_scale);

// Corrupts the scene, samples up to sample_pixels valid pixels per frame,
// pools multi-frame observations of the same canonical point in the anchor
// camera, and fits the anisotropic pose. Errors are against the anchor
// frame's ground truth.
AbsSceneResult solve_abs_scene(const SyntheticScene& clean, const CorruptionSpec& cor,
                               int sample_pixels, std::uint64_t sampler_seed);

// Runs fn(i) for i in [0, n) across `workers` threads; exceptions inside fn
// escape after all workers join (first by index wins).
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// Dispatches cfg.task and returns the process exit code.
int run_task(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace posegeom
