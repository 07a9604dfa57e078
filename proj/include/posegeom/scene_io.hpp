#pragma once

#include <filesystem>

#include "posegeom/synth.hpp"

namespace posegeom {

// Layout: <dir>/scene.json plus one depth/nocs/pointmap tensor file per frame.
// A single-frame scene is exactly four files.
void save_scene(const std::filesystem::path& dir, const SyntheticScene& scene);
SyntheticScene load_scene(const std::filesystem::path& dir);

}  // namespace posegeom
