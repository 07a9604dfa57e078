#pragma once

namespace posegeom {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace posegeom
