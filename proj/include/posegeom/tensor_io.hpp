#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "posegeom/camera.hpp"

namespace posegeom {

// Binary tensor container: magic "PGTN", version u16, dtype u16, ndim u16,
// shape u64 per dim, payload row-major. All header fields and payload values
// little-endian.
enum class Dtype : std::uint16_t { kF32 = 1, kF64 = 2, kU8 = 3 };

struct Tensor {
  Dtype dtype = Dtype::kF64;
  std::vector<std::uint64_t> shape;
  std::vector<float> f32;
  std::vector<double> f64;
  std::vector<std::uint8_t> u8;

  std::uint64_t element_count() const;
};

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor tensor_from_depth(const DepthMap& d);
DepthMap depth_from_tensor(const Tensor& t);

// Point maps serialize as H x W x 4: xyz then confidence.
Tensor tensor_from_point_map(const PointMap& pm);
PointMap point_map_from_tensor(const Tensor& t);

// NOCS maps serialize as H x W x 3; validity is carried by the depth map.
Tensor tensor_from_nocs(const PointMap& nocs);
PointMap nocs_from_tensor(const Tensor& t, const DepthMap& validity);

Tensor tensor_from_points(const PointsX3& pts);
PointsX3 points_from_tensor(const Tensor& t);

}  // namespace posegeom
