#include "posegeom/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace posegeom {

namespace {

void put_bytes(std::string& buf, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_bytes(const std::string& buf, size_t& pos, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  pos += n;
  return v;
}

size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::kF32: return 4;
    case Dtype::kF64: return 8;
    case Dtype::kU8: return 1;
  }
  throw SchemaError("unknown tensor dtype");
}

}  // namespace

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (std::uint64_t s : shape) n *= s;
  return n;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const std::uint64_t n = t.element_count();
  std::string buf;
  buf.reserve(14 + 8 * t.shape.size() + n * dtype_size(t.dtype));
  buf.append("PGTN", 4);
  put_bytes(buf, 1, 2);  // version
  put_bytes(buf, static_cast<std::uint16_t>(t.dtype), 2);
  put_bytes(buf, t.shape.size(), 2);
  for (std::uint64_t s : t.shape) put_bytes(buf, s, 8);

  switch (t.dtype) {
    case Dtype::kF32:
      if (t.f32.size() != n) throw SchemaError("f32 payload size does not match shape");
      for (float v : t.f32) put_bytes(buf, std::bit_cast<std::uint32_t>(v), 4);
      break;
    case Dtype::kF64:
      if (t.f64.size() != n) throw SchemaError("f64 payload size does not match shape");
      for (double v : t.f64) put_bytes(buf, std::bit_cast<std::uint64_t>(v), 8);
      break;
    case Dtype::kU8:
      if (t.u8.size() != n) throw SchemaError("u8 payload size does not match shape");
      buf.append(reinterpret_cast<const char*>(t.u8.data()), t.u8.size());
      break;
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());

  if (buf.size() < 10 || buf.compare(0, 4, "PGTN") != 0) {
    throw SchemaError("bad tensor magic: " + path.string());
  }
  size_t pos = 4;
  const auto version = get_bytes(buf, pos, 2);
  if (version != 1) throw SchemaError("unsupported tensor version");
  const auto dtype_code = get_bytes(buf, pos, 2);
  if (dtype_code < 1 || dtype_code > 3) throw SchemaError("unknown tensor dtype code");
  Tensor t;
  t.dtype = static_cast<Dtype>(dtype_code);
  const auto ndim = get_bytes(buf, pos, 2);
  if (buf.size() < pos + 8 * ndim) throw SchemaError("truncated tensor header");
  for (std::uint64_t i = 0; i < ndim; ++i) t.shape.push_back(get_bytes(buf, pos, 8));

  const std::uint64_t n = t.element_count();
  if (buf.size() - pos != n * dtype_size(t.dtype)) {
    throw SchemaError("tensor payload length does not match shape");
  }
  switch (t.dtype) {
    case Dtype::kF32:
      t.f32.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        t.f32.push_back(std::bit_cast<float>(static_cast<std::uint32_t>(get_bytes(buf, pos, 4))));
      }
      break;
    case Dtype::kF64:
      t.f64.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        t.f64.push_back(std::bit_cast<double>(get_bytes(buf, pos, 8)));
      }
      break;
    case Dtype::kU8:
      t.u8.assign(buf.begin() + static_cast<std::ptrdiff_t>(pos), buf.end());
      break;
  }
  return t;
}

Tensor tensor_from_depth(const DepthMap& d) {
  Tensor t;
  t.dtype = Dtype::kF64;
  t.shape = {static_cast<std::uint64_t>(d.height()), static_cast<std::uint64_t>(d.width())};
  t.f64.reserve(d.values.size());
  for (int v = 0; v < d.height(); ++v) {
    for (int u = 0; u < d.width(); ++u) t.f64.push_back(d.values(v, u));
  }
  return t;
}

DepthMap depth_from_tensor(const Tensor& t) {
  if (t.dtype != Dtype::kF64 || t.shape.size() != 2) {
    throw SchemaError("depth tensor must be f64 with 2 dims");
  }
  DepthMap d;
  d.values.resize(static_cast<Eigen::Index>(t.shape[0]), static_cast<Eigen::Index>(t.shape[1]));
  size_t i = 0;
  for (Eigen::Index v = 0; v < d.values.rows(); ++v) {
    for (Eigen::Index u = 0; u < d.values.cols(); ++u) d.values(v, u) = t.f64[i++];
  }
  return d;
}

Tensor tensor_from_point_map(const PointMap& pm) {
  Tensor t;
  t.dtype = Dtype::kF64;
  t.shape = {static_cast<std::uint64_t>(pm.height), static_cast<std::uint64_t>(pm.width), 4};
  t.f64.reserve(static_cast<size_t>(pm.points.rows()) * 4);
  for (Eigen::Index i = 0; i < pm.points.rows(); ++i) {
    t.f64.push_back(pm.points(i, 0));
    t.f64.push_back(pm.points(i, 1));
    t.f64.push_back(pm.points(i, 2));
    t.f64.push_back(pm.confidence(i));
  }
  return t;
}

PointMap point_map_from_tensor(const Tensor& t) {
  if (t.dtype != Dtype::kF64 || t.shape.size() != 3 || t.shape[2] != 4) {
    throw SchemaError("point map tensor must be f64 HxWx4");
  }
  PointMap pm = PointMap::zeros(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]));
  for (Eigen::Index i = 0; i < pm.points.rows(); ++i) {
    pm.points(i, 0) = t.f64[4 * i];
    pm.points(i, 1) = t.f64[4 * i + 1];
    pm.points(i, 2) = t.f64[4 * i + 2];
    pm.confidence(i) = t.f64[4 * i + 3];
  }
  return pm;
}

Tensor tensor_from_nocs(const PointMap& nocs) {
  Tensor t;
  t.dtype = Dtype::kF64;
  t.shape = {static_cast<std::uint64_t>(nocs.height), static_cast<std::uint64_t>(nocs.width), 3};
  t.f64.reserve(static_cast<size_t>(nocs.points.rows()) * 3);
  for (Eigen::Index i = 0; i < nocs.points.rows(); ++i) {
    t.f64.push_back(nocs.points(i, 0));
    t.f64.push_back(nocs.points(i, 1));
    t.f64.push_back(nocs.points(i, 2));
  }
  return t;
}

PointMap nocs_from_tensor(const Tensor& t, const DepthMap& validity) {
  if (t.dtype != Dtype::kF64 || t.shape.size() != 3 || t.shape[2] != 3) {
    throw SchemaError("nocs tensor must be f64 HxWx3");
  }
  if (static_cast<int>(t.shape[0]) != validity.height() ||
      static_cast<int>(t.shape[1]) != validity.width()) {
    throw SchemaError("nocs tensor size does not match the depth map");
  }
  PointMap pm = PointMap::zeros(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]));
  for (int v = 0; v < pm.height; ++v) {
    for (int u = 0; u < pm.width; ++u) {
      const Eigen::Index i = pm.index(v, u);
      pm.points(i, 0) = t.f64[3 * i];
      pm.points(i, 1) = t.f64[3 * i + 1];
      pm.points(i, 2) = t.f64[3 * i + 2];
      pm.confidence(i) = validity.values(v, u) > 0.0 ? 1.0 : 0.0;
    }
  }
  return pm;
}

Tensor tensor_from_points(const PointsX3& pts) {
  Tensor t;
  t.dtype = Dtype::kF64;
  t.shape = {static_cast<std::uint64_t>(pts.rows()), 3};
  t.f64.reserve(static_cast<size_t>(pts.rows()) * 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    t.f64.push_back(pts(i, 0));
    t.f64.push_back(pts(i, 1));
    t.f64.push_back(pts(i, 2));
  }
  return t;
}

PointsX3 points_from_tensor(const Tensor& t) {
  if (t.dtype != Dtype::kF64 || t.shape.size() != 2 || t.shape[1] != 3) {
    throw SchemaError("point tensor must be f64 Nx3");
  }
  PointsX3 pts(static_cast<Eigen::Index>(t.shape[0]), 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    pts(i, 0) = t.f64[3 * i];
    pts(i, 1) = t.f64[3 * i + 1];
    pts(i, 2) = t.f64[3 * i + 2];
  }
  return pts;
}

}  // namespace posegeom
