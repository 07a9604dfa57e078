#pragma once

#include <json.hpp>

#include "posegeom/camera.hpp"
#include "posegeom/errors.hpp"
#include "posegeom/transforms.hpp"

namespace posegeom {

using Json = nlohmann::ordered_json;

inline Json json_vec3(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Json json_rotation(const Rotation3& r) {
  const Mat3& m = r.matrix();
  Json a = Json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) a.push_back(m(i, k));
  }
  return a;
}

inline Rotation3 rotation_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 9) throw SchemaError("expected a 9-element rotation array");
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) m(i, k) = j[3 * i + k].get<double>();
  }
  return Rotation3(m);
}

inline Json json_rigid(const RigidTransform& p) {
  return Json{{"r", json_rotation(p.r)}, {"t", json_vec3(p.t)}};
}

inline RigidTransform rigid_from_json(const Json& j) {
  if (!j.contains("r") || !j.contains("t")) throw SchemaError("rigid pose needs r and t");
  return RigidTransform{rotation_from_json(j.at("r")), vec3_from_json(j.at("t"))};
}

inline Json json_sa3(const AnisoSimilarity& p) {
  return Json{{"r", json_rotation(p.r)}, {"scale", json_vec3(p.scale)}, {"t", json_vec3(p.t)}};
}

inline AnisoSimilarity sa3_from_json(const Json& j) {
  if (!j.contains("r") || !j.contains("scale") || !j.contains("t")) {
    throw SchemaError("anisotropic pose needs r, scale, and t");
  }
  return AnisoSimilarity(rotation_from_json(j.at("r")), vec3_from_json(j.at("scale")),
                         vec3_from_json(j.at("t")));
}

inline Json json_intrinsics(const Intrinsics& k) {
  return Json{{"fx", k.fx},       {"fy", k.fy},           {"cx", k.cx},
              {"cy", k.cy},       {"width", k.width},     {"height", k.height}};
}

inline Intrinsics intrinsics_from_json(const Json& j) {
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"}) {
    if (!j.contains(key)) throw SchemaError(std::string("intrinsics missing ") + key);
  }
  return Intrinsics(j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                    j.at("cy").get<double>(), j.at("width").get<int>(), j.at("height").get<int>());
}

}  // namespace posegeom
