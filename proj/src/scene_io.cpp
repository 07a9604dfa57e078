#include "posegeom/scene_io.hpp"

#include <cstdio>
#include <fstream>

#include "posegeom/json_util.hpp"
#include "posegeom/tensor_io.hpp"

namespace posegeom {

namespace {

std::string frame_file(const char* stem, size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.pgtn", stem, i);
  return buf;
}

}  // namespace

void save_scene(const std::filesystem::path& dir, const SyntheticScene& scene) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create scene directory: " + dir.string());

  Json j;
  j["format"] = "posegeom-scene";
  j["version"] = 1;
  j["seed"] = scene.seed;
  j["object"] = scene.object;
  j["units"] = "meters";
  Json pts = Json::array();
  for (Eigen::Index i = 0; i < scene.canonical_pts.rows(); ++i) {
    pts.push_back(json_vec3(scene.canonical_pts.row(i).transpose()));
  }
  j["canonical_points"] = std::move(pts);

  Json frames = Json::array();
  for (size_t i = 0; i < scene.frames.size(); ++i) {
    const SceneFrame& f = scene.frames[i];
    Json jf;
    jf["gt_pose"] = json_sa3(f.gt_pose);
    jf["intrinsics"] = json_intrinsics(f.intrinsics);
    jf["depth_file"] = frame_file("depth", i);
    jf["nocs_file"] = frame_file("nocs", i);
    jf["point_map_file"] = frame_file("pointmap", i);
    jf["pixel_point_index"] = f.pixel_point_index;
    frames.push_back(std::move(jf));

    write_tensor(dir / frame_file("depth", i), tensor_from_depth(f.depth));
    write_tensor(dir / frame_file("nocs", i), tensor_from_nocs(f.nocs));
    write_tensor(dir / frame_file("pointmap", i), tensor_from_point_map(f.point_map));
  }
  j["frames"] = std::move(frames);

  Json rel = Json::array();
  for (const RigidTransform& p : scene.gt_relative) rel.push_back(json_rigid(p));
  j["gt_relative"] = std::move(rel);

  std::ofstream out(dir / "scene.json", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write scene.json in " + dir.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for scene.json in " + dir.string());
}

SyntheticScene load_scene(const std::filesystem::path& dir) {
  std::ifstream in(dir / "scene.json", std::ios::binary);
  if (!in) throw IoError("cannot open scene.json in " + dir.string());
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("scene.json parse error: ") + e.what());
  }
  if (j.value("format", "") != "posegeom-scene") throw SchemaError("not a scene directory");
  if (j.value("version", 0) != 1) throw SchemaError("unsupported scene version");

  SyntheticScene scene;
  scene.seed = j.value("seed", std::uint64_t{0});
  scene.object = j.value("object", "box");
  const Json& pts = j.at("canonical_points");
  scene.canonical_pts.resize(static_cast<Eigen::Index>(pts.size()), 3);
  for (size_t i = 0; i < pts.size(); ++i) {
    scene.canonical_pts.row(static_cast<Eigen::Index>(i)) =
        vec3_from_json(pts[i]).transpose();
  }

  for (const Json& jf : j.at("frames")) {
    SceneFrame f;
    f.gt_pose = sa3_from_json(jf.at("gt_pose"));
    f.intrinsics = intrinsics_from_json(jf.at("intrinsics"));
    f.depth = depth_from_tensor(read_tensor(dir / jf.at("depth_file").get<std::string>()));
    f.nocs = nocs_from_tensor(read_tensor(dir / jf.at("nocs_file").get<std::string>()), f.depth);
    f.point_map =
        point_map_from_tensor(read_tensor(dir / jf.at("point_map_file").get<std::string>()));
    f.pixel_point_index = jf.at("pixel_point_index").get<std::vector<std::int64_t>>();
    if (static_cast<int>(f.pixel_point_index.size()) !=
        f.intrinsics.width * f.intrinsics.height) {
      throw SchemaError("pixel_point_index length does not match the frame resolution");
    }
    scene.frames.push_back(std::move(f));
  }
  for (const Json& jr : j.at("gt_relative")) scene.gt_relative.push_back(rigid_from_json(jr));
  if (scene.gt_relative.size() + 1 != scene.frames.size() && !scene.frames.empty()) {
    throw SchemaError("gt_relative must hold one entry per non-anchor frame");
  }
  return scene;
}

}  // namespace posegeom
