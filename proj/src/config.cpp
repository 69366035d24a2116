#include "pardet/config.hpp"

#include <set>

#include "pardet/error.hpp"
#include "pardet/hash.hpp"
#include "pardet/io.hpp"

namespace pardet {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!j.is_object())
    throw Error(ErrorCode::ConfigError, "config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw Error(ErrorCode::ConfigError,
                  "unknown config key '" + key + "' in section '" + section + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig cfg;
  check_keys(j, "<root>", {"schema", "seed", "scene_count", "paths", "scene", "lidar", "stub",
                           "eval"});
  read(j, "seed", cfg.seed);
  read(j, "scene_count", cfg.scene_count);
  if (cfg.scene_count < 0) throw Error(ErrorCode::ConfigError, "scene_count must be >= 0");

  if (j.contains("paths")) {
    const json& p = j["paths"];
    check_keys(p, "paths", {"mesh_dir"});
    read(p, "mesh_dir", cfg.mesh_dir);
  }

  if (j.contains("scene")) {
    const json& s = j["scene"];
    check_keys(s, "scene",
               {"forklift_radius", "gripper_radius", "gripper_height", "opening_deg",
                "pallet_min_clearance", "vegetation_min_spacing", "stack_max", "wall_count",
                "pallet_region_radius", "pallet_base_radius", "pallet_count_max",
                "stack_probability", "box_probability", "vegetation_count_max",
                "vegetation_region_radius", "mast_height", "sensor_tilt_max_deg", "perlin",
                "placement_retries", "points_of_interest"});
    auto range = [&](const char* key, double& lo, double& hi) {
      if (!s.contains(key)) return;
      lo = s[key][0].get<double>();
      hi = s[key][1].get<double>();
    };
    SceneConfig& sc = cfg.scene;
    range("forklift_radius", sc.forklift_radius_min, sc.forklift_radius_max);
    range("gripper_radius", sc.gripper_radius_min, sc.gripper_radius_max);
    range("gripper_height", sc.gripper_height_min, sc.gripper_height_max);
    range("opening_deg", sc.opening_min_deg, sc.opening_max_deg);
    range("mast_height", sc.mast_height_min, sc.mast_height_max);
    read(s, "pallet_min_clearance", sc.pallet_min_clearance);
    read(s, "vegetation_min_spacing", sc.vegetation_min_spacing);
    read(s, "stack_max", sc.stack_max);
    if (s.contains("wall_count")) {
      sc.wall_count_min = s["wall_count"][0].get<int>();
      sc.wall_count_max = s["wall_count"][1].get<int>();
    }
    read(s, "pallet_region_radius", sc.pallet_region_radius);
    read(s, "pallet_base_radius", sc.pallet_base_radius);
    read(s, "pallet_count_max", sc.pallet_count_max);
    read(s, "stack_probability", sc.stack_probability);
    read(s, "box_probability", sc.box_probability);
    read(s, "vegetation_count_max", sc.vegetation_count_max);
    read(s, "vegetation_region_radius", sc.vegetation_region_radius);
    read(s, "sensor_tilt_max_deg", sc.sensor_tilt_max_deg);
    read(s, "placement_retries", sc.placement_retries);
    if (s.contains("perlin")) {
      const json& p = s["perlin"];
      check_keys(p, "scene.perlin", {"octaves", "persistence", "frequency", "amplitude"});
      read(p, "octaves", sc.perlin_octaves);
      read(p, "persistence", sc.perlin_persistence);
      read(p, "frequency", sc.perlin_frequency);
      read(p, "amplitude", sc.perlin_amplitude);
    }
    if (s.contains("points_of_interest")) {
      sc.points_of_interest.clear();
      for (const json& pt : s["points_of_interest"])
        sc.points_of_interest.push_back(
            {pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
    }
    sc.validate();
  }

  if (j.contains("lidar")) {
    const json& l = j["lidar"];
    check_keys(l, "lidar",
               {"ray_table", "ray_count", "max_range", "budget", "cull_thresholds"});
    read(l, "ray_table", cfg.lidar.ray_table);
    read(l, "ray_count", cfg.lidar.ray_count);
    read(l, "max_range", cfg.lidar.max_range);
    read(l, "budget", cfg.lidar.budget);
    if (l.contains("cull_thresholds")) {
      const json& c = l["cull_thresholds"];
      check_keys(c, "lidar.cull_thresholds", {"gripper", "loading_platform", "pallet"});
      read(c, "gripper", cfg.lidar.cull.gripper);
      read(c, "loading_platform", cfg.lidar.cull.loading_platform);
      read(c, "pallet", cfg.lidar.cull.pallet);
    }
    if (cfg.lidar.max_range <= 0 || cfg.lidar.budget < 1 || cfg.lidar.ray_count < 1)
      throw Error(ErrorCode::ConfigError, "lidar parameters must be positive");
  }

  if (j.contains("stub")) {
    const json& s = j["stub"];
    check_keys(s, "stub",
               {"position_sigma", "rotation_sigma_deg", "opening_sigma_deg",
                "class_confusion_rate", "false_positive_rate", "miss_rate", "confidence_model",
                "queries"});
    read(s, "position_sigma", cfg.stub.position_sigma);
    read(s, "rotation_sigma_deg", cfg.stub.rotation_sigma_deg);
    read(s, "opening_sigma_deg", cfg.stub.opening_sigma_deg);
    read(s, "class_confusion_rate", cfg.stub.class_confusion_rate);
    read(s, "false_positive_rate", cfg.stub.false_positive_rate);
    read(s, "miss_rate", cfg.stub.miss_rate);
    if (s.contains("confidence_model"))
      cfg.stub.confidence_model =
          confidence_model_from_name(s["confidence_model"].get<std::string>());
    read(s, "queries", cfg.stub.queries);
    cfg.stub.validate();
  }

  if (j.contains("eval")) {
    const json& e = j["eval"];
    check_keys(e, "eval", {"cd_threshold"});
    read(e, "cd_threshold", cfg.eval.cd_threshold);
    cfg.eval.validate();
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  json j = read_json(path);
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

json PipelineConfig::to_json() const {
  json j;
  j["schema"] = "pardet/config@1";
  j["seed"] = seed;
  j["scene_count"] = scene_count;
  j["paths"] = {{"mesh_dir", mesh_dir}};
  const SceneConfig& sc = scene;
  json poi = json::array();
  for (const Vec3& p : sc.points_of_interest) poi.push_back({p.x, p.y, p.z});
  j["scene"] = {{"forklift_radius", {sc.forklift_radius_min, sc.forklift_radius_max}},
                {"gripper_radius", {sc.gripper_radius_min, sc.gripper_radius_max}},
                {"gripper_height", {sc.gripper_height_min, sc.gripper_height_max}},
                {"opening_deg", {sc.opening_min_deg, sc.opening_max_deg}},
                {"pallet_min_clearance", sc.pallet_min_clearance},
                {"vegetation_min_spacing", sc.vegetation_min_spacing},
                {"stack_max", sc.stack_max},
                {"wall_count", {sc.wall_count_min, sc.wall_count_max}},
                {"pallet_region_radius", sc.pallet_region_radius},
                {"pallet_base_radius", sc.pallet_base_radius},
                {"pallet_count_max", sc.pallet_count_max},
                {"stack_probability", sc.stack_probability},
                {"box_probability", sc.box_probability},
                {"vegetation_count_max", sc.vegetation_count_max},
                {"vegetation_region_radius", sc.vegetation_region_radius},
                {"mast_height", {sc.mast_height_min, sc.mast_height_max}},
                {"sensor_tilt_max_deg", sc.sensor_tilt_max_deg},
                {"perlin",
                 {{"octaves", sc.perlin_octaves},
                  {"persistence", sc.perlin_persistence},
                  {"frequency", sc.perlin_frequency},
                  {"amplitude", sc.perlin_amplitude}}},
                {"placement_retries", sc.placement_retries},
                {"points_of_interest", poi}};
  j["lidar"] = {{"ray_table", lidar.ray_table},
                {"ray_count", lidar.ray_count},
                {"max_range", lidar.max_range},
                {"budget", lidar.budget},
                {"cull_thresholds",
                 {{"gripper", lidar.cull.gripper},
                  {"loading_platform", lidar.cull.loading_platform},
                  {"pallet", lidar.cull.pallet}}}};
  j["stub"] = {{"position_sigma", stub.position_sigma},
               {"rotation_sigma_deg", stub.rotation_sigma_deg},
               {"opening_sigma_deg", stub.opening_sigma_deg},
               {"class_confusion_rate", stub.class_confusion_rate},
               {"false_positive_rate", stub.false_positive_rate},
               {"miss_rate", stub.miss_rate},
               {"confidence_model", confidence_model_name(stub.confidence_model)},
               {"queries", stub.queries}};
  j["eval"] = {{"cd_threshold", eval.cd_threshold}};
  return j;
}

std::string PipelineConfig::hash() const { return hash_hex(fnv1a(to_json().dump())); }

}  // namespace pardet
