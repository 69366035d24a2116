#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "pardet/eval.hpp"
#include "pardet/lidar.hpp"
#include "pardet/scene.hpp"
#include "pardet/stub.hpp"

namespace pardet {

constexpr const char* kToolVersion = "0.1.0";

struct LidarConfig {
  std::string ray_table;    // CSV path; empty generates the builtin pattern
  size_t ray_count = 200000;  // generated rays per scan (paper-scale: 400k)
  double max_range = 25.0;
  size_t budget = 32768;
  CullThresholds cull;
};

// Sections: scene, lidar, stub, eval, paths, plus the global seed. Unknown
// keys anywhere are hard errors.
struct PipelineConfig {
  uint64_t seed = 1;
  int scene_count = 50;
  std::string mesh_dir;  // empty selects the builtin procedural meshes
  SceneConfig scene;
  LidarConfig lidar;
  StubConfig stub;
  EvalConfig eval;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::string& path);
  nlohmann::json to_json() const;

  // hash of the canonical JSON dump; embedded in every output artifact
  std::string hash() const;
};

}  // namespace pardet
