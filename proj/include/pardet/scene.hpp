#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pardet/lidar.hpp"
#include "pardet/mesh.hpp"
#include "pardet/rng.hpp"

namespace pardet {

// Domain-randomization ranges. Defaults follow the sampling scheme the
// detector is trained against: forklift on a 5-16 m circle around the crane,
// gripper on a 3.5-8 m circle behind the truck at 0.5-4.5 m height, pallet
// clearance 1.5 m, vegetation spacing 1 m, stacks at most two high.
struct SceneConfig {
  double forklift_radius_min = 5.0, forklift_radius_max = 16.0;
  double gripper_radius_min = 3.5, gripper_radius_max = 8.0;
  double gripper_height_min = 0.5, gripper_height_max = 4.5;
  double opening_min_deg = 0.0, opening_max_deg = 90.0;
  double pallet_min_clearance = 1.5;
  double vegetation_min_spacing = 1.0;
  int stack_max = 2;
  int wall_count_min = 0, wall_count_max = 4;

  double pallet_region_radius = 14.0;
  double pallet_base_radius = 2.2;     // Poisson-disk base radius for pallets
  int pallet_count_max = 14;
  double stack_probability = 0.25;
  double box_probability = 0.3;
  int vegetation_count_max = 24;
  double vegetation_region_radius = 20.0;
  double mast_height_min = 1.0, mast_height_max = 3.5;
  double sensor_tilt_max_deg = 3.0;

  // fractal noise modulating the pallet Poisson-disk radius
  int perlin_octaves = 3;
  double perlin_persistence = 0.5;
  double perlin_frequency = 0.15;
  double perlin_amplitude = 0.5;

  int placement_retries = 200;

  // eight points of interest on the truck the forklift may face
  std::vector<Vec3> points_of_interest = {
      {2.5, -1.2, 1.0}, {2.5, 1.2, 1.0}, {-4.0, -1.2, 1.0}, {-4.0, 1.2, 1.0},
      {2.5, 0.0, 1.0},  {-4.0, 0.0, 1.0}, {-0.75, -1.2, 1.0}, {-0.75, 1.2, 1.0}};

  void validate() const;
};

struct InstanceDesc {
  uint32_t id = 0;
  std::string mesh_ref;
  Pose pose;
  Vec3 scale{1.0, 1.0, 1.0};
  double opening_deg = 0.0;  // grippers only
};

// Everything needed to rebuild the scene: instances, targets (with the
// owning instance), and the sensor pose.
struct SceneDescription {
  uint64_t seed = 0;
  std::vector<InstanceDesc> instances;
  std::vector<ParamTarget> targets;
  std::vector<uint32_t> target_instance_ids;
  Pose sensor_pose;

  nlohmann::json to_json() const;
  static SceneDescription from_json(const nlohmann::json& j);
};

enum class CircleOrientation { TowardPoint, Away };

// Position uniform by area in the annulus (r^2 uniform); heading toward the
// chosen point of interest, or directly away from it.
Pose place_on_circle(const Vec3& center, double radius_min, double radius_max,
                     const Vec3& interest_point, CircleOrientation orientation, Rng& rng);

// 2D keep-out region: a disc or an axis-aligned rectangle (z ignored).
struct KeepOut {
  Vec3 lo, hi;  // rectangle when lo != hi, else point
  double radius = 0.0;

  double distance(const Vec3& p) const;
};

struct PerlinParams {
  int octaves = 3;
  double persistence = 0.5;
  double frequency = 0.15;
  double amplitude = 0.5;  // 0 disables modulation
  uint64_t seed = 0;
};

// Dart-throwing Poisson disk over a disc region; the local radius is
// base_radius scaled by fractal Perlin noise, and any pair (p, q) satisfies
// |p - q| >= max(r(p), r(q)). Placements within `clearance` of a keep-out
// are rejected. Throws RegionTooSmall when nothing can be placed.
std::vector<Vec3> poisson_disk_perlin(const Vec3& region_center, double region_radius,
                                      double base_radius, const PerlinParams& noise,
                                      const std::vector<KeepOut>& keepouts, double clearance,
                                      int max_count, Rng& rng, int retries_per_placement = 60);

// Fractal Perlin value in [-1, 1] at (x, y).
double fractal_perlin(double x, double y, const PerlinParams& params);

SceneDescription build_scene(const SceneConfig& cfg, uint64_t scene_seed);

// Bakes world-space triangles (articulating grippers) and the BVH.
SceneGeometry bake_scene(const SceneDescription& desc, const MeshLibrary& meshes);

struct SplitResult {
  std::vector<int> train, val, test;
};

// Deterministic shuffle split; ratios must be non-negative and sum to at
// most 1.1 (tolerating overlapping conventions); remainders go to train.
SplitResult dataset_split(int count, double train_ratio, double val_ratio, double test_ratio,
                          uint64_t seed);

// Brute-force audit of every placement constraint; returns human-readable
// violation strings (empty means the scene is valid).
std::vector<std::string> audit_scene(const SceneDescription& desc, const SceneConfig& cfg);

}  // namespace pardet
