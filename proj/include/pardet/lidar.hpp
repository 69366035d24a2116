#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pardet/bvh.hpp"
#include "pardet/geometry.hpp"
#include "pardet/mesh.hpp"

namespace pardet {

// One scan ray: time plus direction in sensor spherical coordinates.
struct RayRecord {
  double time_s = 0.0;
  double azimuth_rad = 0.0;
  double elevation_rad = 0.0;
};

// Sequential ray directions of a non-repetitive scan pattern. CSV files store
// (timestamp, azimuth_deg, elevation_deg); vendor tables are drop-in.
struct RayTable {
  std::vector<RayRecord> rows;

  void validate() const;  // non-decreasing time, finite, |elevation| < pi/2
  static RayTable load_csv(const std::string& path);
  void save_csv(const std::string& path) const;

  // Rosette pattern confined to the 70.4 degree circular FOV of the target
  // sensor at 100k rays per second; stands in for the vendor tables.
  static RayTable generate(size_t count);
};

enum class FrameTag { SensorBlender, SensorRos, World };

const char* frame_name(FrameTag tag);
FrameTag frame_from_name(const std::string& name);

struct ScanCloud {
  std::vector<Vec3> points;
  std::vector<uint32_t> source_ids;  // per-point owning instance; simulation only
  FrameTag frame = FrameTag::World;
  bool normalized = false;

  size_t size() const { return points.size(); }
  bool has_source_ids() const { return source_ids.size() == points.size(); }
};

// World-space triangle soup with per-triangle instance ownership and a BVH.
// Immutable once baked; raycasting reads it from many threads.
class SceneGeometry {
 public:
  void add_instance(uint32_t instance_id, const ClassMesh& mesh, const Pose& world_pose,
                    const Vec3& scale = {1.0, 1.0, 1.0});
  void set_sensor_pose(const Pose& pose) { sensor_pose_ = pose; }
  const Pose& sensor_pose() const { return sensor_pose_; }
  void finalize();  // builds the BVH

  size_t triangle_count() const { return owners_.size(); }
  bool empty() const { return owners_.empty(); }
  const std::vector<Vec3>& triangle_vertices() const { return tri_verts_; }
  uint32_t owner_of(uint32_t triangle) const { return owners_[triangle]; }
  const Bvh& bvh() const { return bvh_; }

 private:
  std::vector<Vec3> tri_verts_;  // 3 per triangle, world space
  std::vector<uint32_t> owners_;
  Pose sensor_pose_;
  Bvh bvh_;
};

// Nearest hit per ray within max_range; misses emit nothing. Parallel over
// rays; output order follows ray order.
ScanCloud raycast_scan(const SceneGeometry& scene, const RayTable& rays, double max_range = 25.0);

// Exact farthest point sampling. Identity when the cloud fits the budget;
// otherwise starts from a seeded random point, then repeatedly takes the
// point maximizing min-distance to the selected set (lowest index on ties).
ScanCloud fps_reduce(const ScanCloud& cloud, size_t budget = 32768, uint64_t seed = 0);

struct CullThresholds {
  int gripper = 50;
  int loading_platform = 80;
  int pallet = 30;

  int for_class(ObjectClass cls) const;
};

// Keeps targets whose instance received at least threshold[class] hits in the
// (post-FPS) cloud. Returns indices into `targets`.
std::vector<size_t> cull_occluded_targets(const std::vector<ParamTarget>& targets,
                                          const std::vector<uint32_t>& target_instance_ids,
                                          const ScanCloud& cloud, const CullThresholds& thresholds);

struct PreprocessResult {
  ScanCloud cloud;
  Quat applied_rotation;  // SensorRos -> SensorBlender (180 deg about z)
  Quat inverse_rotation;  // maps predictions back to the input frame
};

// Range filter at max_range, FPS to budget, then the 180 degree z-rotation
// that aligns ROS-frame input with the simulation convention. Already-aligned
// clouds pass through unrotated, so the op is idempotent.
PreprocessResult preprocess_ingested(const ScanCloud& cloud, size_t budget = 32768,
                                     double max_range = 25.0, uint64_t seed = 0);

struct NoiseConfig {
  double probability = 1.0 / 3.0;
  double sigma_min = 0.0;   // exclusive
  double sigma_max = 0.04;  // inclusive
};

// With the configured probability per invocation, adds i.i.d. Gaussian
// offsets with sigma drawn uniformly from (sigma_min, sigma_max]. Requires a
// normalized cloud.
ScanCloud add_point_noise(const ScanCloud& cloud, const NoiseConfig& cfg, uint64_t seed);

struct TiltResult {
  ScanCloud cloud;
  std::vector<ParamTarget> targets;
  Quat rotation;
};

// One rotation per axis sampled uniformly in [-max_deg, max_deg] about x and
// y, applied jointly to points and target poses.
TiltResult random_tilt(const ScanCloud& cloud, const std::vector<ParamTarget>& targets,
                       double max_deg = 5.0, uint64_t seed = 0);

}  // namespace pardet
