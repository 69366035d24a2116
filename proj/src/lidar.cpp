#include "pardet/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pardet/error.hpp"
#include "pardet/rng.hpp"

namespace pardet {

// ---------------------------------------------------------------------------
// ray tables

void RayTable::validate() const {
  if (rows.empty()) throw Error(ErrorCode::ConfigError, "ray table is empty");
  double prev = -std::numeric_limits<double>::infinity();
  for (const RayRecord& r : rows) {
    if (!std::isfinite(r.time_s) || !std::isfinite(r.azimuth_rad) ||
        !std::isfinite(r.elevation_rad))
      throw Error(ErrorCode::ConfigError, "ray table contains non-finite values");
    if (r.time_s < prev)
      throw Error(ErrorCode::ConfigError, "ray table timestamps decrease");
    if (std::abs(r.elevation_rad) >= kPi / 2.0)
      throw Error(ErrorCode::ConfigError, "ray table elevation out of (-90, 90) degrees");
    prev = r.time_s;
  }
}

RayTable RayTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open ray table " + path);
  RayTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("timestamp", 0) == 0) continue;  // header row
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t, az_deg, el_deg;
    if (!(ss >> t >> az_deg >> el_deg))
      throw Error(ErrorCode::IoError, "bad ray table row in " + path + ": " + line);
    table.rows.push_back({t, deg_to_rad(az_deg), deg_to_rad(el_deg)});
  }
  table.validate();
  return table;
}

void RayTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write ray table " + path);
  out << "timestamp,azimuth_deg,elevation_deg\n";
  out.precision(12);
  for (const RayRecord& r : rows)
    out << r.time_s << "," << rad_to_deg(r.azimuth_rad) << "," << rad_to_deg(r.elevation_rad)
        << "\n";
}

RayTable RayTable::generate(size_t count) {
  // Rosette: radial angle breathes at f_r while the phase sweeps at f_p, with
  // an irrational frequency ratio so the pattern never repeats. The angular
  // radius stays within the 35.2 degree half-cone.
  constexpr double kRate = 100000.0;  // rays per second
  constexpr double kHalfFov = 35.2;   // degrees
  constexpr double kFreqRadial = 38.6;
  constexpr double kFreqPhase = 173.202;
  RayTable table;
  table.rows.resize(count);
  for (size_t i = 0; i < count; ++i) {
    double t = static_cast<double>(i) / kRate;
    double radius = deg_to_rad(kHalfFov) * std::abs(std::sin(2.0 * kPi * kFreqRadial * t));
    double phase = 2.0 * kPi * kFreqPhase * t;
    table.rows[i] = {t, radius * std::cos(phase), radius * std::sin(phase)};
  }
  table.validate();
  return table;
}

// ---------------------------------------------------------------------------
// frames

const char* frame_name(FrameTag tag) {
  switch (tag) {
    case FrameTag::SensorBlender:
      return "sensor_blender";
    case FrameTag::SensorRos:
      return "sensor_ros";
    case FrameTag::World:
      return "world";
  }
  return "unknown";
}

FrameTag frame_from_name(const std::string& name) {
  if (name == "sensor_blender") return FrameTag::SensorBlender;
  if (name == "sensor_ros") return FrameTag::SensorRos;
  if (name == "world") return FrameTag::World;
  throw Error(ErrorCode::ConfigError, "unknown frame tag " + name);
}

// ---------------------------------------------------------------------------
// scene geometry and raycast

void SceneGeometry::add_instance(uint32_t instance_id, const ClassMesh& mesh,
                                 const Pose& world_pose, const Vec3& scale) {
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      Vec3 v = mesh.vertices[tri[k]];
      v = {v.x * scale.x, v.y * scale.y, v.z * scale.z};
      tri_verts_.push_back(world_pose.apply(v));
    }
    owners_.push_back(instance_id);
  }
}

void SceneGeometry::finalize() { bvh_ = Bvh(tri_verts_); }

ScanCloud raycast_scan(const SceneGeometry& scene, const RayTable& rays, double max_range) {
  if (scene.empty()) throw Error(ErrorCode::ConfigError, "raycast against an empty scene");
  if (max_range <= 0.0) throw Error(ErrorCode::ConfigError, "max_range must be positive");

  const Pose& sensor = scene.sensor_pose();
  const size_t n = rays.rows.size();
  std::vector<Vec3> hit_points(n);
  std::vector<uint32_t> hit_owner(n);
  std::vector<char> hit_mask(n, 0);

#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    const RayRecord& r = rays.rows[i];
    Vec3 dir_body = spherical_to_cartesian(r.azimuth_rad, r.elevation_rad);
    Ray ray{sensor.position, sensor.orientation.rotate(dir_body)};
    if (auto hit = scene.bvh().nearest_hit(ray, max_range)) {
      hit_points[i] = hit->point;
      hit_owner[i] = scene.owner_of(hit->triangle);
      hit_mask[i] = 1;
    }
  }

  ScanCloud cloud;
  cloud.frame = FrameTag::World;
  for (size_t i = 0; i < n; ++i) {
    if (!hit_mask[i]) continue;
    cloud.points.push_back(hit_points[i]);
    cloud.source_ids.push_back(hit_owner[i]);
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// farthest point sampling
//
// Exact FPS with lazily refreshed block bounds. Min-distances only ever
// decrease, so a block's cached maximum is a valid upper bound; blocks whose
// bound cannot beat the current best skip their pending updates entirely.
// Selection order is identical to the eager serial scan (the reference
// implementation), including lowest-index tie-breaking.

namespace {

// Points are Morton-ordered internally so blocks are spatially compact and
// the box-distance skip prunes most pivot updates. All tie-breaking uses the
// ORIGINAL point index, so the selection sequence is exactly the one the
// serial reference produces on the unpermuted input.
class FpsSelector {
 public:
  FpsSelector(const std::vector<Vec3>& points, int first_orig)
      : n_(static_cast<int>(points.size())),
        blocks_((n_ + kBlock - 1) / kBlock) {
    std::vector<int> order(n_);
    morton_order(points, order);
    px_.resize(n_);
    py_.resize(n_);
    pz_.resize(n_);
    orig_.resize(n_);
    d2_.assign(n_, std::numeric_limits<double>::infinity());
    int first_perm = 0;
    for (int i = 0; i < n_; ++i) {
      const Vec3& p = points[order[i]];
      px_[i] = p.x;
      py_[i] = p.y;
      pz_[i] = p.z;
      orig_[i] = order[i];
      if (order[i] == first_orig) first_perm = i;
    }
    block_max_.assign(blocks_, std::numeric_limits<double>::infinity());
    block_arg_.assign(blocks_, -1);
    box_.resize(blocks_);
    for (int b = 0; b < blocks_; ++b) {
      Aabb box;
      for (int i = b * kBlock; i < std::min(n_, (b + 1) * kBlock); ++i)
        box.expand(Vec3{px_[i], py_[i], pz_[i]});
      box_[b] = box;
    }
    d2_[first_perm] = -1.0;
    apply_pivot(first_perm);
  }

  // returns the ORIGINAL index of the next farthest point
  int select_next() {
    int best_b = 0;
    for (int b = 1; b < blocks_; ++b) {
      if (block_max_[b] > block_max_[best_b] ||
          (block_max_[b] == block_max_[best_b] &&
           orig_[block_arg_[b]] < orig_[block_arg_[best_b]]))
        best_b = b;
    }
    int best_i = block_arg_[best_b];
    d2_[best_i] = -1.0;
    rescan(best_b);  // the removed entry was this block's max
    apply_pivot(best_i);
    return orig_[best_i];
  }

 private:
  static constexpr int kBlock = 1024;

  static void morton_order(const std::vector<Vec3>& points, std::vector<int>& order) {
    const int n = static_cast<int>(points.size());
    Aabb box = Aabb::of_points(points);
    Vec3 ext = box.extent();
    double sx = ext.x > 0 ? 1023.0 / ext.x : 0.0;
    double sy = ext.y > 0 ? 1023.0 / ext.y : 0.0;
    double sz = ext.z > 0 ? 1023.0 / ext.z : 0.0;
    auto spread = [](uint64_t v) {
      v = (v | (v << 16)) & 0x030000FF0000FFULL;
      v = (v | (v << 8)) & 0x0300F00F00F00FULL;
      v = (v | (v << 4)) & 0x030C30C30C30C3ULL;
      v = (v | (v << 2)) & 0x09249249249249ULL;
      return v;
    };
    std::vector<uint64_t> key(n);
    for (int i = 0; i < n; ++i) {
      uint64_t qx = static_cast<uint64_t>((points[i].x - box.lo.x) * sx);
      uint64_t qy = static_cast<uint64_t>((points[i].y - box.lo.y) * sy);
      uint64_t qz = static_cast<uint64_t>((points[i].z - box.lo.z) * sz);
      key[i] = (spread(qx) << 2) | (spread(qy) << 1) | spread(qz);
    }
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return key[a] != key[b] ? key[a] < key[b] : a < b; });
  }

  // One pivot against every block, with a box-distance skip: if the pivot is
  // at least the block's current max away from the whole box, no entry can
  // shrink (distances only ever decrease), so the block is left untouched.
  void apply_pivot(int piv) {
    const double vx = px_[piv], vy = py_[piv], vz = pz_[piv];
    double* __restrict__ d2 = d2_.data();
    const double* __restrict__ px = px_.data();
    const double* __restrict__ py = py_.data();
    const double* __restrict__ pz = pz_.data();
    for (int b = 0; b < blocks_; ++b) {
      const Aabb& box = box_[b];
      double dx = std::max({box.lo.x - vx, 0.0, vx - box.hi.x});
      double dy = std::max({box.lo.y - vy, 0.0, vy - box.hi.y});
      double dz = std::max({box.lo.z - vz, 0.0, vz - box.hi.z});
      if (block_arg_[b] >= 0 && dx * dx + dy * dy + dz * dz >= block_max_[b]) continue;
      int lo = b * kBlock, hi = std::min(n_, lo + kBlock);
      double bm = -std::numeric_limits<double>::infinity();
      for (int i = lo; i < hi; ++i) {
        double ex = px[i] - vx, ey = py[i] - vy, ez = pz[i] - vz;
        double d = std::min(d2[i], ex * ex + ey * ey + ez * ez);
        d2[i] = d;
        bm = std::max(bm, d);
      }
      block_max_[b] = bm;
      block_arg_[b] = argmax_orig(lo, hi, bm);
    }
  }

  // among entries equal to the max, the one with the lowest original index
  int argmax_orig(int lo, int hi, double value) const {
    int arg = -1;
    for (int i = lo; i < hi; ++i)
      if (d2_[i] == value && (arg < 0 || orig_[i] < orig_[arg])) arg = i;
    return arg;
  }

  void rescan(int b) {
    int lo = b * kBlock, hi = std::min(n_, lo + kBlock);
    double bm = -std::numeric_limits<double>::infinity();
    for (int i = lo; i < hi; ++i) bm = std::max(bm, d2_[i]);
    block_max_[b] = bm;
    block_arg_[b] = argmax_orig(lo, hi, bm);
  }

  int n_, blocks_;
  std::vector<double> px_, py_, pz_, d2_;
  std::vector<int> orig_;
  std::vector<double> block_max_;
  std::vector<int> block_arg_;
  std::vector<Aabb> box_;
};

}  // namespace

ScanCloud fps_reduce(const ScanCloud& cloud, size_t budget, uint64_t seed) {
  if (budget < 1) throw Error(ErrorCode::ConfigError, "fps budget must be >= 1");
  if (cloud.size() <= budget) return cloud;

  const int n = static_cast<int>(cloud.size());
  Rng rng(seed);
  int first = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));

  std::vector<int> selected;
  selected.reserve(budget);
  selected.push_back(first);
  FpsSelector sel(cloud.points, first);
  while (selected.size() < budget) selected.push_back(sel.select_next());

  ScanCloud out;
  out.frame = cloud.frame;
  out.normalized = cloud.normalized;
  out.points.reserve(budget);
  bool ids = cloud.has_source_ids();
  if (ids) out.source_ids.reserve(budget);
  for (int i : selected) {
    out.points.push_back(cloud.points[i]);
    if (ids) out.source_ids.push_back(cloud.source_ids[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// culling, ingestion, augmentation

int CullThresholds::for_class(ObjectClass cls) const {
  switch (cls) {
    case ObjectClass::Gripper:
      return gripper;
    case ObjectClass::LoadingPlatform:
      return loading_platform;
    case ObjectClass::Pallet:
      return pallet;
    default:
      return 0;
  }
}

std::vector<size_t> cull_occluded_targets(const std::vector<ParamTarget>& targets,
                                          const std::vector<uint32_t>& target_instance_ids,
                                          const ScanCloud& cloud,
                                          const CullThresholds& thresholds) {
  if (!cloud.has_source_ids())
    throw Error(ErrorCode::MissingSourceIds, "hit-count culling needs a simulated cloud");
  if (targets.size() != target_instance_ids.size())
    throw Error(ErrorCode::InvariantViolation, "targets and instance ids differ in length");

  std::map<uint32_t, int> hits;
  for (uint32_t id : cloud.source_ids) ++hits[id];

  std::vector<size_t> kept;
  for (size_t i = 0; i < targets.size(); ++i) {
    auto it = hits.find(target_instance_ids[i]);
    int count = it == hits.end() ? 0 : it->second;
    if (count >= thresholds.for_class(targets[i].cls)) kept.push_back(i);
  }
  return kept;
}

static Vec3 flip_z_180(const Vec3& p) { return {-p.x, -p.y, p.z}; }

PreprocessResult preprocess_ingested(const ScanCloud& cloud, size_t budget, double max_range,
                                     uint64_t seed) {
  if (cloud.frame != FrameTag::SensorRos && cloud.frame != FrameTag::SensorBlender)
    throw Error(ErrorCode::InvariantViolation, "preprocess_ingested expects a sensor-frame cloud");

  ScanCloud filtered;
  filtered.frame = cloud.frame;
  double max_sq = max_range * max_range;
  bool ids = cloud.has_source_ids();
  for (size_t i = 0; i < cloud.size(); ++i) {
    if (norm_sq(cloud.points[i]) > max_sq) continue;
    filtered.points.push_back(cloud.points[i]);
    if (ids) filtered.source_ids.push_back(cloud.source_ids[i]);
  }
  if (filtered.points.empty())
    throw Error(ErrorCode::EmptyAfterFilter, "no points within " + std::to_string(max_range) +
                                                 " m");

  PreprocessResult result;
  result.cloud = fps_reduce(filtered, budget, seed);
  Quat rz{0.0, 0.0, 0.0, 1.0};
  if (cloud.frame == FrameTag::SensorRos) {
    for (Vec3& p : result.cloud.points) p = flip_z_180(p);
    result.applied_rotation = rz;
    result.inverse_rotation = rz;  // self-inverse
  } else {
    result.applied_rotation = Quat::identity();
    result.inverse_rotation = Quat::identity();
  }
  result.cloud.frame = FrameTag::SensorBlender;
  return result;
}

ScanCloud add_point_noise(const ScanCloud& cloud, const NoiseConfig& cfg, uint64_t seed) {
  if (!cloud.normalized)
    throw Error(ErrorCode::NotNormalized, "point noise is defined on normalized clouds");
  Rng rng(seed);
  if (!rng.bernoulli(cfg.probability)) return cloud;
  double sigma = cfg.sigma_min + (cfg.sigma_max - cfg.sigma_min) * rng.uniform_open_low();
  ScanCloud out = cloud;
  for (Vec3& p : out.points) {
    p.x += rng.normal(0.0, sigma);
    p.y += rng.normal(0.0, sigma);
    p.z += rng.normal(0.0, sigma);
  }
  return out;
}

TiltResult random_tilt(const ScanCloud& cloud, const std::vector<ParamTarget>& targets,
                       double max_deg, uint64_t seed) {
  Rng rng(seed);
  double rx = deg_to_rad(rng.uniform(-max_deg, max_deg));
  double ry = deg_to_rad(rng.uniform(-max_deg, max_deg));
  Quat rot = quat_multiply(Quat::from_axis_angle({0, 1, 0}, ry),
                           Quat::from_axis_angle({1, 0, 0}, rx));

  TiltResult out;
  out.rotation = rot;
  out.cloud = cloud;
  for (Vec3& p : out.cloud.points) p = rot.rotate(p);
  out.targets = targets;
  for (ParamTarget& t : out.targets) {
    t.pose.position = rot.rotate(t.pose.position);
    t.pose.orientation = quat_multiply(rot, t.pose.orientation);
  }
  return out;
}

}  // namespace pardet
