#include "pardet/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pardet/error.hpp"

namespace pardet {

using nlohmann::json;

// Truck layout shared by the generator and the audit. The chassis rectangle
// doubles as the pallet keep-out; the gripper circle is centered at the
// backside of the truck.
namespace truck {
constexpr double kMinX = -4.0, kMaxX = 2.5;
constexpr double kMinY = -1.2, kMaxY = 1.2;
const Vec3 kBackside{kMinX, 0.0, 0.0};
const Vec3 kPlatformCorner{kMaxX, kMinY, 1.0};  // front-right, top surface
constexpr double kForkliftKeepOutRadius = 1.6;
constexpr double kGripperKeepOutRadius = 0.8;
constexpr double kSensorForwardOffset = 1.6;  // clears the mast front face
}  // namespace truck

void SceneConfig::validate() const {
  auto range_ok = [](double lo, double hi) { return lo >= 0.0 && lo <= hi; };
  if (!range_ok(forklift_radius_min, forklift_radius_max) ||
      !range_ok(gripper_radius_min, gripper_radius_max) ||
      !range_ok(gripper_height_min, gripper_height_max) ||
      !range_ok(opening_min_deg, opening_max_deg) || wall_count_min > wall_count_max ||
      wall_count_min < 0)
    throw Error(ErrorCode::ConfigError, "scene config has an empty or negative range");
  if (pallet_min_clearance <= 0.0 || vegetation_min_spacing <= 0.0)
    throw Error(ErrorCode::ConfigError, "clearances must be positive");
  if (stack_max < 1 || stack_max > 2)
    throw Error(ErrorCode::ConfigError, "stack_max must be 1 or 2");
  if (points_of_interest.size() != 8)
    throw Error(ErrorCode::ConfigError, "expected eight points of interest");
  if (placement_retries < 1)
    throw Error(ErrorCode::ConfigError, "placement_retries must be >= 1");
}

// ---------------------------------------------------------------------------
// samplers

Pose place_on_circle(const Vec3& center, double radius_min, double radius_max,
                     const Vec3& interest_point, CircleOrientation orientation, Rng& rng) {
  double u = rng.uniform();
  double r = std::sqrt(radius_min * radius_min +
                       u * (radius_max * radius_max - radius_min * radius_min));
  double theta = rng.uniform(0.0, 2.0 * kPi);
  Vec3 pos = center + Vec3{r * std::cos(theta), r * std::sin(theta), 0.0};

  Vec3 dir = interest_point - pos;
  double yaw = std::atan2(dir.y, dir.x);
  if (orientation == CircleOrientation::Away) yaw += kPi;
  return Pose{pos, Quat::from_axis_angle({0.0, 0.0, 1.0}, yaw)};
}

double KeepOut::distance(const Vec3& p) const {
  double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
  double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
  return std::hypot(dx, dy) - radius;
}

// classic 2D Perlin gradient noise
namespace {

struct PerlinTable {
  std::array<int, 512> perm;

  explicit PerlinTable(uint64_t seed) {
    std::array<int, 256> p;
    std::iota(p.begin(), p.end(), 0);
    Rng rng(seed);
    for (int i = 255; i > 0; --i)
      std::swap(p[i], p[rng.uniform_int(static_cast<uint64_t>(i + 1))]);
    for (int i = 0; i < 512; ++i) perm[i] = p[i & 255];
  }

  static double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }
  static double grad(int h, double x, double y) {
    switch (h & 7) {
      case 0: return x + y;
      case 1: return x - y;
      case 2: return -x + y;
      case 3: return -x - y;
      case 4: return x;
      case 5: return -x;
      case 6: return y;
      default: return -y;
    }
  }

  double noise(double x, double y) const {
    int xi = static_cast<int>(std::floor(x)) & 255;
    int yi = static_cast<int>(std::floor(y)) & 255;
    double xf = x - std::floor(x), yf = y - std::floor(y);
    double u = fade(xf), v = fade(yf);
    int aa = perm[perm[xi] + yi], ab = perm[perm[xi] + yi + 1];
    int ba = perm[perm[xi + 1] + yi], bb = perm[perm[xi + 1] + yi + 1];
    double x1 = std::lerp(grad(aa, xf, yf), grad(ba, xf - 1.0, yf), u);
    double x2 = std::lerp(grad(ab, xf, yf - 1.0), grad(bb, xf - 1.0, yf - 1.0), u);
    return std::lerp(x1, x2, v);  // in [-sqrt2, sqrt2] before normalization
  }
};

}  // namespace

static double fractal_perlin_impl(const PerlinTable& table, double x, double y,
                                  const PerlinParams& params) {
  double sum = 0.0, amp = 1.0, freq = params.frequency, max_amp = 0.0;
  for (int o = 0; o < params.octaves; ++o) {
    sum += amp * table.noise(x * freq, y * freq);
    max_amp += amp;
    amp *= params.persistence;
    freq *= 2.0;
  }
  return std::clamp(sum / max_amp, -1.0, 1.0);
}

double fractal_perlin(double x, double y, const PerlinParams& params) {
  PerlinTable table(params.seed);
  return fractal_perlin_impl(table, x, y, params);
}

std::vector<Vec3> poisson_disk_perlin(const Vec3& region_center, double region_radius,
                                      double base_radius, const PerlinParams& noise,
                                      const std::vector<KeepOut>& keepouts, double clearance,
                                      int max_count, Rng& rng, int retries_per_placement) {
  if (region_radius <= 0.0)
    throw Error(ErrorCode::RegionTooSmall, "poisson region has no area");

  auto blocked = [&](const Vec3& p) {
    for (const KeepOut& k : keepouts)
      if (k.distance(p) < clearance) return true;
    return false;
  };

  // coarse feasibility probe: if every cell of a grid over the region is
  // inside a keep-out, no placement is possible
  bool feasible = false;
  constexpr int kProbe = 16;
  for (int i = 0; i < kProbe && !feasible; ++i)
    for (int j = 0; j < kProbe && !feasible; ++j) {
      Vec3 p = region_center + Vec3{(2.0 * (i + 0.5) / kProbe - 1.0) * region_radius,
                                    (2.0 * (j + 0.5) / kProbe - 1.0) * region_radius, 0.0};
      if (norm_sq(p - region_center) <= region_radius * region_radius && !blocked(p))
        feasible = true;
    }
  if (!feasible)
    throw Error(ErrorCode::RegionTooSmall, "keep-outs cover the entire sampling region");

  PerlinTable table(noise.seed);
  auto local_radius = [&](const Vec3& p) {
    if (noise.amplitude == 0.0) return base_radius;
    double n = fractal_perlin_impl(table, p.x, p.y, noise);
    return base_radius * (1.0 + noise.amplitude * n);
  };

  std::vector<Vec3> accepted;
  std::vector<double> radii;
  int darts = std::max(1, max_count) * std::max(1, retries_per_placement);
  for (int d = 0; d < darts && static_cast<int>(accepted.size()) < max_count; ++d) {
    double r = region_radius * std::sqrt(rng.uniform());
    double theta = rng.uniform(0.0, 2.0 * kPi);
    Vec3 p = region_center + Vec3{r * std::cos(theta), r * std::sin(theta), 0.0};
    if (blocked(p)) continue;
    double rp = local_radius(p);
    bool ok = true;
    for (size_t i = 0; i < accepted.size(); ++i)
      if (distance(p, accepted[i]) < std::max(rp, radii[i])) {
        ok = false;
        break;
      }
    if (!ok) continue;
    accepted.push_back(p);
    radii.push_back(rp);
  }
  return accepted;
}

// ---------------------------------------------------------------------------
// scene assembly

SceneDescription build_scene(const SceneConfig& cfg, uint64_t scene_seed) {
  cfg.validate();
  Rng rng(scene_seed);
  SceneDescription desc;
  desc.seed = scene_seed;
  uint32_t next_id = 0;

  auto add_instance = [&](const std::string& ref, const Pose& pose,
                          const Vec3& scale = {1, 1, 1}, double opening = 0.0) {
    InstanceDesc inst;
    inst.id = next_id++;
    inst.mesh_ref = ref;
    inst.pose = pose;
    inst.scale = scale;
    inst.opening_deg = opening;
    desc.instances.push_back(inst);
    return inst.id;
  };

  add_instance("builtin:ground", Pose{});
  add_instance("builtin:truck", Pose{});

  // loading platform rides on the truck bed; its origin is the front-right
  // corner of the slab
  {
    uint32_t id = add_instance("builtin:platform", Pose{truck::kPlatformCorner});
    ParamTarget t;
    t.cls = ObjectClass::LoadingPlatform;
    t.pose = Pose{truck::kPlatformCorner};
    desc.targets.push_back(t);
    desc.target_instance_ids.push_back(id);
  }

  // gripper on its circle behind the truck
  {
    Pose p = place_on_circle(truck::kBackside, cfg.gripper_radius_min, cfg.gripper_radius_max,
                             truck::kBackside, CircleOrientation::TowardPoint, rng);
    p.position.z = rng.uniform(cfg.gripper_height_min, cfg.gripper_height_max);
    p.orientation = Quat::from_axis_angle({0, 0, 1}, rng.uniform(0.0, 2.0 * kPi));
    double opening = rng.uniform(cfg.opening_min_deg, cfg.opening_max_deg);
    uint32_t id = add_instance("builtin:gripper", p, {1, 1, 1}, opening);
    ParamTarget t;
    t.cls = ObjectClass::Gripper;
    t.pose = p;
    t.opening = opening;
    desc.targets.push_back(t);
    desc.target_instance_ids.push_back(id);
  }

  // forklift faces one of the eight truck points of interest, or away
  Vec3 forklift_pos;
  {
    const Vec3& poi = cfg.points_of_interest[rng.uniform_int(cfg.points_of_interest.size())];
    CircleOrientation orient =
        rng.bernoulli(0.5) ? CircleOrientation::TowardPoint : CircleOrientation::Away;
    Pose p = place_on_circle({0, 0, 0}, cfg.forklift_radius_min, cfg.forklift_radius_max, poi,
                             orient, rng);
    add_instance("builtin:forklift", p);
    forklift_pos = p.position;

    double mast_h = rng.uniform(cfg.mast_height_min, cfg.mast_height_max);
    double tilt = deg_to_rad(rng.uniform(-cfg.sensor_tilt_max_deg, cfg.sensor_tilt_max_deg));
    Pose sensor;
    sensor.position = p.position + p.orientation.rotate(
                                       Vec3{truck::kSensorForwardOffset, 0.0, 0.0}) +
                      Vec3{0.0, 0.0, mast_h};
    sensor.orientation = quat_multiply(p.orientation, Quat::from_axis_angle({0, 1, 0}, tilt));
    desc.sensor_pose = sensor;
  }

  const Vec3 gripper_xy{desc.targets[1].pose.position.x, desc.targets[1].pose.position.y, 0.0};
  std::vector<KeepOut> keepouts = {
      {{truck::kMinX, truck::kMinY, 0}, {truck::kMaxX, truck::kMaxY, 0}, 0.0},
      {forklift_pos, forklift_pos, truck::kForkliftKeepOutRadius},
      {gripper_xy, gripper_xy, truck::kGripperKeepOutRadius},
  };

  // pallets: clustered Poisson disk, optional stack or box on top
  {
    PerlinParams noise{cfg.perlin_octaves, cfg.perlin_persistence, cfg.perlin_frequency,
                       cfg.perlin_amplitude, Rng::derive(scene_seed, 77)};
    int want = static_cast<int>(rng.uniform_int(cfg.pallet_count_max + 1));
    std::vector<Vec3> spots;
    try {
      spots = poisson_disk_perlin({0, 0, 0}, cfg.pallet_region_radius, cfg.pallet_base_radius,
                                  noise, keepouts, cfg.pallet_min_clearance, want, rng,
                                  cfg.placement_retries);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RegionTooSmall) throw;
      throw Error(ErrorCode::PlacementFailure,
                  std::string("pallet placement impossible: ") + e.what());
    }
    const ClassMesh pallet = builtin_mesh("builtin:pallet");
    const double pallet_top = pallet.bounds().hi.z;
    for (const Vec3& s : spots) {
      Pose p{s, Quat::from_axis_angle({0, 0, 1}, rng.uniform(0.0, 2.0 * kPi))};
      uint32_t id = add_instance("builtin:pallet", p);
      ParamTarget t;
      t.cls = ObjectClass::Pallet;
      t.pose = p;
      desc.targets.push_back(t);
      desc.target_instance_ids.push_back(id);

      if (cfg.stack_max >= 2 && rng.bernoulli(cfg.stack_probability)) {
        Pose upper{Vec3{s.x, s.y, pallet_top},
                   Quat::from_axis_angle({0, 0, 1}, rng.uniform(0.0, 2.0 * kPi))};
        uint32_t uid = add_instance("builtin:pallet", upper);
        ParamTarget ut;
        ut.cls = ObjectClass::Pallet;
        ut.pose = upper;
        desc.targets.push_back(ut);
        desc.target_instance_ids.push_back(uid);
      } else if (rng.bernoulli(cfg.box_probability)) {
        Pose box{Vec3{s.x, s.y, pallet_top},
                 Quat::from_axis_angle({0, 0, 1}, rng.uniform(0.0, 2.0 * kPi))};
        double sc = rng.uniform(0.8, 1.4);
        add_instance("builtin:box", box, {sc, sc, sc});
      }
    }
  }

  // vegetation: plain Poisson disk at the minimum spacing
  {
    PerlinParams flat{1, 0.5, 0.1, 0.0, 0};
    int want = static_cast<int>(rng.uniform_int(cfg.vegetation_count_max + 1));
    std::vector<Vec3> spots;
    try {
      spots = poisson_disk_perlin({0, 0, 0}, cfg.vegetation_region_radius,
                                  cfg.vegetation_min_spacing, flat, keepouts, 1.0, want, rng,
                                  cfg.placement_retries);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RegionTooSmall) throw;
      throw Error(ErrorCode::PlacementFailure,
                  std::string("vegetation placement impossible: ") + e.what());
    }
    for (const Vec3& s : spots) {
      bool tree = rng.bernoulli(0.5);
      double sc = rng.uniform(0.6, 1.8);
      Pose p{s, Quat::from_axis_angle({0, 0, 1}, rng.uniform(0.0, 2.0 * kPi))};
      add_instance(tree ? "builtin:tree" : "builtin:bush", p, {sc, sc, sc});
    }
  }

  // flat walls scattered around the scene
  {
    int count = cfg.wall_count_min +
                static_cast<int>(rng.uniform_int(cfg.wall_count_max - cfg.wall_count_min + 1));
    for (int w = 0; w < count; ++w) {
      double r = rng.uniform(10.0, 20.0);
      double theta = rng.uniform(0.0, 2.0 * kPi);
      Pose p{{r * std::cos(theta), r * std::sin(theta), 0.0},
             Quat::from_axis_angle({0, 0, 1}, rng.uniform(0.0, 2.0 * kPi))};
      Vec3 scale{rng.uniform(4.0, 10.0), 1.0, rng.uniform(2.0, 4.0)};
      add_instance("builtin:wall", p, scale);
    }
  }

  return desc;
}

SceneGeometry bake_scene(const SceneDescription& desc, const MeshLibrary& meshes) {
  SceneGeometry geo;
  for (const InstanceDesc& inst : desc.instances) {
    const ClassMesh& mesh = meshes.get(inst.mesh_ref);
    if (mesh.cls == ObjectClass::Gripper && inst.opening_deg != 0.0) {
      ClassMesh posed = articulate(mesh, inst.opening_deg);
      geo.add_instance(inst.id, posed, inst.pose, inst.scale);
    } else {
      geo.add_instance(inst.id, mesh, inst.pose, inst.scale);
    }
  }
  geo.set_sensor_pose(desc.sensor_pose);
  geo.finalize();
  return geo;
}

SplitResult dataset_split(int count, double train_ratio, double val_ratio, double test_ratio,
                          uint64_t seed) {
  if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0 ||
      train_ratio + val_ratio + test_ratio > 1.1 + 1e-9)
    throw Error(ErrorCode::BadRatios, "split ratios must be non-negative and sum to <= 1.1");
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = count - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(static_cast<uint64_t>(i + 1))]);

  int n_val = static_cast<int>(count * val_ratio);
  int n_test = static_cast<int>(count * test_ratio);
  SplitResult split;
  for (int i = 0; i < count; ++i) {
    if (i < n_val)
      split.val.push_back(order[i]);
    else if (i < n_val + n_test)
      split.test.push_back(order[i]);
    else
      split.train.push_back(order[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// ---------------------------------------------------------------------------
// serialization

static json pose_to_json(const Pose& p) {
  return {{"position", {p.position.x, p.position.y, p.position.z}},
          {"quat", {p.orientation.w, p.orientation.x, p.orientation.y, p.orientation.z}}};
}

static Pose pose_from_json(const json& j) {
  Pose p;
  p.position = {j["position"][0], j["position"][1], j["position"][2]};
  p.orientation = {j["quat"][0], j["quat"][1], j["quat"][2], j["quat"][3]};
  return p;
}

json SceneDescription::to_json() const {
  json j;
  j["schema"] = "pardet/scene@1";
  j["seed"] = seed;
  j["sensor_pose"] = pose_to_json(sensor_pose);
  j["instances"] = json::array();
  for (const InstanceDesc& inst : instances) {
    json ji = {{"id", inst.id},
               {"mesh", inst.mesh_ref},
               {"pose", pose_to_json(inst.pose)},
               {"scale", {inst.scale.x, inst.scale.y, inst.scale.z}}};
    if (inst.opening_deg != 0.0) ji["opening_deg"] = inst.opening_deg;
    j["instances"].push_back(ji);
  }
  j["targets"] = json::array();
  for (size_t i = 0; i < targets.size(); ++i) {
    const ParamTarget& t = targets[i];
    json jt = {{"class", class_name(t.cls)},
               {"pose", pose_to_json(t.pose)},
               {"instance_id", target_instance_ids[i]}};
    if (t.opening) jt["opening_deg"] = *t.opening;
    j["targets"].push_back(jt);
  }
  return j;
}

SceneDescription SceneDescription::from_json(const json& j) {
  SceneDescription desc;
  desc.seed = j["seed"].get<uint64_t>();
  desc.sensor_pose = pose_from_json(j["sensor_pose"]);
  for (const json& ji : j["instances"]) {
    InstanceDesc inst;
    inst.id = ji["id"].get<uint32_t>();
    inst.mesh_ref = ji["mesh"].get<std::string>();
    inst.pose = pose_from_json(ji["pose"]);
    inst.scale = {ji["scale"][0], ji["scale"][1], ji["scale"][2]};
    if (ji.contains("opening_deg")) inst.opening_deg = ji["opening_deg"].get<double>();
    desc.instances.push_back(inst);
  }
  for (const json& jt : j["targets"]) {
    ParamTarget t;
    t.cls = class_from_name(jt["class"].get<std::string>());
    t.pose = pose_from_json(jt["pose"]);
    if (jt.contains("opening_deg")) t.opening = jt["opening_deg"].get<double>();
    desc.targets.push_back(t);
    desc.target_instance_ids.push_back(jt["instance_id"].get<uint32_t>());
  }
  return desc;
}

// ---------------------------------------------------------------------------
// audit

std::vector<std::string> audit_scene(const SceneDescription& desc, const SceneConfig& cfg) {
  std::vector<std::string> violations;
  auto fail = [&](const std::string& msg) { violations.push_back(msg); };
  constexpr double kTol = 1e-9;

  Vec3 forklift_pos;
  bool forklift_found = false;
  std::vector<Vec3> vegetation;
  for (const InstanceDesc& inst : desc.instances) {
    if (inst.mesh_ref == "builtin:forklift") {
      forklift_pos = inst.pose.position;
      forklift_found = true;
    }
    if (inst.mesh_ref == "builtin:tree" || inst.mesh_ref == "builtin:bush")
      vegetation.push_back(inst.pose.position);
  }
  if (!forklift_found) fail("no forklift instance");

  if (forklift_found) {
    double r = std::hypot(forklift_pos.x, forklift_pos.y);
    if (r < cfg.forklift_radius_min - kTol || r > cfg.forklift_radius_max + kTol)
      fail("forklift radius " + std::to_string(r) + " outside range");
  }

  Vec3 gripper_xy;
  bool gripper_found = false;
  const ClassMesh pallet_mesh = builtin_mesh("builtin:pallet");
  const double pallet_top = pallet_mesh.bounds().hi.z;
  std::vector<Vec3> pallet_positions;

  for (const ParamTarget& t : desc.targets) {
    if (t.cls == ObjectClass::Gripper) {
      gripper_found = true;
      double r = std::hypot(t.pose.position.x - truck::kBackside.x,
                            t.pose.position.y - truck::kBackside.y);
      if (r < cfg.gripper_radius_min - kTol || r > cfg.gripper_radius_max + kTol)
        fail("gripper radius " + std::to_string(r) + " outside range");
      if (t.pose.position.z < cfg.gripper_height_min - kTol ||
          t.pose.position.z > cfg.gripper_height_max + kTol)
        fail("gripper height " + std::to_string(t.pose.position.z) + " outside range");
      if (!t.opening || *t.opening < cfg.opening_min_deg - kTol ||
          *t.opening > cfg.opening_max_deg + kTol)
        fail("gripper opening outside range");
      gripper_xy = {t.pose.position.x, t.pose.position.y, 0.0};
    } else if (t.cls == ObjectClass::Pallet) {
      pallet_positions.push_back(t.pose.position);
    }
  }
  if (!gripper_found) fail("no gripper target");

  std::vector<KeepOut> keepouts = {
      {{truck::kMinX, truck::kMinY, 0}, {truck::kMaxX, truck::kMaxY, 0}, 0.0},
      {forklift_pos, forklift_pos, truck::kForkliftKeepOutRadius},
      {gripper_xy, gripper_xy, truck::kGripperKeepOutRadius},
  };
  for (const Vec3& p : pallet_positions) {
    for (const KeepOut& k : keepouts)
      if (k.distance(p) < cfg.pallet_min_clearance - kTol)
        fail("pallet at (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
             ") violates the 1.5 m clearance");
    if (p.z > kTol) {
      // stacked: must rest exactly on a lower pallet
      if (std::abs(p.z - pallet_top) > 1e-6)
        fail("stacked pallet bottom does not meet the lower pallet top");
      bool base_found = false;
      for (const Vec3& q : pallet_positions)
        if (q.z <= kTol && std::hypot(q.x - p.x, q.y - p.y) < 1e-6) base_found = true;
      if (!base_found) fail("stacked pallet has no base pallet");
    }
  }

  for (size_t i = 0; i < vegetation.size(); ++i)
    for (size_t j = i + 1; j < vegetation.size(); ++j)
      if (distance(vegetation[i], vegetation[j]) < cfg.vegetation_min_spacing - kTol)
        fail("vegetation spacing below the 1 m minimum");

  return violations;
}

}  // namespace pardet
