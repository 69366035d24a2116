#include "pardet/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "pardet/error.hpp"
#include "pardet/hash.hpp"
#include "pardet/rng.hpp"

namespace pardet {

using nlohmann::json;

namespace {
constexpr uint64_t kBuiltinSampleSeed = 2024;
}

SymmetrySet class_symmetry(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::LoadingPlatform:
      return SymmetrySet::SignOnly;
    case ObjectClass::Gripper:
    case ObjectClass::Pallet:
      return SymmetrySet::SignAndZFlip;
    default:
      return SymmetrySet::SignOnly;
  }
}

const char* class_name(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::NoObject:
      return "no_object";
    case ObjectClass::Gripper:
      return "gripper";
    case ObjectClass::LoadingPlatform:
      return "loading_platform";
    case ObjectClass::Pallet:
      return "pallet";
  }
  return "unknown";
}

ObjectClass class_from_name(const std::string& name) {
  if (name == "no_object") return ObjectClass::NoObject;
  if (name == "gripper") return ObjectClass::Gripper;
  if (name == "loading_platform") return ObjectClass::LoadingPlatform;
  if (name == "pallet") return ObjectClass::Pallet;
  throw Error(ErrorCode::ConfigError, "unknown object class: " + name);
}

// ---------------------------------------------------------------------------
// articulation and phi

static Vec3 rotate_about(const Vec3& p, const Vec3& point, const Quat& rot) {
  return rot.rotate(p - point) + point;
}

ClassMesh articulate(const ClassMesh& mesh, double opening_deg) {
  if (mesh.cls != ObjectClass::Gripper || !mesh.articulation)
    throw Error(ErrorCode::NotArticulable, std::string(class_name(mesh.cls)) + " has no hinge");
  const Articulation& art = *mesh.articulation;
  if (opening_deg < -1e-9 || opening_deg > art.alpha_max_deg + 1e-9)
    throw Error(ErrorCode::OpeningOutOfRange,
                "opening " + std::to_string(opening_deg) + " outside [0, " +
                    std::to_string(art.alpha_max_deg) + "]");
  if (opening_deg == 0.0) return mesh;

  ClassMesh out = mesh;
  double half = deg_to_rad(opening_deg) * 0.5;
  Quat rot_a = Quat::from_axis_angle(art.hinge_axis, half);
  Quat rot_b = Quat::from_axis_angle(art.hinge_axis, -half);
  for (int i : art.jaw_a) out.vertices[i] = rotate_about(mesh.vertices[i], art.hinge_point, rot_a);
  for (int i : art.jaw_b) out.vertices[i] = rotate_about(mesh.vertices[i], art.hinge_point, rot_b);
  for (int i : art.jaw_a_samples)
    out.sample_points[i] = rotate_about(mesh.sample_points[i], art.hinge_point, rot_a);
  for (int i : art.jaw_b_samples)
    out.sample_points[i] = rotate_about(mesh.sample_points[i], art.hinge_point, rot_b);
  return out;
}

static void check_phi_inputs(const ClassMesh& mesh, const ParamTarget& target) {
  if (mesh.cls != target.cls)
    throw Error(ErrorCode::ClassMismatch, std::string("phi: mesh is ") + class_name(mesh.cls) +
                                              ", target is " + class_name(target.cls));
  if (target.normalized())
    throw Error(ErrorCode::InvariantViolation,
                "phi expects a raw-frame target; use phi_points_normalized");
}

std::vector<Vec3> phi_points(const ClassMesh& mesh, const ParamTarget& target) {
  check_phi_inputs(mesh, target);
  const ClassMesh* posed = &mesh;
  ClassMesh articulated;
  if (mesh.cls == ObjectClass::Gripper) {
    articulated = articulate(mesh, target.opening.value_or(0.0));
    posed = &articulated;
  }
  std::vector<Vec3> out;
  out.reserve(posed->sample_points.size());
  for (const Vec3& p : posed->sample_points) out.push_back(target.pose.apply(p));
  return out;
}

ClassMesh phi_mesh(const ClassMesh& mesh, const ParamTarget& target) {
  check_phi_inputs(mesh, target);
  ClassMesh out = mesh.cls == ObjectClass::Gripper ? articulate(mesh, target.opening.value_or(0.0))
                                                   : mesh;
  for (Vec3& v : out.vertices) v = target.pose.apply(v);
  for (Vec3& p : out.sample_points) p = target.pose.apply(p);
  return out;
}

// ---------------------------------------------------------------------------
// normalization

FrameScale normalize_frame(const Aabb& cloud_extent) {
  if (!cloud_extent.valid() || cloud_extent.longest_extent() < 1e-6)
    throw Error(ErrorCode::DegenerateExtent, "cloud extent below 1e-6 m");
  return FrameScale{cloud_extent.center(), cloud_extent.longest_extent() * 0.5};
}

double normalize_opening(double deg, double alpha_max_deg) {
  return 2.0 * deg / alpha_max_deg - 1.0;
}

double denormalize_opening(double value, double alpha_max_deg) {
  return (value + 1.0) * 0.5 * alpha_max_deg;
}

ParamTarget normalize_target(const ParamTarget& t, const FrameScale& scale, double alpha_max_deg) {
  if (t.normalized()) return t;
  ParamTarget out = t;
  out.pose.position = scale.normalize(t.pose.position);
  out.pose.normalized_frame = true;
  if (t.opening) out.opening = normalize_opening(*t.opening, alpha_max_deg);
  return out;
}

ParamTarget denormalize_target(const ParamTarget& t, const FrameScale& scale,
                               double alpha_max_deg) {
  if (!t.normalized()) return t;
  ParamTarget out = t;
  out.pose.position = scale.denormalize(t.pose.position);
  out.pose.normalized_frame = false;
  if (t.opening) out.opening = denormalize_opening(*t.opening, alpha_max_deg);
  return out;
}

std::vector<Vec3> phi_points_normalized(const ClassMesh& mesh, const ParamTarget& target,
                                        const FrameScale& scale) {
  ParamTarget raw = denormalize_target(target, scale, mesh.alpha_max_deg());
  std::vector<Vec3> pts = phi_points(mesh, raw);
  for (Vec3& p : pts) p = scale.normalize(p);
  return pts;
}

// ---------------------------------------------------------------------------
// surface sampling

static std::vector<Vec3> sample_surface(const ClassMesh& mesh, uint64_t seed, int count,
                                        std::vector<int>* tri_of_sample) {
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no triangles");
  std::vector<double> cum(mesh.triangles.size());
  double total = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    Vec3 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    total += 0.5 * norm(cross(b - a, c - a));
    cum[t] = total;
  }
  if (total <= 0.0) throw Error(ErrorCode::EmptyMesh, "mesh has zero surface area");

  Rng rng(seed);
  std::vector<Vec3> pool(count);
  if (tri_of_sample) tri_of_sample->resize(count);
  for (int i = 0; i < count; ++i) {
    double r = rng.uniform() * total;
    size_t t = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
    if (t >= mesh.triangles.size()) t = mesh.triangles.size() - 1;
    const auto& tri = mesh.triangles[t];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    Vec3 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    pool[i] = a + (b - a) * u + (c - a) * v;
    if (tri_of_sample) (*tri_of_sample)[i] = static_cast<int>(t);
  }
  return pool;
}

// Farthest-point thinning over a dense pool; first index from the rng so the
// 64-point set is a pure function of the seed.
static std::vector<int> fps_thin(const std::vector<Vec3>& pool, int count, Rng& rng) {
  int n = static_cast<int>(pool.size());
  count = std::min(count, n);
  std::vector<int> picked;
  picked.reserve(count);
  int first = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
  picked.push_back(first);
  std::vector<double> d2(n);
  for (int i = 0; i < n; ++i) d2[i] = norm_sq(pool[i] - pool[first]);
  while (static_cast<int>(picked.size()) < count) {
    int best = 0;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i)
      if (d2[i] > best_d) {
        best_d = d2[i];
        best = i;
      }
    picked.push_back(best);
    for (int i = 0; i < n; ++i) d2[i] = std::min(d2[i], norm_sq(pool[i] - pool[best]));
  }
  return picked;
}

std::vector<Vec3> generate_sample_points(const ClassMesh& mesh, uint64_t seed, int count) {
  constexpr int kPoolSize = 4096;
  std::vector<Vec3> pool = sample_surface(mesh, seed, kPoolSize, nullptr);
  Rng rng(Rng::derive(seed, 1));
  std::vector<Vec3> out;
  out.reserve(count);
  for (int i : fps_thin(pool, count, rng)) out.push_back(pool[i]);
  return out;
}

// Fills sample_points and, for grippers, the jaw sample index sets.
static void assign_sample_points(ClassMesh& mesh, uint64_t seed) {
  constexpr int kPoolSize = 4096;
  std::vector<int> tri_of_sample;
  std::vector<Vec3> pool = sample_surface(mesh, seed, kPoolSize, &tri_of_sample);
  Rng rng(Rng::derive(seed, 1));
  std::vector<int> picked = fps_thin(pool, kSamplePointCount, rng);

  mesh.sample_points.clear();
  for (int i : picked) mesh.sample_points.push_back(pool[i]);

  if (mesh.articulation) {
    Articulation& art = *mesh.articulation;
    std::vector<int> group(mesh.vertices.size(), 0);
    for (int i : art.jaw_a) group[i] = 1;
    for (int i : art.jaw_b) group[i] = 2;
    art.jaw_a_samples.clear();
    art.jaw_b_samples.clear();
    for (size_t s = 0; s < picked.size(); ++s) {
      const auto& tri = mesh.triangles[tri_of_sample[picked[s]]];
      int g = group[tri[0]];
      if (g != 0 && group[tri[1]] == g && group[tri[2]] == g) {
        if (g == 1)
          art.jaw_a_samples.push_back(static_cast<int>(s));
        else
          art.jaw_b_samples.push_back(static_cast<int>(s));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// file I/O

static std::string points_cache_path(const std::string& mesh_path) {
  return mesh_path + ".points64";
}

static bool load_points_cache(const std::string& path, std::vector<Vec3>& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  out.clear();
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p.x >> p.y >> p.z)) return false;
    out.push_back(p);
  }
  return out.size() == kSamplePointCount;
}

static void write_points_cache(const std::string& path, const std::vector<Vec3>& pts,
                               uint64_t seed) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "warning: could not write sample-point cache " << path << "\n";
    return;
  }
  out << "# sample-points seed=" << seed << "\n";
  out.precision(17);
  for (const Vec3& p : pts) out << p.x << " " << p.y << " " << p.z << "\n";
}

ClassMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open mesh file " + path);

  ClassMesh mesh;
  mesh.ref = path;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z))
        throw Error(ErrorCode::MeshParseError, path + ":" + std::to_string(line_no) + ": bad v");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> tri{};
      std::string tok;
      int k = 0;
      while (ss >> tok) {
        if (k >= 3)
          throw Error(ErrorCode::MeshParseError,
                      path + ":" + std::to_string(line_no) + ": face is not a triangle");
        tri[k++] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      if (k != 3)
        throw Error(ErrorCode::MeshParseError,
                    path + ":" + std::to_string(line_no) + ": face is not a triangle");
      for (int idx : tri)
        if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
          throw Error(ErrorCode::MeshParseError,
                      path + ":" + std::to_string(line_no) + ": face index out of range");
      mesh.triangles.push_back(tri);
    }
    // other OBJ records are ignored
  }
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw Error(ErrorCode::EmptyMesh, path + " has no geometry");

  uint64_t sample_seed = 0;
  std::string meta_path = path + ".meta.json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream mf(meta_path);
    json meta;
    try {
      mf >> meta;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MeshParseError, meta_path + ": " + e.what());
    }
    if (meta.contains("class")) mesh.cls = class_from_name(meta["class"].get<std::string>());
    if (meta.contains("reference_offset")) {
      auto off = meta["reference_offset"];
      Vec3 o{off[0].get<double>(), off[1].get<double>(), off[2].get<double>()};
      for (Vec3& v : mesh.vertices) v = v - o;
    }
    if (meta.contains("sample_seed")) sample_seed = meta["sample_seed"].get<uint64_t>();
    if (meta.contains("articulation")) {
      auto a = meta["articulation"];
      Articulation art;
      auto read_ranges = [](const json& ranges, std::vector<int>& out) {
        for (const auto& r : ranges)
          for (int i = r[0].get<int>(); i < r[1].get<int>(); ++i) out.push_back(i);
      };
      read_ranges(a["jaw_a"], art.jaw_a);
      read_ranges(a["jaw_b"], art.jaw_b);
      art.hinge_point = {a["hinge_point"][0].get<double>(), a["hinge_point"][1].get<double>(),
                         a["hinge_point"][2].get<double>()};
      art.hinge_axis = normalized(Vec3{a["hinge_axis"][0].get<double>(),
                                       a["hinge_axis"][1].get<double>(),
                                       a["hinge_axis"][2].get<double>()});
      if (a.contains("alpha_max_deg")) art.alpha_max_deg = a["alpha_max_deg"].get<double>();
      mesh.articulation = art;
    }
  }

  std::vector<Vec3> cached;
  if (load_points_cache(points_cache_path(path), cached) && !mesh.articulation) {
    mesh.sample_points = cached;
  } else {
    assign_sample_points(mesh, sample_seed);
    write_points_cache(points_cache_path(path), mesh.sample_points, sample_seed);
  }
  return mesh;
}

void save_mesh(const ClassMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write mesh file " + path);
  out.precision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  out.close();

  json meta;
  meta["class"] = class_name(mesh.cls);
  if (mesh.articulation) {
    const Articulation& art = *mesh.articulation;
    auto to_ranges = [](const std::vector<int>& idx) {
      // indices are contiguous runs by construction
      json ranges = json::array();
      size_t i = 0;
      while (i < idx.size()) {
        size_t j = i;
        while (j + 1 < idx.size() && idx[j + 1] == idx[j] + 1) ++j;
        ranges.push_back({idx[i], idx[j] + 1});
        i = j + 1;
      }
      return ranges;
    };
    meta["articulation"] = {{"jaw_a", to_ranges(art.jaw_a)},
                            {"jaw_b", to_ranges(art.jaw_b)},
                            {"hinge_point", {art.hinge_point.x, art.hinge_point.y,
                                             art.hinge_point.z}},
                            {"hinge_axis", {art.hinge_axis.x, art.hinge_axis.y,
                                            art.hinge_axis.z}},
                            {"alpha_max_deg", art.alpha_max_deg}};
  }
  std::ofstream mf(path + ".meta.json");
  mf << meta.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// procedural stand-in meshes

namespace {

void append_box(ClassMesh& mesh, const Vec3& lo, const Vec3& hi, std::vector<int>* group = nullptr) {
  int base = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back({lo.x, lo.y, lo.z});
  mesh.vertices.push_back({hi.x, lo.y, lo.z});
  mesh.vertices.push_back({hi.x, hi.y, lo.z});
  mesh.vertices.push_back({lo.x, hi.y, lo.z});
  mesh.vertices.push_back({lo.x, lo.y, hi.z});
  mesh.vertices.push_back({hi.x, lo.y, hi.z});
  mesh.vertices.push_back({hi.x, hi.y, hi.z});
  mesh.vertices.push_back({lo.x, hi.y, hi.z});
  static const int faces[12][3] = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                                   {0, 1, 5}, {0, 5, 4}, {2, 3, 7}, {2, 7, 6},
                                   {1, 2, 6}, {1, 6, 5}, {3, 0, 4}, {3, 4, 7}};
  for (const auto& f : faces)
    mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
  if (group)
    for (int i = 0; i < 8; ++i) group->push_back(base + i);
}

void append_cylinder(ClassMesh& mesh, const Vec3& base_center, double radius, double height,
                     int segments = 10) {
  int base = static_cast<int>(mesh.vertices.size());
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    Vec3 rim{radius * std::cos(a), radius * std::sin(a), 0.0};
    mesh.vertices.push_back(base_center + rim);
    mesh.vertices.push_back(base_center + rim + Vec3{0, 0, height});
  }
  for (int i = 0; i < segments; ++i) {
    int j = (i + 1) % segments;
    int b0 = base + 2 * i, t0 = b0 + 1, b1 = base + 2 * j, t1 = b1 + 1;
    mesh.triangles.push_back({b0, b1, t1});
    mesh.triangles.push_back({b0, t1, t0});
  }
}

void append_cone(ClassMesh& mesh, const Vec3& base_center, double radius, double height,
                 int segments = 10) {
  int base = static_cast<int>(mesh.vertices.size());
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    mesh.vertices.push_back(base_center +
                            Vec3{radius * std::cos(a), radius * std::sin(a), 0.0});
  }
  mesh.vertices.push_back(base_center + Vec3{0, 0, height});
  int apex = base + segments;
  for (int i = 0; i < segments; ++i)
    mesh.triangles.push_back({base + i, base + (i + 1) % segments, apex});
}

void append_octasphere(ClassMesh& mesh, const Vec3& center, const Vec3& radii) {
  // one subdivision of the octahedron, 32 faces
  std::vector<Vec3> verts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<std::array<int, 3>> faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                           {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  std::vector<std::array<int, 3>> next;
  for (const auto& f : faces) {
    auto mid = [&](int a, int b) {
      verts.push_back(normalized(verts[a] + verts[b]));
      return static_cast<int>(verts.size()) - 1;
    };
    int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
    next.push_back({f[0], ab, ca});
    next.push_back({f[1], bc, ab});
    next.push_back({f[2], ca, bc});
    next.push_back({ab, bc, ca});
  }
  int base = static_cast<int>(mesh.vertices.size());
  for (const Vec3& v : verts)
    mesh.vertices.push_back(center + Vec3{v.x * radii.x, v.y * radii.y, v.z * radii.z});
  for (const auto& f : next) mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
}

ClassMesh make_pallet() {
  // EUR-like footprint 1.2 x 0.8 x 0.144, origin at the bottom center point.
  ClassMesh m;
  m.cls = ObjectClass::Pallet;
  m.ref = "builtin:pallet";
  append_box(m, {-0.6, -0.4, 0.100}, {0.6, 0.4, 0.144});           // deck
  for (double yc : {-0.35, 0.0, 0.35})
    append_box(m, {-0.6, yc - 0.05, 0.0}, {0.6, yc + 0.05, 0.100});  // skids
  return m;
}

ClassMesh make_platform() {
  // Flat slab, origin at the front-right corner (front = +x, right = -y),
  // top surface at z = 0.
  ClassMesh m;
  m.cls = ObjectClass::LoadingPlatform;
  m.ref = "builtin:platform";
  append_box(m, {-6.0, 0.0, -0.15}, {0.0, 2.4, 0.0});
  return m;
}

ClassMesh make_gripper() {
  // Twin-jaw clamshell: spine on top, two jaw plates hinged at the spine
  // bottom. Recentered so the vertex centroid (center-of-mass convention)
  // sits at the origin.
  ClassMesh m;
  m.cls = ObjectClass::Gripper;
  m.ref = "builtin:gripper";
  Articulation art;
  append_box(m, {-0.60, -0.12, 0.25}, {0.60, 0.12, 0.55});                  // spine
  append_box(m, {-0.55, 0.06, -0.55}, {0.55, 0.18, 0.25}, &art.jaw_a);      // jaw A (+y)
  append_box(m, {-0.55, -0.18, -0.55}, {0.55, -0.06, 0.25}, &art.jaw_b);    // jaw B (-y)
  art.hinge_point = {0.0, 0.0, 0.25};
  art.hinge_axis = {1.0, 0.0, 0.0};
  art.alpha_max_deg = 90.0;

  Vec3 centroid{0, 0, 0};
  for (const Vec3& v : m.vertices) centroid += v;
  centroid = centroid / static_cast<double>(m.vertices.size());
  for (Vec3& v : m.vertices) v = v - centroid;
  art.hinge_point = art.hinge_point - centroid;
  m.articulation = art;
  return m;
}

ClassMesh make_prop(const std::string& ref) {
  ClassMesh m;
  m.cls = ObjectClass::NoObject;
  m.ref = ref;
  if (ref == "builtin:truck") {
    // bed support, cab, crane pillar; platform target sits on top separately
    append_box(m, {-4.0, -1.2, 0.0}, {2.5, 1.2, 0.85});    // chassis
    append_box(m, {2.5, -1.1, 0.0}, {4.0, 1.1, 2.4});      // cab
    append_box(m, {-3.9, -0.4, 0.85}, {-3.1, 0.4, 3.0});   // crane pillar
    append_box(m, {-3.9, -0.25, 3.0}, {-0.5, 0.25, 3.4});  // crane arm
  } else if (ref == "builtin:forklift") {
    append_box(m, {-1.15, -0.6, 0.2}, {1.15, 0.6, 1.5});   // body
    append_box(m, {1.15, -0.55, 0.0}, {1.45, 0.55, 3.6});  // mast
    append_box(m, {-0.3, -0.5, 1.5}, {0.7, 0.5, 2.1});     // cabin
  } else if (ref == "builtin:tree") {
    append_cylinder(m, {0, 0, 0}, 0.12, 1.6);
    append_cone(m, {0, 0, 1.2}, 0.9, 2.4);
  } else if (ref == "builtin:bush") {
    append_octasphere(m, {0, 0, 0.4}, {0.6, 0.6, 0.45});
  } else if (ref == "builtin:wall") {
    append_box(m, {-0.5, -0.1, 0.0}, {0.5, 0.1, 1.0});  // unit wall, scaled per instance
  } else if (ref == "builtin:box") {
    append_box(m, {-0.25, -0.25, 0.0}, {0.25, 0.25, 0.5});
  } else if (ref == "builtin:ground") {
    double r = 40.0;
    int base = 0;
    m.vertices = {{-r, -r, 0}, {r, -r, 0}, {r, r, 0}, {-r, r, 0}};
    m.triangles = {{base, base + 1, base + 2}, {base, base + 2, base + 3}};
  } else {
    throw Error(ErrorCode::ConfigError, "unknown builtin mesh " + ref);
  }
  return m;
}

}  // namespace

ClassMesh builtin_mesh(const std::string& ref) {
  ClassMesh m;
  if (ref == "builtin:pallet")
    m = make_pallet();
  else if (ref == "builtin:platform")
    m = make_platform();
  else if (ref == "builtin:gripper")
    m = make_gripper();
  else
    return make_prop(ref);
  assign_sample_points(m, kBuiltinSampleSeed);
  return m;
}

ClassMesh builtin_class_mesh(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::Gripper:
      return builtin_mesh("builtin:gripper");
    case ObjectClass::LoadingPlatform:
      return builtin_mesh("builtin:platform");
    case ObjectClass::Pallet:
      return builtin_mesh("builtin:pallet");
    default:
      throw Error(ErrorCode::ConfigError, "no class mesh for no_object");
  }
}

MeshLibrary MeshLibrary::builtins() {
  MeshLibrary lib;
  for (const char* ref : {"builtin:gripper", "builtin:platform", "builtin:pallet",
                          "builtin:truck", "builtin:forklift", "builtin:tree", "builtin:bush",
                          "builtin:wall", "builtin:box", "builtin:ground"})
    lib.meshes_[ref] = builtin_mesh(ref);
  return lib;
}

MeshLibrary MeshLibrary::from_directory(const std::string& dir) {
  MeshLibrary lib = builtins();
  if (dir.empty()) return lib;
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::IoError, "mesh directory not found: " + dir);
  std::vector<std::string> paths;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".obj") paths.push_back(e.path().string());
  std::sort(paths.begin(), paths.end());
  for (const std::string& p : paths) lib.meshes_[p] = load_mesh(p);
  return lib;
}

const ClassMesh& MeshLibrary::get(const std::string& ref) const {
  auto it = meshes_.find(ref);
  if (it == meshes_.end()) throw Error(ErrorCode::ConfigError, "unknown mesh ref " + ref);
  return it->second;
}

const ClassMesh& MeshLibrary::for_class(ObjectClass cls) const {
  // meshes loaded from disk (sorted after the builtin: prefix) take precedence
  const ClassMesh* found = nullptr;
  for (const auto& [ref, mesh] : meshes_)
    if (mesh.cls == cls && (!found || ref.rfind("builtin:", 0) != 0)) found = &mesh;
  if (!found) throw Error(ErrorCode::ConfigError, "no mesh registered for class");
  return *found;
}

uint64_t MeshLibrary::content_hash(const std::string& ref) const {
  const ClassMesh& m = get(ref);
  uint64_t h = fnv1a(m.vertices.data(), m.vertices.size() * sizeof(Vec3));
  h = fnv1a(m.triangles.data(), m.triangles.size() * sizeof(std::array<int, 3>), h);
  return h;
}

}  // namespace pardet
