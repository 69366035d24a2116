#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pardet/geometry.hpp"

namespace pardet {

enum class ObjectClass : int { NoObject = 0, Gripper = 1, LoadingPlatform = 2, Pallet = 3 };

constexpr int kNumObjectClasses = 3;  // gripper, loading platform, pallet
constexpr int kSamplePointCount = 64;

SymmetrySet class_symmetry(ObjectClass cls);
const char* class_name(ObjectClass cls);
ObjectClass class_from_name(const std::string& name);

// One ground-truth object: class, pose, and (grippers only) opening angle.
// Position semantics per class: gripper = center of mass, loading platform =
// front-right corner, pallet = bottom center point.
struct ParamTarget {
  ObjectClass cls = ObjectClass::NoObject;
  Pose pose;
  std::optional<double> opening = {};  // degrees when raw, [-1,1] when normalized

  bool normalized() const { return pose.normalized_frame; }
};

// Hinged twin-jaw articulation. Opening rotates jaw A by +alpha/2 and jaw B by
// -alpha/2 about (hinge_point, hinge_axis).
struct Articulation {
  std::vector<int> jaw_a;          // vertex indices
  std::vector<int> jaw_b;
  std::vector<int> jaw_a_samples;  // indices into sample_points
  std::vector<int> jaw_b_samples;
  Vec3 hinge_point;
  Vec3 hinge_axis{1.0, 0.0, 0.0};
  double alpha_max_deg = 90.0;
};

// Body frame: +x long axis, +z up, origin at the class reference point.
struct ClassMesh {
  ObjectClass cls = ObjectClass::NoObject;
  std::string ref;  // "builtin:pallet" or a file path
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::optional<Articulation> articulation;
  std::vector<Vec3> sample_points;  // exactly 64 for target classes

  Aabb bounds() const { return Aabb::of_points(vertices); }
  double alpha_max_deg() const { return articulation ? articulation->alpha_max_deg : 90.0; }
};

// Rotates the jaw vertex sets (and their sample points) about the hinge.
// Throws NotArticulable / OpeningOutOfRange.
ClassMesh articulate(const ClassMesh& mesh, double opening_deg);

// Phi: articulate (grippers), then rigidly transform by the target pose.
// Returns the 64 posed surface points; phi_mesh returns the posed mesh.
std::vector<Vec3> phi_points(const ClassMesh& mesh, const ParamTarget& target);
ClassMesh phi_mesh(const ClassMesh& mesh, const ParamTarget& target);

// Scale record for the per-cloud [-1,1] normalization: coordinates are
// centered on the cloud AABB and divided by half its longest extent.
struct FrameScale {
  Vec3 center;
  double half_extent = 1.0;

  Vec3 normalize(const Vec3& p) const { return (p - center) / half_extent; }
  Vec3 denormalize(const Vec3& p) const { return p * half_extent + center; }
};

// Throws DegenerateExtent when the longest axis is below 1e-6 m.
FrameScale normalize_frame(const Aabb& cloud_extent);

// Opening angle [0, alpha_max] <-> [-1, 1], linear.
double normalize_opening(double deg, double alpha_max_deg);
double denormalize_opening(double value, double alpha_max_deg);

ParamTarget normalize_target(const ParamTarget& t, const FrameScale& scale, double alpha_max_deg);
ParamTarget denormalize_target(const ParamTarget& t, const FrameScale& scale, double alpha_max_deg);

// Phi evaluated for a normalized-frame target: denormalize the pose, apply phi
// in meters, then map the points back into the normalized frame.
std::vector<Vec3> phi_points_normalized(const ClassMesh& mesh, const ParamTarget& target,
                                        const FrameScale& scale);

// ASCII OBJ subset (v/f, triangulated) plus a JSON sidecar <path>.meta.json.
// Sample points are cached next to the mesh as a 64x3 ASCII table.
ClassMesh load_mesh(const std::string& path);
void save_mesh(const ClassMesh& mesh, const std::string& path);

// Area-weighted surface sampling followed by farthest-point thinning.
std::vector<Vec3> generate_sample_points(const ClassMesh& mesh, uint64_t seed,
                                         int count = kSamplePointCount);

// Procedural stand-in meshes so the pipeline runs without CAD files.
// Targets: "builtin:gripper", "builtin:platform", "builtin:pallet".
// Props:   "builtin:truck", "builtin:forklift", "builtin:tree",
//          "builtin:bush", "builtin:wall", "builtin:box", "builtin:ground".
ClassMesh builtin_mesh(const std::string& ref);
ClassMesh builtin_class_mesh(ObjectClass cls);

class MeshLibrary {
 public:
  static MeshLibrary builtins();

  // Loads every *.obj in dir (with sidecars) on top of the builtins; class
  // meshes found there replace the procedural stand-ins.
  static MeshLibrary from_directory(const std::string& dir);

  const ClassMesh& get(const std::string& ref) const;
  const ClassMesh& for_class(ObjectClass cls) const;
  uint64_t content_hash(const std::string& ref) const;

 private:
  std::map<std::string, ClassMesh> meshes_;
};

}  // namespace pardet
