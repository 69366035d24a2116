#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "pardet/geometry.hpp"
#include "pardet/mesh.hpp"

namespace pardet {

// Parameter hypothesis of one class head: position (normalized frame),
// orientation, and the opening value used only by the gripper head.
struct ClassParams {
  Vec3 position;
  Quat orientation;
  double opening = 0.0;  // [-1, 1] in the normalized frame
};

// One query slot: a class distribution plus a parameter set per object class.
// Positions are predicted as offsets from the query point.
struct Prediction {
  std::array<double, 4> class_probs{1.0, 0.0, 0.0, 0.0};  // no-object first
  std::array<ClassParams, kNumObjectClasses> params;
  Vec3 query_point;

  const ClassParams& params_for(ObjectClass cls) const {
    return params[static_cast<int>(cls) - 1];
  }
  ClassParams& params_for(ObjectClass cls) { return params[static_cast<int>(cls) - 1]; }
  double prob(ObjectClass cls) const { return class_probs[static_cast<int>(cls)]; }

  ObjectClass argmax_class() const;
  double confidence() const { return class_probs[static_cast<int>(argmax_class())]; }
};

// Symmetric mean nearest-neighbor distance (plain l2, not squared).
double chamfer(std::span<const Vec3> x, std::span<const Vec3> y);

// l1 position error plus the class-dependent symmetry quaternion loss, plus
// the l1 opening error for grippers. Normalized-frame quantities throughout.
double param_loss(const ClassParams& pred, const ParamTarget& target);
double param_loss(const Prediction& pred, const ParamTarget& target);

struct CostMatrix {
  size_t num_preds = 0;    // K
  size_t num_targets = 0;  // M <= K
  std::vector<double> cost;        // row-major K x M
  std::vector<double> param_part;  // the param-loss term of each entry (may be empty)

  double at(size_t pred, size_t target) const { return cost[pred * num_targets + target]; }
  double param_at(size_t pred, size_t target) const {
    return param_part.empty() ? 0.0 : param_part[pred * num_targets + target];
  }
};

// Entry (j, i) = -prob_j(c_i) + param_loss(j, i), using prediction j's
// class-c_i parameter head. Throws TooFewQueries when K < M.
CostMatrix match_cost_matrix(const std::vector<Prediction>& preds,
                             const std::vector<ParamTarget>& targets);

struct MatchResult {
  std::vector<int> target_to_pred;     // injective, size M
  std::vector<double> pair_class_cost;  // -prob term per target
  std::vector<double> pair_param_cost;  // param loss per target
  std::vector<int> unmatched_preds;    // assigned the no-object class
  double total_cost = 0.0;
};

// Globally cost-minimal assignment of targets to predictions. Rectangular
// input is padded to square with a large finite sentinel. Deterministic; ties
// resolve toward lower prediction indices.
MatchResult hungarian_assign(const CostMatrix& cost);

// Per-scene match report (assignment plus per-pair decomposition).
nlohmann::json match_report_json(const CostMatrix& cost, const MatchResult& result);

struct LossBreakdown {
  double cross_entropy = 0.0;
  double param = 0.0;
  double chamfer = 0.0;
  double total = 0.0;
};

// Set of class meshes used for the Chamfer term.
struct MeshSet {
  const ClassMesh* gripper = nullptr;
  const ClassMesh* loading_platform = nullptr;
  const ClassMesh* pallet = nullptr;

  const ClassMesh& for_class(ObjectClass cls) const;
};

// Forward value of the per-pair training loss: weighted cross-entropy, plus
// param and Chamfer terms for object targets. `target` empty means the
// no-object placeholder. The cross-entropy probability is floored at 1e-12.
LossBreakdown total_loss(const Prediction& pred, const std::optional<ParamTarget>& target,
                         const std::array<double, 4>& class_weights, const MeshSet& meshes,
                         const FrameScale& scale);

// Inverse-frequency weights over {no-object, gripper, platform, pallet},
// normalized to mean 1. Throws EmptyDataset on a zero count.
std::array<double, 4> class_weights(const std::array<int64_t, 4>& counts);

}  // namespace pardet
