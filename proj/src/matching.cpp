#include "pardet/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pardet/error.hpp"

namespace pardet {

namespace {
constexpr double kPadSentinel = 1e6;  // finite pad for rectangular matrices
constexpr double kProbFloor = 1e-12;
}  // namespace

ObjectClass Prediction::argmax_class() const {
  int best = 0;
  for (int c = 1; c < 4; ++c)
    if (class_probs[c] > class_probs[best]) best = c;
  return static_cast<ObjectClass>(best);
}

double chamfer(std::span<const Vec3> x, std::span<const Vec3> y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::EmptySet, "chamfer on an empty point set");

  auto directed = [](std::span<const Vec3> from, std::span<const Vec3> to) {
    const long long n = static_cast<long long>(from.size());
    std::vector<double> mins(n);
#pragma omp parallel for schedule(static) if (n * static_cast<long long>(to.size()) > 16384)
    for (long long i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) best = std::min(best, norm_sq(from[i] - q));
      mins[i] = std::sqrt(best);
    }
    double sum = 0.0;  // serial accumulation keeps the result thread-count independent
    for (double m : mins) sum += m;
    return sum / static_cast<double>(n);
  };

  return directed(x, y) + directed(y, x);
}

double param_loss(const ClassParams& pred, const ParamTarget& target) {
  Vec3 dp = pred.position - target.pose.position;
  double loss = std::abs(dp.x) + std::abs(dp.y) + std::abs(dp.z);
  loss += quat_symmetry_loss(pred.orientation, target.pose.orientation,
                             class_symmetry(target.cls));
  if (target.cls == ObjectClass::Gripper)
    loss += std::abs(pred.opening - target.opening.value_or(0.0));
  return loss;
}

double param_loss(const Prediction& pred, const ParamTarget& target) {
  if (target.cls == ObjectClass::NoObject)
    throw Error(ErrorCode::ClassMismatch, "param_loss is undefined for no-object targets");
  return param_loss(pred.params_for(target.cls), target);
}

CostMatrix match_cost_matrix(const std::vector<Prediction>& preds,
                             const std::vector<ParamTarget>& targets) {
  const size_t k = preds.size(), m = targets.size();
  if (k < m)
    throw Error(ErrorCode::TooFewQueries, "K=" + std::to_string(k) + " predictions for M=" +
                                              std::to_string(m) + " targets");
  CostMatrix out;
  out.num_preds = k;
  out.num_targets = m;
  out.cost.resize(k * m);
  out.param_part.resize(k * m);
#pragma omp parallel for schedule(static) if (k * m > 4096)
  for (long long j = 0; j < static_cast<long long>(k); ++j)
    for (size_t i = 0; i < m; ++i) {
      double param = param_loss(preds[j], targets[i]);
      out.param_part[j * m + i] = param;
      out.cost[j * m + i] = -preds[j].prob(targets[i].cls) + param;
    }
  return out;
}

// Square assignment via shortest augmenting paths with potentials (O(n^3)).
// Column scans run in increasing index with strict improvement, so tied
// optima resolve toward lower prediction indices.
static std::vector<int> solve_square_assignment(const std::vector<double>& a, int n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

MatchResult hungarian_assign(const CostMatrix& cost) {
  const size_t k = cost.num_preds, m = cost.num_targets;
  if (k < m) throw Error(ErrorCode::TooFewQueries, "cost matrix has K < M");
  for (double c : cost.cost)
    if (!std::isfinite(c))
      throw Error(ErrorCode::InvariantViolation, "cost matrix contains non-finite entries");

  // rows = targets padded to K with the sentinel, columns = predictions
  const int n = static_cast<int>(k);
  std::vector<double> square(static_cast<size_t>(n) * n, kPadSentinel);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < k; ++j) square[i * n + j] = cost.at(j, i);

  std::vector<int> row_to_col = solve_square_assignment(square, n);

  MatchResult result;
  result.target_to_pred.resize(m);
  result.pair_class_cost.resize(m, 0.0);
  result.pair_param_cost.resize(m, 0.0);
  std::vector<char> used(k, 0);
  for (size_t i = 0; i < m; ++i) {
    int j = row_to_col[i];
    result.target_to_pred[i] = j;
    used[j] = 1;
    result.total_cost += cost.at(j, i);
    result.pair_param_cost[i] = cost.param_at(j, i);
    result.pair_class_cost[i] = cost.at(j, i) - cost.param_at(j, i);
  }
  for (size_t j = 0; j < k; ++j)
    if (!used[j]) result.unmatched_preds.push_back(static_cast<int>(j));
  return result;
}

nlohmann::json match_report_json(const CostMatrix& cost, const MatchResult& result) {
  nlohmann::json j;
  j["schema"] = "pardet/match@1";
  j["total_cost"] = result.total_cost;
  j["assignment"] = nlohmann::json::array();
  for (size_t i = 0; i < result.target_to_pred.size(); ++i)
    j["assignment"].push_back({{"target", i},
                               {"prediction", result.target_to_pred[i]},
                               {"cost", cost.at(result.target_to_pred[i], i)},
                               {"class_cost", result.pair_class_cost[i]},
                               {"param_cost", result.pair_param_cost[i]}});
  j["unmatched_predictions"] = result.unmatched_preds;
  return j;
}

const ClassMesh& MeshSet::for_class(ObjectClass cls) const {
  const ClassMesh* m = nullptr;
  switch (cls) {
    case ObjectClass::Gripper:
      m = gripper;
      break;
    case ObjectClass::LoadingPlatform:
      m = loading_platform;
      break;
    case ObjectClass::Pallet:
      m = pallet;
      break;
    default:
      break;
  }
  if (!m) throw Error(ErrorCode::ConfigError, "mesh set is missing a class mesh");
  return *m;
}

LossBreakdown total_loss(const Prediction& pred, const std::optional<ParamTarget>& target,
                         const std::array<double, 4>& class_weights, const MeshSet& meshes,
                         const FrameScale& scale) {
  LossBreakdown out;
  ObjectClass cls = target ? target->cls : ObjectClass::NoObject;
  double w = class_weights[static_cast<int>(cls)];
  out.cross_entropy = -w * std::log(std::max(pred.prob(cls), kProbFloor));
  if (target && cls != ObjectClass::NoObject) {
    out.param = param_loss(pred, *target);
    const ClassMesh& mesh = meshes.for_class(cls);
    ParamTarget pred_as_target;
    pred_as_target.cls = cls;
    pred_as_target.pose.position = pred.params_for(cls).position;
    pred_as_target.pose.orientation = pred.params_for(cls).orientation;
    pred_as_target.pose.normalized_frame = true;
    if (cls == ObjectClass::Gripper) pred_as_target.opening = pred.params_for(cls).opening;
    std::vector<Vec3> px = phi_points_normalized(mesh, pred_as_target, scale);
    std::vector<Vec3> tx = phi_points_normalized(mesh, *target, scale);
    out.chamfer = chamfer(px, tx);
  }
  out.total = out.cross_entropy + out.param + out.chamfer;
  return out;
}

std::array<double, 4> class_weights(const std::array<int64_t, 4>& counts) {
  std::array<double, 4> w{};
  double sum_inv = 0.0;
  for (int c = 0; c < 4; ++c) {
    if (counts[c] <= 0)
      throw Error(ErrorCode::EmptyDataset,
                  std::string("class ") + std::to_string(c) + " has no samples");
    w[c] = 1.0 / static_cast<double>(counts[c]);
    sum_inv += w[c];
  }
  double mean = sum_inv / 4.0;
  for (double& x : w) x /= mean;
  return w;
}

}  // namespace pardet
