#include "pardet/stub.hpp"

#include <algorithm>
#include <cmath>

#include "pardet/error.hpp"
#include "pardet/rng.hpp"

namespace pardet {

ConfidenceModel confidence_model_from_name(const std::string& name) {
  if (name == "oracle") return ConfidenceModel::Oracle;
  if (name == "noise_coupled") return ConfidenceModel::NoiseCoupled;
  throw Error(ErrorCode::ConfigError, "unknown confidence model " + name);
}

const char* confidence_model_name(ConfidenceModel m) {
  return m == ConfidenceModel::Oracle ? "oracle" : "noise_coupled";
}

void StubConfig::validate() const {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(class_confusion_rate) || !rate_ok(miss_rate))
    throw Error(ErrorCode::ConfigError, "stub rates must lie in [0, 1]");
  if (position_sigma < 0.0 || rotation_sigma_deg < 0.0 || opening_sigma_deg < 0.0 ||
      false_positive_rate < 0.0)
    throw Error(ErrorCode::ConfigError, "stub sigmas and rates must be non-negative");
  if (queries < 1) throw Error(ErrorCode::ConfigError, "stub needs at least one query");
}

namespace {

// Perturbation magnitude -> confidence in (0, 1) via a logistic curve, so
// noisier predictions rank lower and precision-recall curves are non-trivial.
double noise_coupled_confidence(double magnitude) {
  return 1.0 / (1.0 + std::exp((magnitude - 0.05) / 0.02));
}

std::array<double, 4> concentrated_probs(ObjectClass cls, double confidence) {
  std::array<double, 4> probs{};
  double rest = 1.0 - confidence;
  for (int c = 0; c < 4; ++c) probs[c] = 0.0;
  probs[static_cast<int>(cls)] = confidence;
  probs[0] += 0.7 * rest;
  for (int c = 1; c < 4; ++c)
    if (c != static_cast<int>(cls)) probs[c] += 0.15 * rest;
  if (cls == ObjectClass::NoObject) {
    // keep the distribution a simplex when the peak is no-object
    probs[0] = confidence;
    for (int c = 1; c < 4; ++c) probs[c] = rest / 3.0;
  }
  return probs;
}

ClassParams jitter_params(const ParamTarget& target, const StubConfig& cfg, double alpha_max_deg,
                          Rng& rng, double* magnitude) {
  ClassParams p;
  Vec3 dp{rng.normal(0.0, cfg.position_sigma), rng.normal(0.0, cfg.position_sigma),
          rng.normal(0.0, cfg.position_sigma)};
  p.position = target.pose.position + dp;

  double angle_deg = rng.normal(0.0, cfg.rotation_sigma_deg);
  Vec3 axis = rng.unit_vector();
  p.orientation = cfg.rotation_sigma_deg > 0.0
                      ? quat_multiply(Quat::from_axis_angle(axis, deg_to_rad(angle_deg)),
                                      target.pose.orientation)
                      : target.pose.orientation;

  double dopen = 0.0;
  p.opening = target.opening.value_or(0.0);
  if (target.cls == ObjectClass::Gripper && cfg.opening_sigma_deg > 0.0) {
    dopen = rng.normal(0.0, cfg.opening_sigma_deg) * 2.0 / alpha_max_deg;  // degrees -> [-1,1]
    p.opening += dopen;
  }

  if (magnitude)
    *magnitude = norm(dp) + std::abs(angle_deg) / 180.0 + std::abs(dopen);
  return p;
}

}  // namespace

std::vector<Prediction> stub_predict(const std::vector<ParamTarget>& targets,
                                     const ScanCloud& normalized_cloud, const StubConfig& cfg,
                                     double alpha_max_deg, uint64_t seed) {
  cfg.validate();
  if (static_cast<int>(targets.size()) > cfg.queries)
    throw Error(ErrorCode::TooManyTargets,
                std::to_string(targets.size()) + " targets exceed K=" +
                    std::to_string(cfg.queries) + " queries");
  for (const ParamTarget& t : targets)
    if (!t.normalized())
      throw Error(ErrorCode::NotNormalized, "stub_predict expects normalized targets");

  // query points from FPS of the input cloud, zero-padded when short
  std::vector<Vec3> queries(cfg.queries, Vec3{});
  if (!normalized_cloud.points.empty()) {
    ScanCloud reduced =
        fps_reduce(normalized_cloud, static_cast<size_t>(cfg.queries), Rng::derive(seed, 0));
    for (size_t i = 0; i < reduced.points.size() && i < queries.size(); ++i)
      queries[i] = reduced.points[i];
  }

  Rng rng(Rng::derive(seed, 1));
  std::vector<Prediction> preds(cfg.queries);
  std::vector<char> slot_used(cfg.queries, 0);
  int next_slot = 0;
  auto claim_slot = [&]() {
    while (next_slot < cfg.queries && slot_used[next_slot]) ++next_slot;
    if (next_slot >= cfg.queries) return -1;
    slot_used[next_slot] = 1;
    return next_slot;
  };

  // surviving targets
  for (const ParamTarget& target : targets) {
    bool miss = rng.bernoulli(cfg.miss_rate);
    if (miss) continue;

    double magnitude = 0.0;
    ClassParams jittered = jitter_params(target, cfg, alpha_max_deg, rng, &magnitude);

    ObjectClass reported = target.cls;
    if (rng.bernoulli(cfg.class_confusion_rate)) {
      int other = static_cast<int>(rng.uniform_int(2));
      int c = static_cast<int>(target.cls);
      reported = static_cast<ObjectClass>(1 + (c - 1 + 1 + other) % 3);
    }

    double conf = cfg.confidence_model == ConfidenceModel::Oracle
                      ? 1.0
                      : noise_coupled_confidence(magnitude);

    int slot = claim_slot();
    if (slot < 0) break;
    Prediction& pred = preds[slot];
    pred.query_point = queries[slot];
    pred.class_probs = concentrated_probs(reported, conf);
    for (int c = 0; c < kNumObjectClasses; ++c) pred.params[c] = jittered;
  }

  // false positives at random poses in the normalized bounds
  int fp_count = cfg.false_positive_rate > 0.0 ? rng.poisson(cfg.false_positive_rate) : 0;
  for (int f = 0; f < fp_count; ++f) {
    ClassParams p;
    p.position = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    p.orientation = rng.unit_quaternion();
    p.opening = rng.uniform(-1.0, 1.0);
    ObjectClass cls = static_cast<ObjectClass>(1 + rng.uniform_int(3));
    double conf = rng.uniform(0.3, 0.9);

    int slot = claim_slot();
    if (slot < 0) break;
    Prediction& pred = preds[slot];
    pred.query_point = queries[slot];
    pred.class_probs = concentrated_probs(cls, conf);
    for (int c = 0; c < kNumObjectClasses; ++c) pred.params[c] = p;
  }

  // remaining queries: no-object dominant
  for (int j = 0; j < cfg.queries; ++j) {
    if (slot_used[j]) continue;
    Prediction& pred = preds[j];
    pred.query_point = queries[j];
    pred.class_probs = {0.97, 0.01, 0.01, 0.01};
    for (int c = 0; c < kNumObjectClasses; ++c) {
      pred.params[c].position = queries[j];
      pred.params[c].orientation = Quat::identity();
      pred.params[c].opening = 0.0;
    }
  }
  return preds;
}

}  // namespace pardet
